"""Lower bounds for Euclidean distance and DTW, and the TLB tightness ratio."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .errors import (
    BoundViolation,
    DataError,
    EmptyInput,
    FrameMismatch,
    LengthMismatch,
    TransformMismatch,
)
from .transforms import ReducedVector

__all__ = [
    "Envelope",
    "reduced_lb",
    "tlb",
    "lb_kim",
    "lb_yi",
    "envelope",
    "lb_keogh",
    "lb_paa",
    "BOUND_SLACK",
]

# Absolute slack allowed when checking a bound against the true distance.
BOUND_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class Envelope:
    upper: np.ndarray
    lower: np.ndarray
    r: int

    def __post_init__(self):
        u = np.asarray(self.upper, dtype=np.float64)
        l = np.asarray(self.lower, dtype=np.float64)
        if u.shape != l.shape:
            raise LengthMismatch("envelope borders differ in length")
        if np.any(l > u):
            raise DataError("envelope lower border exceeds upper border")
        object.__setattr__(self, "upper", u)
        object.__setattr__(self, "lower", l)

    def __len__(self) -> int:
        return int(self.upper.shape[0])


def reduced_lb(a: ReducedVector, b: ReducedVector) -> float:
    """Weighted Euclidean distance between two reduced vectors of the same transform."""
    if a.transform_id != b.transform_id or a.dim != b.dim or a.source_len != b.source_len:
        raise TransformMismatch(
            f"cannot compare {a.transform_id}[{a.dim}] of length {a.source_len} "
            f"with {b.transform_id}[{b.dim}] of length {b.source_len}"
        )
    d = (a.coords - b.coords) * a.weights()
    return float(np.sqrt(np.dot(d, d)))


def tlb(lb: float, true_dist: float) -> float:
    """Tightness of a lower bound, ``lb / true_dist`` (1 when both are zero)."""
    if lb < 0 or true_dist < 0:
        raise DataError(f"distances must be non-negative, got lb={lb}, true={true_dist}")
    if lb > true_dist + BOUND_SLACK:
        raise BoundViolation(f"lower bound {lb!r} exceeds true distance {true_dist!r}")
    if true_dist == 0.0:
        return 1.0
    return min(lb / true_dist, 1.0)


def _nonempty(*arrays) -> list[np.ndarray]:
    out = [np.asarray(a, dtype=np.float64).reshape(-1) for a in arrays]
    if any(a.size == 0 for a in out):
        raise EmptyInput("lower bound needs non-empty series")
    return out


def lb_kim(x, y) -> float:
    """Largest absolute difference among first, last, min and max features."""
    x, y = _nonempty(x, y)
    return float(max(
        abs(x[0] - y[0]),
        abs(x[-1] - y[-1]),
        abs(x.min() - y.min()),
        abs(x.max() - y.max()),
    ))


def _yi_one_side(x: np.ndarray, y: np.ndarray) -> float:
    hi, lo = y.max(), y.min()
    excess = np.where(x > hi, x - hi, np.where(x < lo, lo - x, 0.0))
    return float(np.dot(excess, excess))


def lb_yi(x, y, symmetric: bool = True) -> float:
    """Points of ``x`` outside the range of ``y`` each cost their squared excess.

    With ``symmetric`` (the default) the roles are also swapped and the larger
    of the two orientations is returned.
    """
    x, y = _nonempty(x, y)
    sq = _yi_one_side(x, y)
    if symmetric:
        sq = max(sq, _yi_one_side(y, x))
    return float(np.sqrt(sq))


def envelope(q, r: int) -> Envelope:
    """Running max/min of ``q`` over ``[i - r, i + r]``, clipped at the ends."""
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if r < 0:
        raise DataError(f"envelope radius must be >= 0, got {r}")
    if r > q.size:
        raise DataError(f"envelope radius {r} exceeds series length {q.size}")
    size = 2 * r + 1
    # 'nearest' replicates edge values, which never changes a max/min over the clipped window
    upper = maximum_filter1d(q, size=size, mode="nearest")
    lower = minimum_filter1d(q, size=size, mode="nearest")
    return Envelope(upper, lower, r)


def _keogh_sq(s: np.ndarray, upper: np.ndarray, lower: np.ndarray) -> float:
    d = np.where(s > upper, s - upper, np.where(s < lower, lower - s, 0.0))
    return float(np.dot(d, d))


def lb_keogh(env: Envelope, s) -> float:
    s = np.asarray(s, dtype=np.float64).reshape(-1)
    if s.size != len(env):
        raise LengthMismatch(f"series length {s.size} != envelope length {len(env)}")
    return float(np.sqrt(_keogh_sq(s, env.upper, env.lower)))


def lb_paa(env: Envelope, N: int, s_paa: ReducedVector) -> float:
    """LB_Keogh on frame means of both envelope borders, scaled by ``sqrt(n / N)``."""
    n = len(env)
    if N < 1 or n % N:
        raise FrameMismatch(f"{N} frames do not divide envelope length {n}")
    if s_paa.transform_id != "paa" or s_paa.dim != N or s_paa.source_len != n:
        raise FrameMismatch(f"expected a {N}-frame PAA of a length-{n} series")
    upper = env.upper.reshape(N, n // N).mean(axis=1)
    lower = env.lower.reshape(N, n // N).mean(axis=1)
    return float(np.sqrt((n / N) * _keogh_sq(s_paa.coords, upper, lower)))
