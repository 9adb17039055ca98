"""True distances: Lp norms, constrained DTW, ERP and EDR.

DTW accumulates squared pointwise costs and returns the square root of the
optimum, so it is commensurate with the Euclidean distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .errors import (
    DataError,
    EmptyInput,
    InfeasibleConstraint,
    InvalidP,
    LengthMismatch,
)

__all__ = [
    "DtwConstraint",
    "DistanceSpec",
    "lp_norm",
    "euclidean",
    "dtw",
    "dtw_path",
    "erp",
    "edr",
    "edr_default_tol",
]

_NONE, _SAKOE, _ITAKURA = 0, 1, 2
_KINDS = {"none": _NONE, "sakoe_chiba": _SAKOE, "itakura": _ITAKURA}


@dataclass(frozen=True)
class DtwConstraint:
    """Global warping constraint.

    ``sakoe_chiba`` admits cells with ``|i - j| <= r``. ``itakura`` admits cells
    inside slope-2 and slope-1/2 cones drawn from both corners (equal lengths
    only); ``r`` is ignored for ``none`` and ``itakura``.
    """

    kind: str = "none"
    r: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DataError(f"unknown DTW constraint {self.kind!r}")
        if self.r < 0:
            raise DataError(f"band half-width must be >= 0, got {self.r}")

    @classmethod
    def parse(cls, text: str) -> "DtwConstraint":
        """Parse ``none``, ``itakura`` or ``sakoe:R``."""
        if text in ("none", "itakura"):
            return cls(text)
        if text.startswith("sakoe:"):
            return cls("sakoe_chiba", int(text.split(":", 1)[1]))
        raise DataError(f"cannot parse DTW constraint {text!r}")

    def __str__(self) -> str:
        return f"sakoe:{self.r}" if self.kind == "sakoe_chiba" else self.kind


def _vec(x) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64).reshape(-1))


def lp_norm(x, y, p: float = 2.0) -> float:
    """``(sum |x_i - y_i|^p)^(1/p)``; ``p = inf`` gives the Chebyshev distance."""
    if p < 1:
        raise InvalidP(f"p must be >= 1, got {p}")
    x, y = _vec(x), _vec(y)
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths differ: {x.shape[0]} vs {y.shape[0]}")
    d = np.abs(x - y)
    if p == 2:
        return float(np.sqrt(np.dot(d, d)))
    if p == 1:
        return float(d.sum())
    if np.isinf(p):
        return float(d.max()) if d.size else 0.0
    return float(np.sum(d ** p) ** (1.0 / p))


def euclidean(x, y) -> float:
    return lp_norm(x, y, 2.0)


@numba.njit(cache=True, inline="always")
def _allowed(i, j, n, m, mode, r):
    if mode == _SAKOE:
        return abs(i - j) <= r
    if mode == _ITAKURA:
        a = n - 1 - i
        b = m - 1 - j
        return j <= 2 * i and i <= 2 * j and b <= 2 * a and a <= 2 * b
    return True


@numba.njit(cache=True)
def _dtw_rows(x, y, mode, r):
    n, m = x.shape[0], y.shape[0]
    inf = np.inf
    prev = np.full(m, inf)
    cur = np.full(m, inf)
    for i in range(n):
        if mode == _SAKOE:
            lo, hi = max(0, i - r), min(m - 1, i + r)
        else:
            lo, hi = 0, m - 1
        for j in range(m):
            cur[j] = inf
        for j in range(lo, hi + 1):
            if not _allowed(i, j, n, m, mode, r):
                continue
            d = x[i] - y[j]
            c = d * d
            if i == 0 and j == 0:
                cur[j] = c
                continue
            best = inf
            if i > 0:
                if prev[j] < best:
                    best = prev[j]
                if j > 0 and prev[j - 1] < best:
                    best = prev[j - 1]
            if j > 0 and cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = c + best
        prev, cur = cur, prev
    return prev[m - 1]


@numba.njit(cache=True)
def _dtw_matrix(x, y, mode, r):
    n, m = x.shape[0], y.shape[0]
    acc = np.full((n, m), np.inf)
    for i in range(n):
        for j in range(m):
            if not _allowed(i, j, n, m, mode, r):
                continue
            d = x[i] - y[j]
            c = d * d
            if i == 0 and j == 0:
                acc[i, j] = c
                continue
            best = np.inf
            if i > 0:
                best = min(best, acc[i - 1, j])
                if j > 0:
                    best = min(best, acc[i - 1, j - 1])
            if j > 0:
                best = min(best, acc[i, j - 1])
            acc[i, j] = c + best
    return acc


def _dtw_args(x, y, c: Optional[DtwConstraint]):
    x, y = _vec(x), _vec(y)
    if x.size == 0 or y.size == 0:
        raise EmptyInput("DTW needs two non-empty series")
    c = c or DtwConstraint()
    if c.kind == "sakoe_chiba" and c.r < abs(x.size - y.size):
        raise InfeasibleConstraint(f"band r={c.r} cannot bridge lengths {x.size} and {y.size}")
    if c.kind == "itakura" and x.size != y.size:
        raise InfeasibleConstraint("the Itakura parallelogram needs equal lengths")
    return x, y, _KINDS[c.kind], c.r


def dtw(x, y, c: Optional[DtwConstraint] = None) -> float:
    """Dynamic time warping distance under constraint ``c`` (default unconstrained).

    Uses two rolling rows of the accumulation matrix.
    """
    x, y, mode, r = _dtw_args(x, y, c)
    if mode == _SAKOE and r == 0:
        # a zero-width band admits only the diagonal path
        return lp_norm(x, y)
    return float(np.sqrt(_dtw_rows(x, y, mode, r)))


def dtw_path(x, y, c: Optional[DtwConstraint] = None):
    """Full-matrix DTW returning ``(distance, path)``; ``path`` is a list of ``(i, j)``."""
    x, y, mode, r = _dtw_args(x, y, c)
    acc = _dtw_matrix(x, y, mode, r)
    i, j = x.size - 1, y.size - 1
    path = [(i, j)]
    while (i, j) != (0, 0):
        steps = []
        if i > 0 and j > 0:
            steps.append((acc[i - 1, j - 1], i - 1, j - 1))
        if i > 0:
            steps.append((acc[i - 1, j], i - 1, j))
        if j > 0:
            steps.append((acc[i, j - 1], i, j - 1))
        _, i, j = min(steps)
        path.append((i, j))
    return float(np.sqrt(acc[-1, -1])), path[::-1]


@numba.njit(cache=True)
def _erp(x, y, g):
    n, m = x.shape[0], y.shape[0]
    prev = np.empty(m + 1)
    cur = np.empty(m + 1)
    prev[0] = 0.0
    for j in range(1, m + 1):
        prev[j] = prev[j - 1] + abs(y[j - 1] - g)
    for i in range(1, n + 1):
        cur[0] = prev[0] + abs(x[i - 1] - g)
        for j in range(1, m + 1):
            sub = prev[j - 1] + abs(x[i - 1] - y[j - 1])
            gx = prev[j] + abs(x[i - 1] - g)
            gy = cur[j - 1] + abs(y[j - 1] - g)
            cur[j] = min(sub, gx, gy)
        prev, cur = cur, prev
    return prev[m]


def erp(x, y, g: float = 0.0) -> float:
    """Edit distance with real penalty (L1 form); gaps cost ``|v - g|``."""
    return float(_erp(_vec(x), _vec(y), float(g)))


@numba.njit(cache=True)
def _edr(x, y, tol):
    n, m = x.shape[0], y.shape[0]
    prev = np.empty(m + 1)
    cur = np.empty(m + 1)
    for j in range(m + 1):
        prev[j] = j
    for i in range(1, n + 1):
        cur[0] = i
        for j in range(1, m + 1):
            sub = 0.0 if abs(x[i - 1] - y[j - 1]) <= tol else 1.0
            cur[j] = min(prev[j - 1] + sub, prev[j] + 1.0, cur[j - 1] + 1.0)
        prev, cur = cur, prev
    return prev[m]


def edr_default_tol(x, y) -> float:
    both = np.concatenate([_vec(x), _vec(y)])
    return 0.25 * float(both.std()) if both.size else 0.0


def edr(x, y, tol: Optional[float] = None) -> float:
    """Edit distance on real sequences; a pair matches when ``|x_i - y_j| <= tol``.

    ``tol=None`` uses a quarter of the population std of both inputs combined.
    """
    x, y = _vec(x), _vec(y)
    if tol is None:
        tol = edr_default_tol(x, y)
    if tol < 0:
        raise DataError(f"EDR tolerance must be >= 0, got {tol}")
    return float(_edr(x, y, float(tol)))


DISTANCE_KINDS = ("l1", "l2", "lp", "dtw", "erp", "edr")


@dataclass(frozen=True)
class DistanceSpec:
    """A configured distance, callable as ``spec(x, y)``."""

    kind: str = "l2"
    p: float = 2.0
    constraint: DtwConstraint = DtwConstraint()
    gap: float = 0.0
    tol: Optional[float] = None

    def __post_init__(self):
        if self.kind not in DISTANCE_KINDS:
            raise DataError(f"unknown distance {self.kind!r}")
        if self.kind == "lp" and self.p < 1:
            raise InvalidP(f"p must be >= 1, got {self.p}")

    @property
    def is_euclidean(self) -> bool:
        return self.kind == "l2" or (self.kind == "lp" and self.p == 2)

    def __call__(self, x, y) -> float:
        if self.kind == "l2":
            return lp_norm(x, y, 2.0)
        if self.kind == "l1":
            return lp_norm(x, y, 1.0)
        if self.kind == "lp":
            return lp_norm(x, y, self.p)
        if self.kind == "dtw":
            return dtw(x, y, self.constraint)
        if self.kind == "erp":
            return erp(x, y, self.gap)
        return edr(x, y, self.tol)
