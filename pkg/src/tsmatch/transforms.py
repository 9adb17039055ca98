"""Dimensionality-reduction transforms for window vectors.

Every indexable transform comes with per-coordinate weights such that the
weighted Euclidean distance between two reduced vectors never exceeds the
Euclidean distance between the original windows:

* ``paa``      plain frame means; weight ``sqrt(n / N)`` on every frame.
* ``dft``      orthonormal DFT (``1/sqrt(n)``), first ``k`` coefficients as
               interleaved ``(re, im)`` pairs. Coefficients that have a
               conjugate twin (all but DC and, for even ``n``, Nyquist) get
               weight ``sqrt(2)``, so keeping all ``n//2 + 1`` reproduces the
               Euclidean distance.
* ``dct``      orthonormal DCT-II, first ``k`` coefficients.
* ``haar``     orthonormal Haar, first ``k`` coefficients coarse-to-fine.
* ``identity`` the window itself.

APCA is provided for representation studies and is not indexable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.fft

from .errors import (
    DataError,
    FrameMismatch,
    NotPowerOfTwo,
    TooManyCoefficients,
    TooManySegments,
    TransformMismatch,
)

__all__ = [
    "TRANSFORM_IDS",
    "ReducedVector",
    "ApcaRepresentation",
    "TransformSpec",
    "paa",
    "dft",
    "dct",
    "haar",
    "identity",
    "apca",
    "reconstruct",
    "haar_full",
    "haar_inverse",
]

TRANSFORM_IDS = ("paa", "dft", "dct", "haar", "identity")

_SQRT2 = np.sqrt(2.0)

# APCA switches from the exact DP to the greedy heuristic above this n*M.
APCA_EXACT_LIMIT = 2 ** 16


@dataclass(frozen=True, eq=False)
class ReducedVector:
    coords: np.ndarray
    transform_id: str
    source_len: int

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(c)):
            raise DataError("reduced vector has non-finite coordinates")
        if self.transform_id not in TRANSFORM_IDS:
            raise DataError(f"unknown transform id {self.transform_id!r}")
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return int(self.coords.shape[0])

    def weights(self) -> np.ndarray:
        return coordinate_weights(self.transform_id, self.source_len, self.dim)

    def weighted(self) -> np.ndarray:
        """Coordinates scaled into the space where plain Euclidean distance lower-bounds."""
        return self.coords * self.weights()


@dataclass(frozen=True)
class ApcaRepresentation:
    """Adaptive piecewise-constant approximation: ``(mean, inclusive end)`` per segment."""

    segments: tuple

    def __post_init__(self):
        segs = tuple((float(m), int(e)) for m, e in self.segments)
        if not segs:
            raise DataError("APCA representation needs at least one segment")
        ends = [e for _, e in segs]
        if any(b <= a for a, b in zip(ends, ends[1:])) or ends[0] < 0:
            raise DataError("APCA segment ends must be strictly increasing")
        object.__setattr__(self, "segments", segs)

    @property
    def source_len(self) -> int:
        return self.segments[-1][1] + 1

    def __len__(self) -> int:
        return len(self.segments)


def _dft_weights(n: int, k: int) -> np.ndarray:
    f = np.arange(k)
    w = np.where((f == 0) | ((n % 2 == 0) & (f == n // 2)), 1.0, _SQRT2)
    return np.repeat(w, 2)


def coordinate_weights(transform_id: str, n: int, dim: int) -> np.ndarray:
    if transform_id == "paa":
        return np.full(dim, np.sqrt(n / dim))
    if transform_id == "dft":
        return _dft_weights(n, dim // 2)
    return np.ones(dim)


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TransformSpec:
    """A transform plus its size parameter (frames for PAA, coefficients otherwise).

    ``param`` is ignored by ``identity``.
    """

    kind: str = "paa"
    param: int = 4

    def __post_init__(self):
        if self.kind not in TRANSFORM_IDS:
            raise DataError(f"unknown transform {self.kind!r}; expected one of {TRANSFORM_IDS}")
        if self.kind != "identity" and self.param < 1:
            raise DataError(f"transform parameter must be positive, got {self.param}")

    def validate(self, n: int) -> None:
        k = self.param
        if self.kind == "paa":
            if n % k:
                raise FrameMismatch(f"{k} frames do not divide window length {n}")
        elif self.kind == "dft":
            if k > n // 2 + 1:
                raise TooManyCoefficients(f"DFT of length {n} has at most {n // 2 + 1} coefficients, asked {k}")
        elif self.kind == "dct":
            if k > n:
                raise TooManyCoefficients(f"DCT of length {n} has {n} coefficients, asked {k}")
        elif self.kind == "haar":
            if not _is_pow2(n):
                raise NotPowerOfTwo(f"Haar transform needs a power-of-two length, got {n}")
            if k > n:
                raise TooManyCoefficients(f"Haar of length {n} has {n} coefficients, asked {k}")

    def dim(self, n: int) -> int:
        if self.kind == "identity":
            return n
        if self.kind == "dft":
            return 2 * self.param
        return self.param

    def batch(self, X) -> np.ndarray:
        """Transform every row of ``X`` (shape ``(m, n)``) into raw coordinates."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        n = X.shape[1]
        self.validate(n)
        k = self.param
        if self.kind == "paa":
            return X.reshape(X.shape[0], k, n // k).mean(axis=2)
        if self.kind == "dft":
            F = np.fft.rfft(X, axis=1, norm="ortho")[:, :k]
            out = np.empty((X.shape[0], 2 * k))
            out[:, 0::2] = F.real
            out[:, 1::2] = F.imag
            return out
        if self.kind == "dct":
            return scipy.fft.dct(X, type=2, norm="ortho", axis=1)[:, :k]
        if self.kind == "haar":
            return haar_full(X)[:, :k]
        return X.copy()

    def weighted_batch(self, X) -> np.ndarray:
        """Raw coordinates times :func:`coordinate_weights`."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        C = self.batch(X)
        return C * coordinate_weights(self.kind, X.shape[1], C.shape[1])

    def __call__(self, values) -> ReducedVector:
        x = np.asarray(values, dtype=np.float64).reshape(-1)
        return ReducedVector(self.batch(x[None, :])[0], self.kind, x.shape[0])


def paa(values, N: int) -> ReducedVector:
    """Frame means over ``N`` equal frames; ``N`` must divide the length."""
    return TransformSpec("paa", N)(values)


def dft(values, k: int) -> ReducedVector:
    return TransformSpec("dft", k)(values)


def dct(values, k: int) -> ReducedVector:
    return TransformSpec("dct", k)(values)


def haar(values, k: int) -> ReducedVector:
    return TransformSpec("haar", k)(values)


def identity(values) -> ReducedVector:
    return TransformSpec("identity", 1)(values)


def haar_full(X) -> np.ndarray:
    """Orthonormal Haar coefficients along the last axis, coarse-to-fine.

    Layout: ``[approx, detail(level 1 coef), detail(level 2, 2 coefs), ...]``.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[-1]
    if not _is_pow2(n):
        raise NotPowerOfTwo(f"Haar transform needs a power-of-two length, got {n}")
    details = []
    a = X
    while a.shape[-1] > 1:
        even, odd = a[..., 0::2], a[..., 1::2]
        details.append((even - odd) / _SQRT2)
        a = (even + odd) / _SQRT2
    return np.concatenate([a] + details[::-1], axis=-1)


def haar_inverse(C) -> np.ndarray:
    C = np.asarray(C, dtype=np.float64)
    n = C.shape[-1]
    if not _is_pow2(n):
        raise NotPowerOfTwo(f"Haar inverse needs a power-of-two length, got {n}")
    a = C[..., :1]
    pos = 1
    while pos < n:
        d = C[..., pos:2 * pos]
        out = np.empty(C.shape[:-1] + (2 * pos,))
        out[..., 0::2] = (a + d) / _SQRT2
        out[..., 1::2] = (a - d) / _SQRT2
        a = out
        pos *= 2
    return a


# -- APCA ------------------------------------------------------------------

def _sse_table(x: np.ndarray):
    c1 = np.concatenate([[0.0], np.cumsum(x)])
    c2 = np.concatenate([[0.0], np.cumsum(x * x)])
    return c1, c2


def _apca_exact(x: np.ndarray, M: int) -> list[int]:
    """Inclusive segment ends of the SSE-optimal ``M``-segmentation (O(M n^2))."""
    n = x.shape[0]
    c1, c2 = _sse_table(x)
    # cost[i, j]: SSE of x[i:j] for i < j
    i = np.arange(n + 1)[:, None]
    j = np.arange(n + 1)[None, :]
    length = np.maximum(j - i, 1)
    s = c1[None, :] - c1[:, None]
    cost = (c2[None, :] - c2[:, None]) - s * s / length
    cost = np.where(j > i, np.maximum(cost, 0.0), np.inf)

    # best[m][j]: min SSE covering x[:j] with m segments
    best = np.full((M + 1, n + 1), np.inf)
    arg = np.zeros((M + 1, n + 1), dtype=np.int64)
    best[0, 0] = 0.0
    for m in range(1, M + 1):
        tot = best[m - 1][:, None] + cost  # split i -> end j
        arg[m] = np.argmin(tot, axis=0)
        best[m] = tot[arg[m], np.arange(n + 1)]
    ends = []
    jj = n
    for m in range(M, 0, -1):
        ends.append(jj - 1)
        jj = int(arg[m, jj])
    return ends[::-1]


def _apca_greedy(x: np.ndarray, M: int) -> list[int]:
    """Bottom-up merge: start from Haar-reconstructed runs (or single points), merge cheapest pairs."""
    n = x.shape[0]
    if _is_pow2(n):
        C = haar_full(x)
        keep = np.argsort(-np.abs(C), kind="stable")[:M]
        Ck = np.zeros_like(C)
        Ck[keep] = C[keep]
        approx = haar_inverse(Ck)
        ends = [i for i in range(n - 1) if not np.isclose(approx[i], approx[i + 1])] + [n - 1]
    else:
        ends = list(range(n))
    c1, c2 = _sse_table(x)

    def sse(a, b):  # x[a:b]
        s = c1[b] - c1[a]
        return max((c2[b] - c2[a]) - s * s / (b - a), 0.0)

    starts = [0] + [e + 1 for e in ends[:-1]]
    segs = [(s, e + 1) for s, e in zip(starts, ends)]
    while len(segs) > M:
        deltas = [sse(segs[t][0], segs[t + 1][1]) - sse(*segs[t]) - sse(*segs[t + 1]) for t in range(len(segs) - 1)]
        t = int(np.argmin(deltas))
        segs[t:t + 2] = [(segs[t][0], segs[t + 1][1])]
    while len(segs) < M:
        # split the segment whose best single cut saves the most error
        best = None
        for t, (a, b) in enumerate(segs):
            for cut in range(a + 1, b):
                gain = sse(a, b) - sse(a, cut) - sse(cut, b)
                if best is None or gain > best[0]:
                    best = (gain, t, cut)
        _, t, cut = best
        a, b = segs[t]
        segs[t:t + 1] = [(a, cut), (cut, b)]
    return [b - 1 for _, b in segs]


def apca(values, M: int) -> ApcaRepresentation:
    """Adaptive piecewise-constant approximation with ``M`` segments.

    Exact SSE-minimizing dynamic program when ``n * M <= 2**16``; a Haar-seeded
    greedy merge beyond that.
    """
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    n = x.shape[0]
    if M < 1 or M > n:
        raise TooManySegments(f"APCA with {M} segments on length {n}")
    ends = _apca_exact(x, M) if n * M <= APCA_EXACT_LIMIT else _apca_greedy(x, M)
    starts = [0] + [e + 1 for e in ends[:-1]]
    return ApcaRepresentation(tuple((float(x[s:e + 1].mean()), e) for s, e in zip(starts, ends)))


def reconstruct(r: Union[ReducedVector, ApcaRepresentation]) -> np.ndarray:
    """Length-``source_len`` approximation from a reduced representation."""
    if isinstance(r, ApcaRepresentation):
        out = np.empty(r.source_len)
        start = 0
        for mean, end in r.segments:
            out[start:end + 1] = mean
            start = end + 1
        return out
    if not isinstance(r, ReducedVector):
        raise TransformMismatch(f"cannot reconstruct {type(r).__name__}")
    n, c = r.source_len, r.coords
    if r.transform_id == "paa":
        return np.repeat(c, n // c.shape[0])
    if r.transform_id == "dft":
        spec = np.zeros(n // 2 + 1, dtype=np.complex128)
        k = c.shape[0] // 2
        spec[:k] = c[0::2] + 1j * c[1::2]
        return np.fft.irfft(spec, n=n, norm="ortho")
    if r.transform_id == "dct":
        full = np.zeros(n)
        full[:c.shape[0]] = c
        return scipy.fft.idct(full, type=2, norm="ortho")
    if r.transform_id == "haar":
        full = np.zeros(n)
        full[:c.shape[0]] = c
        return haar_inverse(full)
    return c.copy()
