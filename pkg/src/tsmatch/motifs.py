"""Motif discovery: disjoint windows are clustered into shape symbols and
repeated symbol substrings are mined.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import Dataset, normalize
from .errors import DataError, TooManyClusters, WindowTooLong

__all__ = [
    "SymbolString",
    "Motif",
    "KMeansResult",
    "disjoint_window_matrix",
    "kmeans",
    "assign",
    "symbolize",
    "find_motifs",
]

MAX_ITER = 100
TOL = 1e-6


@dataclass(frozen=True)
class SymbolString:
    sequence_id: int
    symbols: tuple

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class Motif:
    pattern: tuple
    occurrences: tuple  # (sequence_id, symbol offset)

    @property
    def count(self) -> int:
        return len(self.occurrences)


@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    objective_history: list = field(default_factory=list)
    iterations: int = 0

    def radii(self, X: np.ndarray) -> np.ndarray:
        """Largest member-to-centroid distance per cluster (0 for empty clusters)."""
        d = np.linalg.norm(X - self.centroids[self.labels], axis=1)
        out = np.zeros(self.centroids.shape[0])
        np.maximum.at(out, self.labels, d)
        return out


def disjoint_window_matrix(ds: Dataset, w: int, normalized: bool = True):
    """Stack all disjoint windows; returns ``(X, owners)`` with owners ``(sequence_id, window #)``."""
    if w < 1:
        raise DataError(f"window must be positive, got {w}")
    if w > min(ds.lengths):
        raise WindowTooLong(f"window {w} exceeds shortest sequence ({min(ds.lengths)})")
    rows, owners = [], []
    for seq in ds:
        W = sliding_window_view(seq.values, w)[::w]
        for j, win in enumerate(W):
            rows.append(normalize(win, "zscore") if normalized else np.array(win))
            owners.append((seq.id, j))
    return np.stack(rows), owners


def _sqdist(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def assign(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest centroid per row (lowest id wins ties)."""
    return np.argmin(_sqdist(X, centroids), axis=1)


def _farthest_point_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    chosen = [int(rng.integers(X.shape[0]))]
    d = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(d))
        chosen.append(nxt)
        d = np.minimum(d, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def kmeans(X: np.ndarray, k: int, seed: int = 42, max_iter: int = MAX_ITER, tol: float = TOL) -> KMeansResult:
    """Lloyd's k-means with seeded farthest-point initialization.

    An empty cluster is re-seeded with the point farthest from its current
    centroid; this never increases the objective.
    """
    X = np.asarray(X, dtype=np.float64)
    if k < 1 or k > X.shape[0]:
        raise TooManyClusters(f"cannot form {k} clusters from {X.shape[0]} windows")
    rng = np.random.default_rng(seed)
    C = _farthest_point_init(X, k, rng)
    labels = assign(X, C)
    history = [float(((X - C[labels]) ** 2).sum())]
    it = 0
    for it in range(1, max_iter + 1):
        newC = C.copy()
        for c in range(k):
            members = X[labels == c]
            if members.shape[0]:
                newC[c] = members.mean(axis=0)
        labels = assign(X, newC)
        for c in range(k):
            if not np.any(labels == c):
                far = int(np.argmax(((X - newC[labels]) ** 2).sum(axis=1)))
                newC[c] = X[far]
                labels = assign(X, newC)
        history.append(float(((X - newC[labels]) ** 2).sum()))
        shift = float(np.max(np.linalg.norm(newC - C, axis=1)))
        C = newC
        if shift <= tol:
            break
    return KMeansResult(C, labels, history, it)


def symbolize(
    ds: Dataset,
    w: int,
    k: int,
    seed: int = 42,
    normalized: bool = True,
    centroids: Optional[np.ndarray] = None,
) -> list[SymbolString]:
    """Replace each disjoint window of every sequence by its cluster id.

    With ``centroids`` the windows are assigned to those predefined shapes and
    no clustering runs (``k`` is then ignored).
    """
    X, owners = disjoint_window_matrix(ds, w, normalized)
    if centroids is not None:
        C = np.asarray(centroids, dtype=np.float64)
        if C.ndim != 2 or C.shape[1] != w:
            raise DataError(f"centroids must have shape (k, {w}), got {C.shape}")
        labels = assign(X, C)
    else:
        labels = kmeans(X, k, seed).labels
    per_seq = defaultdict(list)
    for (sid, _), lab in zip(owners, labels.tolist()):
        per_seq[sid].append(lab)
    return [SymbolString(s.id, tuple(per_seq[s.id])) for s in ds]


def find_motifs(strings, L: int, min_count: int, overlap: bool = True) -> list[Motif]:
    """Every length-``L`` symbol pattern occurring at least ``min_count`` times.

    Sorted by count (descending) then pattern. With ``overlap=False``,
    occurrences within one string are taken greedily left to right without
    overlapping.
    """
    if L < 1 or min_count < 1:
        raise DataError("motif length and min_count must be positive")
    occ = defaultdict(list)
    for s in strings:
        sym = tuple(s.symbols)
        last_end: dict = {}
        for i in range(len(sym) - L + 1):
            pat = sym[i:i + L]
            if not overlap and last_end.get(pat, -1) > i:
                continue
            occ[pat].append((s.sequence_id, i))
            last_end[pat] = i + L
    motifs = [Motif(p, tuple(o)) for p, o in occ.items() if len(o) >= min_count]
    return sorted(motifs, key=lambda m: (-m.count, m.pattern))
