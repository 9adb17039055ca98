"""Sliding, disjoint, J-sliding and J-disjoint windows.

``J`` (the sliding factor) is accepted on the closed range ``1 <= J <= w`` so
that ``J = 1`` reproduces sliding windows and ``J = w`` disjoint windows.
"""

from __future__ import annotations

import numpy as np

from .core import Sequence, Window
from .errors import InvalidSlidingFactor, WindowTooLong, DataError

__all__ = [
    "WINDOW_KINDS",
    "window_starts",
    "sliding_windows",
    "disjoint_windows",
    "j_sliding_windows",
    "j_disjoint_windows",
    "j_disjoint_starts",
]

WINDOW_KINDS = ("sliding", "disjoint", "j_sliding")


def _check(n: int, w: int, J: int = 1) -> None:
    if w < 1:
        raise DataError(f"window length must be positive, got {w}")
    if J < 1 or J > w:
        raise InvalidSlidingFactor(f"sliding factor J={J} must satisfy 1 <= J <= {w}")
    if w > n:
        raise WindowTooLong(f"window length {w} exceeds sequence length {n}")


def window_starts(n: int, w: int, kind: str = "sliding", J: int = 1) -> np.ndarray:
    """Start offsets of the windows of a length-``n`` series."""
    if kind == "sliding":
        step = 1
    elif kind == "disjoint":
        step = w
    elif kind == "j_sliding":
        step = J
    else:
        raise DataError(f"unknown window kind {kind!r}")
    _check(n, w, step)
    return np.arange(0, n - w + 1, step, dtype=np.int64)


def _windows(S: Sequence, w: int, starts) -> list[Window]:
    return [Window(S.id, int(s), w) for s in starts]


def sliding_windows(S: Sequence, w: int) -> list[Window]:
    return _windows(S, w, window_starts(len(S), w, "sliding"))


def disjoint_windows(S: Sequence, w: int) -> list[Window]:
    """Windows at ``0, w, 2w, ...``; a trailing remainder shorter than ``w`` is dropped."""
    return _windows(S, w, window_starts(len(S), w, "disjoint"))


def j_sliding_windows(S: Sequence, w: int, J: int) -> list[Window]:
    return _windows(S, w, window_starts(len(S), w, "j_sliding", J))


def j_disjoint_starts(n: int, w: int, J: int) -> list[tuple[int, np.ndarray]]:
    """For each shift ``i < J``, starts of the disjoint windows of ``Q[i:]``.

    Shifts whose suffix is shorter than ``w`` yield an empty array.
    """
    _check(n, w, J)
    out = []
    for i in range(J):
        count = (n - i) // w
        out.append((i, i + w * np.arange(count, dtype=np.int64)))
    return out


def j_disjoint_windows(Q: Sequence, w: int, J: int) -> list[tuple[int, list[Window]]]:
    return [(i, _windows(Q, w, starts)) for i, starts in j_disjoint_starts(len(Q), w, J)]
