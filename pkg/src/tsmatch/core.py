"""Sequences, windows, datasets, and normalization.

Offsets are 0-based and slices are half-open ``[i, j)`` everywhere in the
package.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence as SeqLike

import numpy as np

from .errors import EmptyDataset, OutOfBounds, ParseError, DataError

__all__ = [
    "Sequence",
    "Window",
    "Dataset",
    "load_dataset",
    "parse_dataset",
    "slice_values",
    "normalize",
    "as_values",
]


def as_values(values) -> np.ndarray:
    """Return ``values`` as a read-only 1-D float64 array."""
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Sequence:
    """A named univariate series of finite float64 samples."""

    id: int
    values: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        arr = as_values(self.values)
        if arr.size == 0:
            raise DataError(f"sequence {self.id} is empty")
        if not np.all(np.isfinite(arr)):
            raise DataError(f"sequence {self.id} contains non-finite values")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sequence):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    def slice(self, i: int, j: int) -> np.ndarray:
        return slice_values(self, i, j)


@dataclass(frozen=True)
class Window:
    """A length-``length`` view starting at ``start`` of sequence ``sequence_id``."""

    sequence_id: int
    start: int
    length: int

    def __post_init__(self):
        if self.length <= 0:
            raise DataError(f"window length must be positive, got {self.length}")
        if self.start < 0:
            raise DataError(f"window start must be non-negative, got {self.start}")

    @property
    def end(self) -> int:
        return self.start + self.length

    def values(self, seq: Sequence) -> np.ndarray:
        if seq.id != self.sequence_id:
            raise DataError(f"window refers to sequence {self.sequence_id}, got {seq.id}")
        return slice_values(seq, self.start, self.end)


@dataclass(frozen=True)
class Dataset:
    sequences: tuple
    source: str = "inline"

    def __post_init__(self):
        seqs = tuple(self.sequences)
        for expected, s in enumerate(seqs):
            if s.id != expected:
                raise DataError(f"sequence ids must be dense from 0; position {expected} has id {s.id}")
        object.__setattr__(self, "sequences", seqs)

    @classmethod
    def from_arrays(cls, arrays: Iterable, labels: Optional[SeqLike] = None, source: str = "inline") -> "Dataset":
        arrays = list(arrays)
        labels = list(labels) if labels is not None else [None] * len(arrays)
        seqs = tuple(Sequence(i, a, lab) for i, (a, lab) in enumerate(zip(arrays, labels)))
        if not seqs:
            raise EmptyDataset("dataset has no sequences")
        return cls(seqs, source)

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    def __getitem__(self, i: int) -> Sequence:
        return self.sequences[i]

    @property
    def lengths(self) -> list[int]:
        return [len(s) for s in self.sequences]

    def fingerprint(self) -> str:
        """Hex SHA-256 over all sequence lengths and sample bytes."""
        h = hashlib.sha256()
        for s in self.sequences:
            h.update(len(s).to_bytes(8, "little"))
            h.update(np.ascontiguousarray(s.values, dtype="<f8").tobytes())
        return h.hexdigest()


_SPLITTERS = {
    "ucr_whitespace": re.compile(r"[ \t]+"),
    "csv": re.compile(r"\s*,\s*"),
}


def parse_dataset(text: str, format: str = "ucr_whitespace", labeled: bool = False, source: str = "inline") -> Dataset:
    """Parse dataset text; see :func:`load_dataset` for the format rules."""
    try:
        splitter = _SPLITTERS[format]
    except KeyError:
        raise DataError(f"unknown dataset format {format!r}") from None

    arrays, labels = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = [t for t in splitter.split(line) if t != ""]
        label = None
        first_col = 1
        if labeled:
            label, tokens = tokens[0], tokens[1:]
            first_col = 2
        if not tokens:
            raise ParseError(lineno, first_col, "")
        vals = []
        for col, tok in enumerate(tokens, start=first_col):
            try:
                v = float(tok)
            except ValueError:
                raise ParseError(lineno, col, tok) from None
            if not math.isfinite(v):
                raise ParseError(lineno, col, tok)
            vals.append(v)
        arrays.append(vals)
        labels.append(label)
    if not arrays:
        raise EmptyDataset(f"no sequences found in {source}")
    return Dataset.from_arrays(arrays, labels, source=source)


def load_dataset(path, format: str = "ucr_whitespace", labeled: bool = False) -> Dataset:
    """Load one sequence per non-empty line.

    ``ucr_whitespace`` splits on runs of spaces/tabs, ``csv`` on commas. Lines
    starting with ``#`` are comments. With ``labeled`` the first token of each
    line is kept as the sequence label. Ids follow line order.

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    ParseError
        On a malformed numeric token (1-based line and column).
    EmptyDataset
        If no sequence is found.
    """
    p = Path(path)
    text = p.read_text()
    return parse_dataset(text, format=format, labeled=labeled, source=str(p))


def slice_values(seq, i: int, j: int) -> np.ndarray:
    """Return ``S[i:j]`` (half-open); requires ``0 <= i < j <= len(S)``."""
    values = seq.values if isinstance(seq, Sequence) else np.asarray(seq, dtype=np.float64)
    n = values.shape[0]
    if not (0 <= i < j <= n):
        raise OutOfBounds(f"slice [{i}, {j}) outside sequence of length {n}")
    return values[i:j]


def normalize(values, method: str = "zscore") -> np.ndarray:
    """Z-score (population std) or min-max scale ``values``.

    Constant input maps to all zeros under both methods.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise DataError("cannot normalize an empty series")
    if method == "zscore":
        mu = x.mean()
        sd = x.std()
        if sd == 0.0:
            return np.zeros_like(x)
        return (x - mu) / sd
    if method == "minmax":
        lo, hi = x.min(), x.max()
        if hi == lo:
            return np.zeros_like(x)
        return (x - lo) / (hi - lo)
    raise DataError(f"unknown normalization method {method!r}")


def normalize_dataset(ds: Dataset, method: Optional[str]) -> Dataset:
    if method in (None, "none"):
        return ds
    return Dataset(tuple(Sequence(s.id, normalize(s.values, method), s.label) for s in ds), ds.source)
