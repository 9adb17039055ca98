"""Reduced-space subsequence index.

Windows are transformed, packed ``pack_count`` at a time (offset-consecutive,
per sequence) into minimum bounding rectangles, and the rectangles are bulk
loaded into a sort-tile-recursive (STR) tree.

All geometry lives in the *weighted* reduced space (see
:func:`tsmatch.transforms.coordinate_weights`), where plain Euclidean
distance lower-bounds the distance between the original windows.

On-disk layout (all little-endian)::

    magic        4 bytes   b"TSMX"
    version      u16       FORMAT_VERSION
    reserved     u16       0
    meta_len     u32       byte length of the JSON meta block
    meta         meta_len  UTF-8 JSON: transform, param, window, kind, J,
                           pack_count, fanout, fingerprint, dim, n_mbrs,
                           n_entries, skipped
    mbr table    n_mbrs    records: low f64[dim], high f64[dim],
                           first_entry u64, count u32
    entry table  n_entries records: sequence_id u32, start u32
    vectors      n_entries records: f64[dim] (weighted coordinates)

The tree is not stored; it is rebuilt deterministically on load.
"""

from __future__ import annotations

import heapq
import json
import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import Dataset
from .errors import (
    DataError,
    DimensionMismatch,
    EmptyInput,
    IndexFormatError,
    InvalidSlidingFactor,
    NoIndexableSequence,
    TransformMismatch,
)
from .transforms import ReducedVector, TransformSpec
from .windowing import window_starts

__all__ = [
    "Mbr",
    "IndexConfig",
    "SubsequenceIndex",
    "build_mbrs",
    "mindist",
    "build_index",
    "range_search",
    "knn_mbr_scan",
    "save_index",
    "load_index",
]

log = logging.getLogger(__name__)

MAGIC = b"TSMX"
FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class Mbr:
    low: np.ndarray
    high: np.ndarray
    entries: np.ndarray  # (count, 2) rows of (sequence_id, start)

    def __post_init__(self):
        low = np.asarray(self.low, dtype=np.float64)
        high = np.asarray(self.high, dtype=np.float64)
        entries = np.asarray(self.entries, dtype=np.int64).reshape(-1, 2)
        if low.shape != high.shape or np.any(low > high):
            raise DataError("MBR low corner must be <= high corner")
        if entries.shape[0] == 0:
            raise EmptyInput("MBR without entries")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)
        object.__setattr__(self, "entries", entries)

    def contains(self, v) -> bool:
        v = np.asarray(v, dtype=np.float64)
        return bool(np.all(self.low <= v) and np.all(v <= self.high))


def _as_point(point) -> np.ndarray:
    if isinstance(point, ReducedVector):
        return point.weighted()
    return np.asarray(point, dtype=np.float64).reshape(-1)


def _mindist_many(p: np.ndarray, low: np.ndarray, high: np.ndarray) -> np.ndarray:
    gap = np.maximum(low - p, 0.0) + np.maximum(p - high, 0.0)
    return np.sqrt(np.einsum("ij,ij->i", gap, gap))


def mindist(point, m: Mbr) -> float:
    """Euclidean distance from ``point`` to the nearest point of ``m`` (0 inside)."""
    p = _as_point(point)
    if p.shape != m.low.shape:
        raise DimensionMismatch(f"point has {p.shape[0]} dims, MBR has {m.low.shape[0]}")
    return float(_mindist_many(p, m.low[None, :], m.high[None, :])[0])


def _pack_ranges(count: int, pack_count: int) -> list[tuple[int, int]]:
    return [(a, min(a + pack_count, count)) for a in range(0, count, pack_count)]


def build_mbrs(vectors, pack_count: int) -> list[Mbr]:
    """Pack an offset-ordered list of ``(entry, ReducedVector)`` into MBRs.

    Consecutive runs of ``pack_count`` vectors share one rectangle; the last
    run may be shorter.
    """
    vectors = list(vectors)
    if not vectors:
        raise EmptyInput("no vectors to pack")
    if pack_count < 1:
        raise DataError(f"pack_count must be positive, got {pack_count}")
    first = vectors[0][1]
    for _, v in vectors:
        if v.transform_id != first.transform_id or v.dim != first.dim:
            raise TransformMismatch("vectors must share transform and dimension")
    V = np.stack([v.weighted() for _, v in vectors])
    E = np.array([tuple(e) for e, _ in vectors], dtype=np.int64).reshape(-1, 2)
    return [Mbr(V[a:b].min(axis=0), V[a:b].max(axis=0), E[a:b]) for a, b in _pack_ranges(len(vectors), pack_count)]


# -- STR tree --------------------------------------------------------------

@dataclass(eq=False)
class _Node:
    low: np.ndarray      # (c, d) child lows
    high: np.ndarray     # (c, d) child highs
    children: np.ndarray  # child node ids, or MBR ids at leaves
    leaf: bool


def _str_groups(idx: np.ndarray, centers: np.ndarray, fanout: int, axis: int) -> list[np.ndarray]:
    n = idx.shape[0]
    if n <= fanout:
        return [idx]
    ndim = centers.shape[1]
    order = idx[np.argsort(centers[idx, axis], kind="stable")]
    if axis >= ndim - 1:
        return [order[a:a + fanout] for a in range(0, n, fanout)]
    pages = math.ceil(n / fanout)
    slabs = math.ceil(pages ** (1.0 / (ndim - axis)))
    slab_size = fanout * math.ceil(pages / slabs)
    groups = []
    for a in range(0, n, slab_size):
        groups.extend(_str_groups(order[a:a + slab_size], centers, fanout, axis + 1))
    return groups


def _build_tree(low: np.ndarray, high: np.ndarray, fanout: int) -> tuple[list[_Node], int]:
    nodes: list[_Node] = []
    level_low, level_high = low, high
    level_ids = np.arange(low.shape[0])
    leaf = True
    while True:
        centers = (level_low + level_high) / 2.0
        groups = _str_groups(np.arange(level_low.shape[0]), centers, fanout, 0)
        new_ids, new_low, new_high = [], [], []
        for g in groups:
            nodes.append(_Node(level_low[g], level_high[g], level_ids[g], leaf))
            new_ids.append(len(nodes) - 1)
            new_low.append(level_low[g].min(axis=0))
            new_high.append(level_high[g].max(axis=0))
        leaf = False
        if len(groups) == 1:
            return nodes, new_ids[0]
        level_ids = np.array(new_ids)
        level_low, level_high = np.stack(new_low), np.stack(new_high)


@dataclass(frozen=True)
class IndexConfig:
    """Windowing, transform and packing settings for :func:`build_index`."""

    window: int
    kind: str = "sliding"
    J: int = 1
    transform: TransformSpec = TransformSpec("paa", 4)
    pack_count: int = 16
    fanout: int = 16

    @property
    def step(self) -> int:
        """Distance between consecutive window starts."""
        return {"sliding": 1, "disjoint": self.window}.get(self.kind, self.J)

    def validate(self) -> None:
        if self.window < 1:
            raise DataError(f"window must be positive, got {self.window}")
        if self.kind not in ("sliding", "disjoint", "j_sliding"):
            raise DataError(f"unknown window kind {self.kind!r}")
        if self.kind == "j_sliding" and not 1 <= self.J <= self.window:
            raise InvalidSlidingFactor(f"J must lie in [1, {self.window}], got {self.J}")
        if self.pack_count < 1 or self.fanout < 2:
            raise DataError("pack_count must be >= 1 and fanout >= 2")
        self.transform.validate(self.window)


@dataclass(eq=False)
class SubsequenceIndex:
    """Immutable after construction; safe for concurrent searches."""

    config: IndexConfig
    fingerprint: str
    mbr_low: np.ndarray     # (M, d)
    mbr_high: np.ndarray    # (M, d)
    mbr_first: np.ndarray   # (M,) first entry row
    mbr_count: np.ndarray   # (M,)
    entries: np.ndarray     # (E, 2) sequence_id, start
    vectors: np.ndarray     # (E, d) weighted coordinates
    skipped: tuple = ()
    use_tree: bool = True
    _nodes: list = field(default_factory=list, repr=False)
    _root: int = -1

    def __post_init__(self):
        if self.use_tree and not self._nodes and self.mbr_low.shape[0]:
            self._nodes, self._root = _build_tree(self.mbr_low, self.mbr_high, self.config.fanout)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def n_mbrs(self) -> int:
        return int(self.mbr_low.shape[0])

    @property
    def n_entries(self) -> int:
        return int(self.entries.shape[0])

    @property
    def meta(self) -> dict:
        c = self.config
        return {
            "transform": c.transform.kind,
            "param": c.transform.param,
            "window": c.window,
            "kind": c.kind,
            "J": c.J,
            "pack_count": c.pack_count,
            "fanout": c.fanout,
            "fingerprint": self.fingerprint,
            "dim": self.dim,
            "n_mbrs": self.n_mbrs,
            "n_entries": self.n_entries,
            "skipped": list(self.skipped),
        }

    @property
    def mbrs(self) -> list[Mbr]:
        return [self.mbr(i) for i in range(self.n_mbrs)]

    def mbr(self, i: int) -> Mbr:
        return Mbr(self.mbr_low[i], self.mbr_high[i], self.entries[self.entry_rows(i)])

    def entry_rows(self, mbr_id: int) -> slice:
        a = int(self.mbr_first[mbr_id])
        return slice(a, a + int(self.mbr_count[mbr_id]))

    def without_tree(self) -> "SubsequenceIndex":
        """Same data, searched by linear MBR scan."""
        return SubsequenceIndex(
            self.config, self.fingerprint, self.mbr_low, self.mbr_high, self.mbr_first,
            self.mbr_count, self.entries, self.vectors, self.skipped, use_tree=False,
        )

    def query_point(self, q) -> np.ndarray:
        p = _as_point(q)
        if p.shape[0] != self.dim:
            raise DimensionMismatch(f"query has {p.shape[0]} dims, index has {self.dim}")
        if isinstance(q, ReducedVector) and q.transform_id != self.config.transform.kind:
            raise TransformMismatch(f"query transform {q.transform_id} != index {self.config.transform.kind}")
        return p

    # -- search -------------------------------------------------------------

    def range_mbr_ids(self, p: np.ndarray, radius: float) -> np.ndarray:
        """Ids of MBRs with ``mindist(p, mbr) <= radius``, ascending."""
        if not self.use_tree:
            return np.flatnonzero(_mindist_many(p, self.mbr_low, self.mbr_high) <= radius)
        hits = []
        stack = [self._root]
        while stack:
            node = self._nodes[stack.pop()]
            keep = node.children[_mindist_many(p, node.low, node.high) <= radius]
            if node.leaf:
                hits.append(keep)
            else:
                stack.extend(keep.tolist())
        if not hits:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate(hits))

    def scan_mbrs(self, p: np.ndarray) -> Iterator[tuple[float, int]]:
        """Yield ``(mindist, mbr_id)`` in nondecreasing mindist order (ties by id)."""
        if not self.use_tree:
            d = _mindist_many(p, self.mbr_low, self.mbr_high)
            for i in np.lexsort((np.arange(d.shape[0]), d)):
                yield float(d[i]), int(i)
            return
        # heap items: (dist, is_mbr, id); nodes sort before MBRs at equal distance
        heap = [(0.0, 0, self._root)]
        while heap:
            dist, is_mbr, ident = heapq.heappop(heap)
            if is_mbr:
                yield dist, ident
                continue
            node = self._nodes[ident]
            dists = _mindist_many(p, node.low, node.high)
            flag = 1 if node.leaf else 0
            for dd, child in zip(dists.tolist(), node.children.tolist()):
                heapq.heappush(heap, (dd, flag, child))


def build_index(ds: Dataset, config: IndexConfig, use_tree: bool = True) -> SubsequenceIndex:
    """Window, transform and pack every sequence of ``ds``.

    Sequences shorter than the window are skipped and listed in ``skipped``.
    """
    config.validate()
    w = config.window
    lows, highs, firsts, counts, entries, vectors, skipped = [], [], [], [], [], [], []
    row = 0
    for seq in ds:
        if len(seq) < w:
            skipped.append(seq.id)
            continue
        starts = window_starts(len(seq), w, config.kind, config.J)
        V = config.transform.weighted_batch(sliding_window_view(seq.values, w)[starts])
        for a, b in _pack_ranges(starts.shape[0], config.pack_count):
            lows.append(V[a:b].min(axis=0))
            highs.append(V[a:b].max(axis=0))
            firsts.append(row + a)
            counts.append(b - a)
        entries.append(np.column_stack([np.full(starts.shape[0], seq.id), starts]))
        vectors.append(V)
        row += starts.shape[0]
    if skipped:
        log.warning("skipped %d sequence(s) shorter than window %d: %s", len(skipped), w, skipped)
    if not vectors:
        raise NoIndexableSequence(f"no sequence has length >= {w}")
    return SubsequenceIndex(
        config,
        ds.fingerprint(),
        np.stack(lows),
        np.stack(highs),
        np.asarray(firsts, dtype=np.int64),
        np.asarray(counts, dtype=np.int64),
        np.concatenate(entries).astype(np.int64),
        np.concatenate(vectors),
        tuple(skipped),
        use_tree=use_tree,
    )


def range_search(idx: SubsequenceIndex, q, radius: float) -> list[tuple[int, int]]:
    """Entries of every MBR within ``radius`` of ``q`` (MBR-level filter only)."""
    if radius < 0:
        raise DataError(f"radius must be >= 0, got {radius}")
    p = idx.query_point(q)
    out = []
    for i in idx.range_mbr_ids(p, radius):
        out.extend(map(tuple, idx.entries[idx.entry_rows(int(i))].tolist()))
    return out


def knn_mbr_scan(idx: SubsequenceIndex, q, k: Optional[int] = None) -> Iterator[tuple[float, tuple[int, int]]]:
    """Lazily yield ``(mindist, entry)`` best-first; at most ``k`` entries when given."""
    if k is not None and k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    p = idx.query_point(q)
    produced = 0
    for dist, i in idx.scan_mbrs(p):
        for e in idx.entries[idx.entry_rows(i)].tolist():
            if k is not None and produced >= k:
                return
            yield dist, tuple(e)
            produced += 1


# -- persistence -------------------------------------------------------------

_HEADER = struct.Struct("<4sHHI")


def _tables(dim: int):
    mbr_dt = np.dtype([("low", "<f8", (dim,)), ("high", "<f8", (dim,)), ("first", "<u8"), ("count", "<u4")])
    entry_dt = np.dtype([("sequence_id", "<u4"), ("start", "<u4")])
    return mbr_dt, entry_dt


def save_index(idx: SubsequenceIndex, path) -> None:
    meta = json.dumps(idx.meta, sort_keys=True).encode("utf-8")
    mbr_dt, entry_dt = _tables(idx.dim)
    mbrs = np.zeros(idx.n_mbrs, dtype=mbr_dt)
    mbrs["low"], mbrs["high"] = idx.mbr_low, idx.mbr_high
    mbrs["first"], mbrs["count"] = idx.mbr_first, idx.mbr_count
    ents = np.zeros(idx.n_entries, dtype=entry_dt)
    ents["sequence_id"], ents["start"] = idx.entries[:, 0], idx.entries[:, 1]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, 0, len(meta)))
        fh.write(meta)
        fh.write(mbrs.tobytes())
        fh.write(ents.tobytes())
        fh.write(np.ascontiguousarray(idx.vectors, dtype="<f8").tobytes())


def load_index(path, use_tree: bool = True) -> SubsequenceIndex:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise IndexFormatError(f"{path}: truncated header")
    magic, version, _, meta_len = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise IndexFormatError(f"{path}: not an index file")
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"{path}: unsupported format version {version}")
    pos = _HEADER.size
    try:
        meta = json.loads(data[pos:pos + meta_len].decode("utf-8"))
    except ValueError as exc:
        raise IndexFormatError(f"{path}: corrupt meta block") from exc
    pos += meta_len
    dim, n_mbrs, n_entries = meta["dim"], meta["n_mbrs"], meta["n_entries"]
    mbr_dt, entry_dt = _tables(dim)
    expected = pos + n_mbrs * mbr_dt.itemsize + n_entries * (entry_dt.itemsize + 8 * dim)
    if len(data) != expected:
        raise IndexFormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    mbrs = np.frombuffer(data, dtype=mbr_dt, count=n_mbrs, offset=pos)
    pos += n_mbrs * mbr_dt.itemsize
    ents = np.frombuffer(data, dtype=entry_dt, count=n_entries, offset=pos)
    pos += n_entries * entry_dt.itemsize
    vectors = np.frombuffer(data, dtype="<f8", count=n_entries * dim, offset=pos).reshape(n_entries, dim)
    config = IndexConfig(
        window=meta["window"],
        kind=meta["kind"],
        J=meta["J"],
        transform=TransformSpec(meta["transform"], meta["param"]),
        pack_count=meta["pack_count"],
        fanout=meta["fanout"],
    )
    return SubsequenceIndex(
        config,
        meta["fingerprint"],
        np.array(mbrs["low"], dtype=np.float64).reshape(n_mbrs, dim),
        np.array(mbrs["high"], dtype=np.float64).reshape(n_mbrs, dim),
        mbrs["first"].astype(np.int64),
        mbrs["count"].astype(np.int64),
        np.column_stack([ents["sequence_id"], ents["start"]]).astype(np.int64),
        vectors.astype(np.float64),
        tuple(meta.get("skipped", ())),
        use_tree=use_tree,
    )
