"""Exact filter-and-refine subsequence matching.

Three window schemes share one engine. A *query plan* is a list of window
groups; each group is a set of query-window offsets plus the factor ``f``
such that any placement of ``Q`` within distance ``d`` has, in at least one
group, a window pair within ``d / f``:

* FRM           sliding data windows, one group of the ``p = L // w``
                disjoint query windows, ``f = sqrt(p)``.
* DualMatch     disjoint data windows, every sliding query window is its own
                group, ``f = 1``; needs ``w <= (L + 1) // 2``.
* GeneralMatch  J-sliding data windows; for each shift ``i < J`` the
                disjoint windows of ``Q[i:]`` whose data counterparts stay
                on the J grid, ``f = sqrt(count)``.

A candidate data window at offset ``o`` hit by the query window at offset
``m`` proposes the placement ``o - m``. Placements are deduplicated and
refined with the true Euclidean distance.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence as SeqLike

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import Dataset, Sequence, as_values
from .distances import DistanceSpec
from .errors import (
    DataError,
    IndexConfigMismatch,
    InvalidSlidingFactor,
    NotEnoughPlacements,
    QueryShorterThanWindow,
    QueryTooLong,
    WindowTooLargeForQuery,
)
from .index import IndexConfig, SubsequenceIndex, build_index

__all__ = [
    "ALGORITHMS",
    "MatchResult",
    "MatchConfig",
    "placement_distances",
    "brute_force_range",
    "brute_force_knn",
    "frm_range",
    "dualmatch_range",
    "generalmatch_range",
    "range_query",
    "knn",
    "rescore",
    "bench_window_effect",
]

ALGORITHMS = ("frm", "dualmatch", "generalmatch")

# Filters run with a slightly inflated radius so rounding in the reduced space
# can never dismiss a true answer; the refine step uses the exact predicate.
_REL_SLACK = 1e-9
_ABS_SLACK = 1e-12


@dataclass(frozen=True, order=True)
class MatchResult:
    sequence_id: int
    start: int
    distance: float

    def as_row(self) -> str:
        return f"{self.sequence_id}\t{self.start}\t{self.distance!r}"


@dataclass(frozen=True)
class MatchConfig:
    algorithm: str = "frm"
    epsilon: float = 0.0
    J: int = 1
    refine: DistanceSpec = DistanceSpec("l2")

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise DataError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if not self.epsilon >= 0:
            raise DataError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.J < 1:
            raise InvalidSlidingFactor(f"J must be >= 1, got {self.J}")


def _query_values(Q) -> np.ndarray:
    return Q.values if isinstance(Q, Sequence) else as_values(Q)


def _sorted(results) -> list[MatchResult]:
    return sorted(results, key=lambda r: (r.sequence_id, r.start))


def placement_distances(values: np.ndarray, starts: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Euclidean distance between ``q`` and ``values[s:s+len(q)]`` for each start.

    The matchers and the brute-force oracle both go through this function, so
    equal placements get bit-identical distances.
    """
    W = sliding_window_view(values, q.shape[0])[np.asarray(starts, dtype=np.int64)]
    diff = W - q
    return np.sqrt((diff * diff).sum(axis=1))


def _check_query_fits(ds: Dataset, L: int) -> None:
    if L < 1:
        raise DataError("query is empty")
    if L > max(ds.lengths):
        raise QueryTooLong(f"query length {L} exceeds every sequence length (max {max(ds.lengths)})")


# -- oracles ------------------------------------------------------------------

def brute_force_range(ds: Dataset, Q, epsilon: float, dist: Optional[DistanceSpec] = None) -> list[MatchResult]:
    """Every placement within ``epsilon`` by exhaustive scan, sorted by ``(sequence_id, start)``."""
    q = _query_values(Q)
    L = q.shape[0]
    _check_query_fits(ds, L)
    dist = dist or DistanceSpec("l2")
    out = []
    for seq in ds:
        n = len(seq) - L + 1
        if n < 1:
            continue
        starts = np.arange(n)
        if dist.is_euclidean:
            d = placement_distances(seq.values, starts, q)
        else:
            W = sliding_window_view(seq.values, L)
            d = np.array([dist(W[s], q) for s in starts])
        for s in np.flatnonzero(d <= epsilon):
            out.append(MatchResult(seq.id, int(s), float(d[s])))
    return out


def _all_placements(ds: Dataset, q: np.ndarray) -> list[MatchResult]:
    L = q.shape[0]
    out = []
    for seq in ds:
        n = len(seq) - L + 1
        if n >= 1:
            d = placement_distances(seq.values, np.arange(n), q)
            out.extend(MatchResult(seq.id, s, float(v)) for s, v in enumerate(d.tolist()))
    return out


def _knn_key(r: MatchResult):
    return (r.distance, r.sequence_id, r.start)


def brute_force_knn(ds: Dataset, Q, k: int) -> list[MatchResult]:
    """The ``k`` nearest placements by exhaustive scan; ties by ``(sequence_id, start)``."""
    q = _query_values(Q)
    _check_query_fits(ds, q.shape[0])
    allp = _all_placements(ds, q)
    if k < 1 or k > len(allp):
        raise NotEnoughPlacements(f"asked for {k} neighbours, {len(allp)} placements exist")
    return sorted(allp, key=_knn_key)[:k]


# -- query plans ----------------------------------------------------------------

@dataclass(frozen=True)
class _Group:
    offsets: np.ndarray   # query-window offsets into Q
    factor: float         # distance-to-window-threshold divisor


def _plan(algorithm: str, cfg: IndexConfig, L: int, J: Optional[int] = None) -> list[_Group]:
    w = cfg.window
    if algorithm == "frm":
        if cfg.step != 1:
            raise IndexConfigMismatch(f"FRM needs a sliding-window index, got {cfg.kind} (step {cfg.step})")
        if L < w:
            raise QueryShorterThanWindow(f"query length {L} < window {w}")
        p = L // w
        return [_Group(w * np.arange(p), math.sqrt(p))]
    if algorithm == "dualmatch":
        if cfg.step != w:
            raise IndexConfigMismatch(f"DualMatch needs a disjoint-window index, got {cfg.kind} (step {cfg.step})")
        if w > (L + 1) // 2:
            raise WindowTooLargeForQuery(f"DualMatch needs window <= (L+1)//2 = {(L + 1) // 2}, got {w}")
        return [_Group(np.array([m]), 1.0) for m in range(L - w + 1)]
    if algorithm == "generalmatch":
        step = cfg.step
        if J is not None and J != step:
            raise IndexConfigMismatch(f"GeneralMatch with J={J} against an index built with step {step}")
        if L - (step - 1) < w:
            raise QueryShorterThanWindow(f"query length {L} too short for window {w} at every shift < {step}")
        # window k of a shift group stays on the J grid iff k*w is a multiple of J
        stride = step // math.gcd(step, w)
        groups = []
        for i in range(step):
            ks = np.arange(0, (L - i) // w, stride)
            groups.append(_Group(i + w * ks, math.sqrt(ks.shape[0])))
        return groups
    raise DataError(f"unknown algorithm {algorithm!r}")


def _check_index(idx: SubsequenceIndex, ds: Dataset) -> None:
    if idx.fingerprint != ds.fingerprint():
        raise IndexConfigMismatch("index was built from a different dataset")


# -- range search --------------------------------------------------------------

def _candidates(idx: SubsequenceIndex, ds: Dataset, q: np.ndarray, epsilon: float, plan: list[_Group]) -> dict:
    """Map ``sequence_id -> sorted unique placement starts`` surviving the filter."""
    L = q.shape[0]
    w = idx.config.window
    transform = idx.config.transform
    max_start = np.array([len(s) - L for s in ds], dtype=np.int64)
    found_seq, found_start = [], []
    for group in plan:
        radius = epsilon / group.factor
        slack = radius * (1 + _REL_SLACK) + _ABS_SLACK
        windows = np.stack([q[m:m + w] for m in group.offsets])
        points = transform.weighted_batch(windows)
        for m, p in zip(group.offsets.tolist(), points):
            mbr_ids = idx.range_mbr_ids(p, slack)
            if mbr_ids.shape[0] == 0:
                continue
            rows = np.concatenate([np.arange(idx.mbr_first[i], idx.mbr_first[i] + idx.mbr_count[i]) for i in mbr_ids])
            diff = idx.vectors[rows] - p
            rows = rows[np.sqrt((diff * diff).sum(axis=1)) <= slack]
            seq = idx.entries[rows, 0]
            start = idx.entries[rows, 1] - m
            ok = (start >= 0) & (start <= max_start[seq])
            found_seq.append(seq[ok])
            found_start.append(start[ok])
    out: dict = {}
    if not found_seq:
        return out
    seq = np.concatenate(found_seq)
    start = np.concatenate(found_start)
    for s in np.unique(seq).tolist():
        out[s] = np.unique(start[seq == s])
    return out


def _refine(ds: Dataset, q: np.ndarray, cands: dict, epsilon: float, threads: int = 1) -> list[MatchResult]:
    def one(item):
        sid, starts = item
        d = placement_distances(ds[sid].values, starts, q)
        keep = d <= epsilon
        return [MatchResult(sid, int(s), float(v)) for s, v in zip(starts[keep], d[keep])]

    items = sorted(cands.items())
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, items))
    else:
        parts = [one(it) for it in items]
    return _sorted(r for part in parts for r in part)


def range_query(
    idx: SubsequenceIndex,
    ds: Dataset,
    Q,
    epsilon: float,
    algorithm: str = "frm",
    J: Optional[int] = None,
    stats: Optional[dict] = None,
    threads: int = 1,
) -> list[MatchResult]:
    """Exact epsilon-range subsequence search under Euclidean distance.

    ``stats``, when given, receives ``candidates`` (placements refined) and
    ``placements`` (all placements of ``Q`` in ``ds``).
    """
    if not epsilon >= 0:
        raise DataError(f"epsilon must be >= 0, got {epsilon}")
    _check_index(idx, ds)
    q = _query_values(Q)
    L = q.shape[0]
    _check_query_fits(ds, L)
    plan = _plan(algorithm, idx.config, L, J)
    cands = _candidates(idx, ds, q, epsilon, plan)
    if stats is not None:
        stats["candidates"] = int(sum(v.shape[0] for v in cands.values()))
        stats["placements"] = int(sum(max(n - L + 1, 0) for n in ds.lengths))
    return _refine(ds, q, cands, epsilon, threads)


def frm_range(idx: SubsequenceIndex, ds: Dataset, Q, epsilon: float, stats: Optional[dict] = None) -> list[MatchResult]:
    return range_query(idx, ds, Q, epsilon, "frm", stats=stats)


def dualmatch_range(idx: SubsequenceIndex, ds: Dataset, Q, epsilon: float, stats: Optional[dict] = None) -> list[MatchResult]:
    return range_query(idx, ds, Q, epsilon, "dualmatch", stats=stats)


def generalmatch_range(idx: SubsequenceIndex, ds: Dataset, Q, epsilon: float, stats: Optional[dict] = None) -> list[MatchResult]:
    return range_query(idx, ds, Q, epsilon, "generalmatch", stats=stats)


def default_algorithm(cfg: IndexConfig) -> str:
    if cfg.step == 1:
        return "frm"
    if cfg.step == cfg.window:
        return "dualmatch"
    return "generalmatch"


# -- kNN ----------------------------------------------------------------------

def knn(
    idx: SubsequenceIndex,
    ds: Dataset,
    Q,
    k: int,
    algorithm: Optional[str] = None,
    stats: Optional[dict] = None,
) -> list[MatchResult]:
    """Exact ``k`` nearest placements under Euclidean distance.

    Every (query window, MBR) pair is streamed best-first by MINDIST. A
    placement none of whose window pairs has been popped yet is at least
    ``f * delta`` away, where ``delta`` is the next MINDIST and ``f`` the
    smallest group factor of the plan; the scan stops once the current
    ``k``-th distance is strictly below that bound.
    """
    _check_index(idx, ds)
    q = _query_values(Q)
    L = q.shape[0]
    _check_query_fits(ds, L)
    total = sum(max(n - L + 1, 0) for n in ds.lengths)
    if k < 1 or k > total:
        raise NotEnoughPlacements(f"asked for {k} neighbours, {total} placements exist")
    plan = _plan(algorithm or default_algorithm(idx.config), idx.config, L)
    factor = min(g.factor for g in plan)
    w = idx.config.window
    max_start = [len(s) - L for s in ds]

    offsets = sorted({m for g in plan for m in g.offsets.tolist()})
    points = idx.config.transform.weighted_batch(np.stack([q[m:m + w] for m in offsets]))
    streams = [idx.scan_mbrs(p) for p in points]
    heap = []
    for t, it in enumerate(streams):
        nxt = next(it, None)
        if nxt is not None:
            heap.append((nxt[0], t, nxt[1]))
    heapq.heapify(heap)

    seen: set = set()
    best: list = []   # max-heap of the k best via negated keys
    refined = 0
    while heap:
        delta, t, mbr_id = heapq.heappop(heap)
        if len(best) == k:
            kth = -best[0][0]
            if kth < factor * delta * (1 - _REL_SLACK) - _ABS_SLACK:
                break
        m = offsets[t]
        rows = idx.entry_rows(mbr_id)
        by_seq: dict = {}
        for sid, o in idx.entries[rows].tolist():
            st = o - m
            if 0 <= st <= max_start[sid] and (sid, st) not in seen:
                seen.add((sid, st))
                by_seq.setdefault(sid, []).append(st)
        for sid, starts in by_seq.items():
            d = placement_distances(ds[sid].values, np.array(starts), q)
            refined += len(starts)
            for st, dv in zip(starts, d.tolist()):
                key = (-dv, -sid, -st)
                if len(best) < k:
                    heapq.heappush(best, key)
                elif key > best[0]:
                    heapq.heapreplace(best, key)
        nxt = next(streams[t], None)
        if nxt is not None:
            heapq.heappush(heap, (nxt[0], t, nxt[1]))
    if stats is not None:
        stats["candidates"] = refined
        stats["placements"] = total
    out = [MatchResult(-s, -st, -d) for d, s, st in best]
    return sorted(out, key=_knn_key)


def rescore(results: SeqLike[MatchResult], ds: Dataset, Q, dist: DistanceSpec) -> list[MatchResult]:
    """Recompute distances of Euclidean-exact results under another measure.

    This is a re-ranking of the Euclidean answer set, not an exact search under
    ``dist``. Output is sorted by ``(distance, sequence_id, start)``.
    """
    q = _query_values(Q)
    L = q.shape[0]
    out = [
        MatchResult(r.sequence_id, r.start, float(dist(ds[r.sequence_id].values[r.start:r.start + L], q)))
        for r in results
    ]
    return sorted(out, key=_knn_key)


# -- window size effect ----------------------------------------------------------

@dataclass
class WindowBenchRow:
    window: int
    algorithm: str
    candidates: int
    results: int
    pruning_ratio: float

    FIELDS = ("window", "algorithm", "candidates", "results", "pruning_ratio")

    def as_csv(self) -> str:
        return f"{self.window},{self.algorithm},{self.candidates},{self.results},{self.pruning_ratio:.6f}"


def bench_window_effect(
    ds: Dataset,
    queries: Dataset,
    epsilon: float,
    windows: SeqLike[int],
    algorithms: SeqLike[str] = ALGORITHMS,
    transform=None,
    pack_count: int = 16,
    J: Optional[int] = None,
) -> list[WindowBenchRow]:
    """Candidate and result totals over ``queries`` for each window size and algorithm.

    ``transform`` maps a window length to a :class:`TransformSpec` (default:
    PAA with ``min(4, w)`` frames, halved until they divide ``w``). GeneralMatch
    uses ``J`` or ``max(1, w // 4)``. Combinations that violate an algorithm's
    preconditions for some query are skipped.
    """
    from .transforms import TransformSpec

    def default_transform(w):
        N = min(4, w)
        while w % N:
            N -= 1
        return TransformSpec("paa", N)

    transform = transform or default_transform
    rows = []
    for w in windows:
        for alg in algorithms:
            if alg == "frm":
                kind, step = "sliding", 1
            elif alg == "dualmatch":
                kind, step = "disjoint", w
            else:
                step = J or max(1, w // 4)
                kind = "j_sliding"
            cfg = IndexConfig(window=w, kind=kind, J=step, transform=transform(w), pack_count=pack_count)
            try:
                idx = build_index(ds, cfg)
                cand = res = total = 0
                for Q in queries:
                    st: dict = {}
                    res += len(range_query(idx, ds, Q, epsilon, alg, stats=st))
                    cand += st["candidates"]
                    total += st["placements"]
            except (QueryShorterThanWindow, WindowTooLargeForQuery, DataError):
                continue
            ratio = 1.0 - cand / total if total else 0.0
            rows.append(WindowBenchRow(w, alg, cand, res, ratio))
    return rows
