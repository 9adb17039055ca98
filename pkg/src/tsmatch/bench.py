"""Lower-bound tightness benchmark and the self-check property suites."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Dataset
from .distances import DtwConstraint, dtw, erp, lp_norm
from .errors import DataError
from .index import IndexConfig, build_index
from .lower_bounds import BOUND_SLACK, envelope, lb_keogh, lb_kim, lb_paa, lb_yi, reduced_lb, tlb
from .matcher import brute_force_knn, brute_force_range, knn, range_query
from .motifs import SymbolString, find_motifs
from .transforms import TransformSpec, paa
from .windowing import window_starts

__all__ = [
    "random_walks",
    "TlbRow",
    "tlb_bench",
    "SUITES",
    "run_selfcheck_suites",
]


def random_walks(count: int, length: int, seed: int = 42) -> np.ndarray:
    """``count`` cumulative-sum Gaussian random walks of ``length`` samples."""
    rng = np.random.default_rng(seed)
    return np.cumsum(rng.standard_normal((count, length)), axis=1)


# -- TLB bench --------------------------------------------------------------

@dataclass
class TlbRow:
    name: str
    param: str
    mean_tlb: float
    min_tlb: float
    pairs: int

    FIELDS = ("name", "param", "mean_tlb", "min_tlb", "pairs")

    def as_csv(self) -> str:
        return f"{self.name},{self.param},{self.mean_tlb:.6f},{self.min_tlb:.6f},{self.pairs}"


def _sample_pairs(ds: Dataset, n: int, pairs: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    pool = [(s.id, st) for s in ds if len(s) >= n for st in range(len(s) - n + 1)]
    if len(pool) < 2:
        raise DataError(f"need at least two length-{n} windows for the TLB bench")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(pairs):
        a, b = rng.choice(len(pool), size=2, replace=False)
        (sa, oa), (sb, ob) = pool[a], pool[b]
        out.append((ds[sa].values[oa:oa + n], ds[sb].values[ob:ob + n]))
    return out


def default_tlb_items(n: int, frames: Optional[int] = None, coeffs: Optional[int] = None, band: Optional[int] = None) -> list[tuple[str, int]]:
    """``(name, param)`` pairs applicable to windows of length ``n``."""
    items = [("identity", n)]
    N = frames or max(1, n // 8)
    if n % N == 0:
        items.append(("paa", N))
    k = coeffs or max(1, n // 8)
    if k <= n // 2 + 1:
        items.append(("dft", k))
    if k <= n:
        items.append(("dct", k))
    if n & (n - 1) == 0 and k <= n:
        items.append(("haar", k))
    r = band if band is not None else max(1, n // 10)
    items += [("lb_kim", 0), ("lb_yi", 0), ("lb_keogh", r)]
    if n % N == 0:
        items.append(("lb_paa", r))
    return items


def tlb_bench(
    ds: Dataset,
    n: int,
    pairs: int = 200,
    seed: int = 42,
    items: Optional[list] = None,
    frames: Optional[int] = None,
    scale: float = 1.0,
) -> list[TlbRow]:
    """Mean and minimum TLB of each configured transform or DTW bound.

    Transforms are compared with Euclidean distance, ``lb_kim``/``lb_yi`` with
    unconstrained DTW, and ``lb_keogh``/``lb_paa`` (param = band radius) with
    Sakoe-Chiba DTW of the same radius. Any bound above its true distance
    raises :class:`BoundViolation`. ``scale`` multiplies every bound (fault
    injection for the self-check).
    """
    sample = _sample_pairs(ds, n, pairs, seed)
    items = items or default_tlb_items(n, frames=frames)
    N_paa = frames or max(1, n // 8)
    rows = []
    for name, param in items:
        vals = []
        for x, y in sample:
            if name in ("identity", "paa", "dft", "dct", "haar"):
                spec = TransformSpec(name, param)
                lb, true = reduced_lb(spec(x), spec(y)), lp_norm(x, y)
            elif name == "lb_kim":
                lb, true = lb_kim(x, y), dtw(x, y)
            elif name == "lb_yi":
                lb, true = lb_yi(x, y), dtw(x, y)
            elif name == "lb_keogh":
                lb, true = lb_keogh(envelope(x, param), y), dtw(x, y, DtwConstraint("sakoe_chiba", param))
            elif name == "lb_paa":
                lb = lb_paa(envelope(x, param), N_paa, paa(y, N_paa))
                true = dtw(x, y, DtwConstraint("sakoe_chiba", param))
            else:
                raise DataError(f"unknown TLB item {name!r}")
            vals.append(tlb(lb * scale, true))
        rows.append(TlbRow(name, str(param), float(np.mean(vals)), float(np.min(vals)), len(vals)))
    return rows


# -- self-check suites -------------------------------------------------------

def _suite_transform_bounds(rng, trials, scale):
    for _ in range(trials):
        n = int(rng.choice([8, 16, 32]))
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        true = lp_norm(x, y)
        for kind, k in (("paa", n // 4), ("dft", n // 2 + 1), ("dct", n), ("haar", n), ("identity", n)):
            spec = TransformSpec(kind, k)
            if reduced_lb(spec(x), spec(y)) * scale > true + BOUND_SLACK:
                return False, f"{kind} bound exceeds Euclidean distance"
    return True, ""


def _suite_bound_chain(rng, trials, scale):
    for _ in range(trials):
        n = int(rng.choice([16, 32]))
        x = np.cumsum(rng.standard_normal(n))
        y = np.cumsum(rng.standard_normal(n))
        r = int(rng.integers(0, n // 4 + 1))
        env = envelope(x, r)
        band = DtwConstraint("sakoe_chiba", r)
        chain = [
            lb_paa(env, n // 4, paa(y, n // 4)) * scale,
            lb_keogh(env, y) * scale,
            dtw(x, y, band),
            lp_norm(x, y),
        ]
        for a, b in zip(chain, chain[1:]):
            if a > b + BOUND_SLACK:
                return False, f"bound chain broken: {chain}"
        free = dtw(x, y)
        if free > chain[2] + BOUND_SLACK:
            return False, "unconstrained DTW exceeds banded DTW"
        if max(lb_kim(x, y), lb_yi(x, y)) * scale > free + BOUND_SLACK:
            return False, "LB_Kim/LB_Yi exceeds DTW"
    return True, ""


def _suite_metric(rng, trials, scale):
    for _ in range(trials):
        n = int(rng.integers(1, 12))
        x, y, z = (rng.standard_normal(n) for _ in range(3))
        for name, d in (("l2", lp_norm), ("l1", lambda a, b: lp_norm(a, b, 1)), ("erp", erp)):
            if d(x, z) > d(x, y) + d(y, z) + BOUND_SLACK:
                return False, f"{name} violates the triangle inequality"
    return True, ""


def _suite_windows(rng, trials, scale):
    for _ in range(trials):
        n = int(rng.integers(1, 64))
        w = int(rng.integers(1, n + 1))
        if not np.array_equal(window_starts(n, w, "j_sliding", 1), window_starts(n, w, "sliding")):
            return False, "J=1 differs from sliding windows"
        if not np.array_equal(window_starts(n, w, "j_sliding", w), window_starts(n, w, "disjoint")):
            return False, "J=w differs from disjoint windows"
    return True, ""


def _suite_lemmas(rng, trials, scale):
    for _ in range(trials):
        p = int(rng.integers(1, 8))
        w = int(rng.integers(1, 8))
        S, Q = rng.standard_normal(p * w), rng.standard_normal(p * w)
        eps = lp_norm(S, Q) * float(rng.uniform(1.0, 1.5))
        best = min(lp_norm(S[i * w:(i + 1) * w], Q[i * w:(i + 1) * w]) for i in range(p))
        if best > eps / math.sqrt(p) + BOUND_SLACK:
            return False, "window split lemma violated"
        i, j = sorted(rng.choice(p * w + 1, size=2, replace=False))
        if lp_norm(S[i:j], Q[i:j]) > eps + BOUND_SLACK:
            return False, "aligned slice lemma violated"
    return True, ""


def _suite_exactness(rng, trials, scale):
    for t in range(max(1, trials // 50)):
        ds = Dataset.from_arrays(random_walks(6, 96, int(rng.integers(1 << 30))))
        Q = random_walks(1, 32, int(rng.integers(1 << 30)))[0]
        w = int(rng.choice([4, 8, 16]))
        allp = np.sort([r.distance for r in brute_force_range(ds, Q, np.inf)])
        eps = float(np.percentile(allp, 2))
        oracle = brute_force_range(ds, Q, eps)
        for alg, kind, J in (("frm", "sliding", 1), ("dualmatch", "disjoint", w), ("generalmatch", "j_sliding", max(1, w // 2))):
            idx = build_index(ds, IndexConfig(w, kind, J, TransformSpec("paa", 4)))
            got = range_query(idx, ds, Q, eps, alg)
            if got != oracle:
                return False, f"{alg} differs from the brute-force oracle (w={w})"
            if knn(idx, ds, Q, 3) != brute_force_knn(ds, Q, 3):
                return False, f"kNN over the {kind} index differs from the oracle"
    return True, ""


def _suite_motifs(rng, trials, scale):
    for _ in range(max(1, trials // 10)):
        strings = [SymbolString(i, tuple(rng.integers(0, 3, size=int(rng.integers(0, 12))).tolist())) for i in range(3)]
        L = int(rng.integers(1, 4))
        got = {(m.pattern, m.occurrences) for m in find_motifs(strings, L, 2)}
        counts: dict = {}
        for s in strings:
            for i in range(len(s.symbols) - L + 1):
                counts.setdefault(s.symbols[i:i + L], []).append((s.sequence_id, i))
        want = {(p, tuple(o)) for p, o in counts.items() if len(o) >= 2}
        if got != want:
            return False, "find_motifs differs from substring enumeration"
    return True, ""


SUITES: dict[str, Callable] = {
    "transform-bounds": _suite_transform_bounds,
    "bound-chain": _suite_bound_chain,
    "metric-axioms": _suite_metric,
    "window-collapse": _suite_windows,
    "lemmas": _suite_lemmas,
    "exactness": _suite_exactness,
    "motifs": _suite_motifs,
}


def run_selfcheck_suites(seed: int = 42, trials: int = 200, break_bound: bool = False, report=print) -> list[tuple[str, bool, str]]:
    """Run every suite with its own seeded generator; report one line per suite."""
    scale = 1.01 if break_bound else 1.0
    out = []
    for i, (name, fn) in enumerate(SUITES.items()):
        rng = np.random.default_rng([seed, i])
        ok, detail = fn(rng, trials, scale)
        report(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
        out.append((name, ok, detail))
    return out
