import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsmatch.bench import random_walks
from tsmatch.core import Dataset
from tsmatch.errors import TooManyClusters, WindowTooLong
from tsmatch.motifs import SymbolString, disjoint_window_matrix, find_motifs, kmeans, symbolize

from .oracles import substring_counts


def test_identical_windows_one_cluster():
    ds = Dataset.from_arrays([np.tile([0.0, 1.0, 2.0, 1.0], 5)])
    out = symbolize(ds, 4, 1)
    assert out == [SymbolString(0, (0,) * 5)]


def test_two_levels_partition_exactly():
    a = np.concatenate([np.zeros(4), np.full(4, 10.0), np.zeros(4), np.zeros(4), np.full(4, 10.0)])
    b = np.concatenate([np.full(4, 10.0), np.zeros(4)])
    ds = Dataset.from_arrays([a, b])
    strings = symbolize(ds, 4, 2, normalized=False)
    levels = [[0, 10, 0, 0, 10], [10, 0]]
    for s, lev in zip(strings, levels):
        # one symbol per level, and the mapping is a bijection
        mapping = dict(zip(lev, s.symbols))
        assert len(set(mapping.values())) == 2
        assert [mapping[v] for v in lev] == list(s.symbols)
    zero_sym = strings[0].symbols[0]
    assert strings[1].symbols == (1 - zero_sym, zero_sym)


def test_symbolize_deterministic():
    ds = Dataset.from_arrays(random_walks(6, 160, 4))
    runs = [symbolize(ds, 16, 4, seed=9) for _ in range(5)]
    assert all(r == runs[0] for r in runs)
    assert [len(s) for s in runs[0]] == [10] * 6


def test_symbolize_errors():
    ds = Dataset.from_arrays(random_walks(2, 32, 1))
    with pytest.raises(TooManyClusters):
        symbolize(ds, 16, 5)
    with pytest.raises(WindowTooLong):
        symbolize(ds, 40, 2)


def test_predefined_centroids():
    ds = Dataset.from_arrays([[0, 0, 10, 10, 0, 0]])
    out = symbolize(ds, 2, 0, normalized=False, centroids=[[0, 0], [10, 10]])
    assert out[0].symbols == (0, 1, 0)


def test_kmeans_objective_non_increasing():
    X, _ = disjoint_window_matrix(Dataset.from_arrays(random_walks(10, 256, 2)), 16)
    for seed in range(5):
        res = kmeans(X, 6, seed)
        h = res.objective_history
        assert all(b <= a + 1e-9 for a, b in zip(h, h[1:]))
        assert res.iterations <= 100


def test_find_motifs_examples():
    s = [SymbolString(0, (0, 1, 0, 1))]
    (m,) = [m for m in find_motifs(s, 2, 2)]
    assert m.pattern == (0, 1) and m.occurrences == ((0, 0), (0, 2)) and m.count == 2
    assert find_motifs(s, 2, 10) == []


def test_find_motifs_ordering():
    s = [SymbolString(0, (2, 2, 2, 1, 1, 0, 0))]
    out = find_motifs(s, 2, 1)
    keys = [(-m.count, m.pattern) for m in out]
    assert keys == sorted(keys)
    assert out[0].pattern == (2, 2)


def test_no_overlap():
    s = [SymbolString(0, (0, 0, 0, 0))]
    assert find_motifs(s, 2, 1)[0].count == 3
    assert find_motifs(s, 2, 1, overlap=False)[0].occurrences == ((0, 0), (0, 2))


@settings(max_examples=100)
@given(st.lists(st.lists(st.integers(0, 3), max_size=15), min_size=1, max_size=4), st.integers(1, 4), st.integers(1, 4))
def test_find_motifs_matches_enumeration(strings, L, min_count):
    ss = [SymbolString(i, tuple(s)) for i, s in enumerate(strings)]
    want = {p: o for p, o in substring_counts(list(enumerate(strings)), L).items() if len(o) >= min_count}
    got = find_motifs(ss, L, min_count)
    assert {m.pattern: list(m.occurrences) for m in got} == want
    assert all(m.count >= min_count for m in got)


def test_motif_windows_within_twice_cluster_radius():
    ds = Dataset.from_arrays(random_walks(8, 192, 6))
    w, k = 16, 5
    X, owners = disjoint_window_matrix(ds, w)
    res = kmeans(X, k, 42)
    radius = res.radii(X).max()
    strings = symbolize(ds, w, k, seed=42)
    row = {o: i for i, o in enumerate(owners)}
    for m in find_motifs(strings, 2, 2):
        for a in m.occurrences:
            for b in m.occurrences:
                for t in range(2):
                    xa = X[row[(a[0], a[1] + t)]]
                    xb = X[row[(b[0], b[1] + t)]]
                    assert np.linalg.norm(xa - xb) <= 2 * radius + 1e-9
