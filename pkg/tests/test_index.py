import math

import numpy as np
import pytest

from tsmatch.bench import random_walks
from tsmatch.core import Dataset
from tsmatch.errors import (
    DataError,
    DimensionMismatch,
    EmptyInput,
    IndexFormatError,
    InvalidSlidingFactor,
    NoIndexableSequence,
    TransformMismatch,
)
from tsmatch.index import (
    IndexConfig,
    Mbr,
    build_index,
    build_mbrs,
    knn_mbr_scan,
    load_index,
    mindist,
    range_search,
    save_index,
)
from tsmatch.lower_bounds import reduced_lb
from tsmatch.transforms import ReducedVector, TransformSpec


def rv(*c):
    return ReducedVector(list(c), "identity", len(c))


def test_build_mbrs_examples():
    vecs = [((0, i), rv(i, i)) for i in range(3)]
    m = build_mbrs(vecs, 2)
    assert len(m) == 2
    np.testing.assert_array_equal(m[0].low, [0, 0])
    np.testing.assert_array_equal(m[0].high, [1, 1])
    assert len(m[0].entries) == 2
    np.testing.assert_array_equal(m[1].low, m[1].high)
    assert len(m[1].entries) == 1
    ones = build_mbrs(vecs, 1)
    assert len(ones) == 3 and all(np.array_equal(b.low, b.high) for b in ones)
    assert len(build_mbrs(vecs, 10)) == 1
    with pytest.raises(EmptyInput):
        build_mbrs([], 2)
    with pytest.raises(TransformMismatch):
        build_mbrs([((0, 0), rv(1, 2)), ((0, 1), rv(1, 2, 3))], 2)


def test_mindist_examples():
    box = Mbr([1, 1], [2, 2], [(0, 0)])
    assert mindist(rv(1.5, 1.2), box) == 0
    assert mindist(rv(0, 0), box) == pytest.approx(math.sqrt(2))
    assert mindist(rv(0, 1.5), box) == 1
    with pytest.raises(DimensionMismatch):
        mindist(rv(0, 0, 0), box)


def test_containment_and_counts(rng):
    vecs = [((0, i), ReducedVector(rng.standard_normal(3), "dct", 8)) for i in range(50)]
    mbrs = build_mbrs(vecs, 7)
    assert sum(len(m.entries) for m in mbrs) == 50
    it = iter(vecs)
    for m in mbrs:
        for e in m.entries:
            entry, v = next(it)
            assert tuple(e) == entry
            assert m.contains(v.weighted())


def test_build_index_counts():
    ds = Dataset.from_arrays([np.arange(8.0)])
    cfg = IndexConfig(window=4, kind="sliding", transform=TransformSpec("paa", 2), pack_count=8)
    idx = build_index(ds, cfg)
    assert idx.n_entries == 5 and idx.n_mbrs == 1
    idx = build_index(ds, IndexConfig(4, "disjoint", transform=TransformSpec("paa", 2), pack_count=8))
    assert idx.n_entries == 2
    with pytest.raises(NoIndexableSequence):
        build_index(Dataset.from_arrays([[1.0, 2.0]]), cfg)


def test_short_sequences_skipped():
    ds = Dataset.from_arrays([np.arange(8.0), [1.0, 2.0], np.arange(6.0)])
    idx = build_index(ds, IndexConfig(4, transform=TransformSpec("paa", 2)))
    assert idx.skipped == (1,)
    assert set(idx.entries[:, 0].tolist()) == {0, 2}


def test_storage_counts_disjoint_vs_sliding():
    ds = Dataset.from_arrays(random_walks(1, 1024, 3))
    t = TransformSpec("paa", 4)
    assert build_index(ds, IndexConfig(16, "sliding", transform=t)).n_entries == 1009
    assert build_index(ds, IndexConfig(16, "disjoint", transform=t)).n_entries == 64


def _idx(rng, kind="sliding", pack=5, transform=TransformSpec("dft", 3)):
    ds = Dataset.from_arrays([np.cumsum(rng.standard_normal(n)) for n in (200, 150, 90)])
    return ds, build_index(ds, IndexConfig(16, kind, 4, transform, pack_count=pack, fanout=4))


def test_every_window_in_exactly_one_mbr(rng):
    ds, idx = _idx(rng, "j_sliding")
    seen = [tuple(e) for m in idx.mbrs for e in m.entries.tolist()]
    assert len(seen) == len(set(seen)) == idx.n_entries
    want = {(s.id, st) for s in ds for st in range(0, len(s) - 16 + 1, 4)}
    assert set(seen) == want


def test_tree_contains_children(rng):
    _, idx = _idx(rng)
    for node in idx._nodes:
        if not node.leaf:
            for c, lo, hi in zip(node.children, node.low, node.high):
                child = idx._nodes[c]
                assert np.all(lo <= child.low.min(axis=0)) and np.all(child.high.max(axis=0) <= hi)


def test_range_search_equals_linear_scan(rng):
    ds, idx = _idx(rng)
    flat = idx.without_tree()
    spec = idx.config.transform
    for _ in range(50):
        q = spec(np.cumsum(rng.standard_normal(16)))
        radius = float(rng.uniform(0, 15))
        got = range_search(idx, q, radius)
        oracle = [tuple(e) for m in idx.mbrs if mindist(q, m) <= radius for e in m.entries.tolist()]
        assert sorted(got) == sorted(oracle)
        assert sorted(range_search(flat, q, radius)) == sorted(oracle)


def test_range_search_no_false_dismissals(rng):
    ds, idx = _idx(rng, transform=TransformSpec("paa", 4))
    spec = idx.config.transform
    for _ in range(50):
        q = spec(np.cumsum(rng.standard_normal(16)))
        radius = float(rng.uniform(0, 20))
        got = set(range_search(idx, q, radius))
        for (sid, st), v in zip(idx.entries.tolist(), idx.vectors):
            if reduced_lb(spec(ds[sid].values[st:st + 16]), q) <= radius:
                assert (sid, st) in got


def test_stored_vectors_are_weighted_coords(rng):
    ds, idx = _idx(rng, transform=TransformSpec("paa", 4))
    for (sid, st), v in zip(idx.entries.tolist(), idx.vectors):
        np.testing.assert_allclose(v, idx.config.transform(ds[sid].values[st:st + 16]).weighted(), atol=1e-12)


def test_range_search_extremes(rng):
    _, idx = _idx(rng)
    p = idx.vectors[10]
    assert len(range_search(idx, p, 1e9)) == idx.n_entries
    hit = range_search(idx, p, 0.0)
    assert (int(idx.entries[10, 0]), int(idx.entries[10, 1])) in hit
    with pytest.raises(DimensionMismatch):
        range_search(idx, np.zeros(2), 1.0)


def test_knn_scan_order(rng):
    _, idx = _idx(rng)
    p = idx.vectors[33] + 0.1
    got = list(knn_mbr_scan(idx, p, idx.n_entries))
    assert len(got) == idx.n_entries
    dists = [d for d, _ in got]
    assert dists == sorted(dists)
    oracle = sorted(mindist(p, m) for m in idx.mbrs for _ in m.entries)
    np.testing.assert_allclose(dists, oracle, atol=1e-12)
    first = list(knn_mbr_scan(idx, idx.vectors[33], 1))
    assert first[0][0] == 0.0
    flat = [d for d, _ in knn_mbr_scan(idx.without_tree(), p, idx.n_entries)]
    np.testing.assert_allclose(flat, dists, atol=1e-12)


def test_persistence_roundtrip(tmp_path, rng):
    ds, idx = _idx(rng, "j_sliding")
    path = tmp_path / "idx.bin"
    save_index(idx, path)
    back = load_index(path)
    assert back.meta == idx.meta
    for a in ("mbr_low", "mbr_high", "mbr_first", "mbr_count", "entries", "vectors"):
        np.testing.assert_array_equal(getattr(back, a), getattr(idx, a))
    q = idx.vectors[5]
    assert range_search(back, q, 3.0) == range_search(idx, q, 3.0)
    save_index(back, tmp_path / "again.bin")
    assert (tmp_path / "again.bin").read_bytes() == path.read_bytes()


def test_persistence_rejects_garbage(tmp_path, rng):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"nope")
    with pytest.raises(IndexFormatError):
        load_index(bad)
    _, idx = _idx(rng)
    save_index(idx, bad)
    bad.write_bytes(bad.read_bytes()[:-8])
    with pytest.raises(IndexFormatError):
        load_index(bad)


def test_config_rejects_bad_kind_and_factor(walk_ds):
    with pytest.raises(InvalidSlidingFactor):
        build_index(walk_ds, IndexConfig(8, "j_sliding", 9))
    with pytest.raises(DataError):
        build_index(walk_ds, IndexConfig(8, "hopping", 1))
