import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tsmatch.distances import DtwConstraint, dtw, lp_norm
from tsmatch.errors import BoundViolation, EmptyInput, FrameMismatch, LengthMismatch, TransformMismatch
from tsmatch.lower_bounds import envelope, lb_keogh, lb_kim, lb_paa, lb_yi, reduced_lb, tlb
from tsmatch.transforms import ReducedVector, dft, paa


def test_reduced_lb_examples():
    a = paa([1, 2, 3, 4], 2)
    assert reduced_lb(a, a) == 0
    b = paa([1, 2, 1, 2], 2)
    np.testing.assert_allclose(b.coords, [1.5, 1.5])
    assert reduced_lb(a, b) == pytest.approx(2 * math.sqrt(2))
    assert lp_norm([1, 2, 3, 4], [1, 2, 1, 2]) == pytest.approx(math.sqrt(8))
    assert reduced_lb(ReducedVector([2, 0], "dft", 4), ReducedVector([0, 0], "dft", 4)) == 2


def test_reduced_lb_mismatch():
    with pytest.raises(TransformMismatch):
        reduced_lb(paa([1, 2, 3, 4], 2), dft([1, 2, 3, 4], 1))
    with pytest.raises(TransformMismatch):
        reduced_lb(paa([1, 2, 3, 4], 2), paa([1, 2, 3, 4, 5, 6], 2))


def test_tlb():
    assert tlb(2, 4) == 0.5
    assert tlb(0, 5) == 0
    assert tlb(0, 0) == 1
    with pytest.raises(BoundViolation):
        tlb(3, 2)


@given(st.floats(0, 100), st.floats(0, 1))
def test_tlb_in_unit_interval(true, frac):
    assert 0 <= tlb(true * frac, true) <= 1


def test_lb_kim():
    assert lb_kim([1, 2], [1, 2]) == 0
    assert lb_kim([0, 1, 2], [0, 1, 5]) == 3
    with pytest.raises(EmptyInput):
        lb_kim([], [1])


def test_lb_yi():
    # range(x) inside range(y): no point of x is in excess
    assert lb_yi([0.5, 0.55], [0.5, 0.6], symmetric=False) == 0
    assert lb_yi([0.5, 0.55], [0.5, 0.6]) == pytest.approx(0.05)
    assert lb_yi([0.5, 0.6, 0.55], [0.6, 0.5]) == 0
    # both points of x exceed max(y) = 1 by 2
    assert lb_yi([3, 3], [0, 1], symmetric=False) == pytest.approx(2 * math.sqrt(2))
    # reverse orientation: y = [0, 1] falls below min(x) = 3 by 3 and 2
    assert lb_yi([3, 3], [0, 1]) == pytest.approx(math.sqrt(13))
    with pytest.raises(EmptyInput):
        lb_yi([1], [])


def test_envelope():
    e = envelope([1, 2, 3], 0)
    np.testing.assert_array_equal(e.upper, [1, 2, 3])
    np.testing.assert_array_equal(e.lower, [1, 2, 3])
    e = envelope([1, 3, 2], 1)
    np.testing.assert_array_equal(e.upper, [3, 3, 3])
    np.testing.assert_array_equal(e.lower, [1, 1, 2])
    e = envelope([4, 4, 4, 4], 3)
    np.testing.assert_array_equal(e.upper, [4] * 4)
    np.testing.assert_array_equal(e.lower, [4] * 4)


def test_envelope_matches_clipped_window(rng):
    q = rng.standard_normal(30)
    for r in (0, 1, 4, 30):
        e = envelope(q, r)
        for i in range(30):
            seg = q[max(0, i - r):i + r + 1]
            assert e.upper[i] == seg.max() and e.lower[i] == seg.min()


def test_lb_keogh():
    e = envelope([0, 0, 0], 1)
    assert lb_keogh(e, [1, 1, 1]) == pytest.approx(math.sqrt(3))
    assert lb_keogh(envelope([0, 5, 0], 1), [1, 2, 3]) == 0
    with pytest.raises(LengthMismatch):
        lb_keogh(e, [1, 1])


def test_lb_paa():
    e = envelope([0, 5, 0, 5], 1)
    assert lb_paa(e, 2, paa([1, 2, 3, 4], 2)) == 0
    with pytest.raises(FrameMismatch):
        lb_paa(e, 3, paa([1, 2, 3], 3))


def test_lb_paa_full_resolution_equals_keogh(rng):
    for _ in range(200):
        n = int(rng.integers(1, 40))
        q, s = rng.standard_normal(n), rng.standard_normal(n)
        e = envelope(q, int(rng.integers(0, n + 1)))
        assert lb_paa(e, n, paa(s, n)) == lb_keogh(e, s)


def test_bounds_against_dtw(rng):
    for _ in range(1000):
        n = int(rng.choice([8, 16, 24]))
        x = np.cumsum(rng.standard_normal(n))
        y = np.cumsum(rng.standard_normal(n))
        r = int(rng.integers(0, n // 2))
        e = envelope(x, r)
        banded = dtw(x, y, DtwConstraint("sakoe_chiba", r))
        free = dtw(x, y)
        N = n // 4
        assert lb_paa(e, N, paa(y, N)) <= lb_keogh(e, y) + 1e-9
        assert lb_keogh(e, y) <= banded + 1e-9
        assert banded <= lp_norm(x, y) + 1e-9
        assert free <= banded + 1e-9
        assert lb_kim(x, y) <= free + 1e-9
        assert lb_yi(x, y) <= free + 1e-9
        assert lb_kim(x, y) == lb_kim(y, x)
        assert lb_yi(x, y) == lb_yi(y, x)


def test_kim_yi_unequal_lengths(rng):
    for _ in range(300):
        x = rng.standard_normal(int(rng.integers(1, 15)))
        y = rng.standard_normal(int(rng.integers(1, 15)))
        free = dtw(x, y)
        assert lb_kim(x, y) <= free + 1e-9
        assert lb_yi(x, y) <= free + 1e-9
