import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsmatch.distances import lp_norm
from tsmatch.errors import FrameMismatch, NotPowerOfTwo, TooManyCoefficients, TooManySegments
from tsmatch.lower_bounds import reduced_lb
from tsmatch.transforms import (
    ApcaRepresentation,
    TransformSpec,
    apca,
    dct,
    dft,
    haar,
    haar_full,
    haar_inverse,
    paa,
    reconstruct,
)

from .oracles import apca_exhaustive, dct_matrix, direct_dft, haar_matrix


# -- PAA -----------------------------------------------------------------------

def test_paa_examples():
    np.testing.assert_array_equal(paa([1, 2, 3, 4], 2).coords, [1.5, 3.5])
    np.testing.assert_array_equal(paa([5, 5, 5, 5], 2).coords, [5, 5])
    np.testing.assert_array_equal(paa([0, 2, 4, 6, 8, 10], 3).coords, [1, 5, 9])


def test_paa_frame_mismatch():
    with pytest.raises(FrameMismatch):
        paa([1, 2, 3], 2)


def test_paa_full_resolution_is_identity(rng):
    x = rng.standard_normal(12)
    np.testing.assert_array_equal(paa(x, 12).coords, x)


# -- DFT -------------------------------------------------------------------------

def test_dft_examples():
    np.testing.assert_allclose(dft([1, 1, 1, 1], 1).coords, [2.0, 0.0])
    np.testing.assert_array_equal(dft([0, 0, 0, 0], 2).coords, [0, 0, 0, 0])


@pytest.mark.parametrize("n", [1, 2, 5, 8, 9])
def test_dft_matches_direct_oracle(rng, n):
    x = rng.standard_normal(n)
    k = n // 2 + 1
    ref = direct_dft(x)[:k]
    inter = np.empty(2 * k)
    inter[0::2], inter[1::2] = ref.real, ref.imag
    np.testing.assert_allclose(dft(x, k).coords, inter, atol=1e-12)


def test_dft_too_many():
    with pytest.raises(TooManyCoefficients):
        dft(np.zeros(8), 6)


@pytest.mark.parametrize("n", [2, 7, 8, 16, 33])
def test_dft_full_preserves_distance(rng, n):
    x, y = rng.standard_normal(n), rng.standard_normal(n)
    k = n // 2 + 1
    assert reduced_lb(dft(x, k), dft(y, k)) == pytest.approx(lp_norm(x, y), abs=1e-9)


# -- DCT ---------------------------------------------------------------------------

def test_dct_constant_dc_term():
    for n in (1, 4, 7):
        np.testing.assert_allclose(dct([2.5] * n, 1).coords, [2.5 * math.sqrt(n)], atol=1e-12)
    np.testing.assert_array_equal(dct([0, 0], 1).coords, [0])


@pytest.mark.parametrize("n", [1, 3, 8, 10])
def test_dct_matches_matrix_oracle(rng, n):
    x = rng.standard_normal(n)
    np.testing.assert_allclose(dct(x, n).coords, dct_matrix(n) @ x, atol=1e-12)


def test_dct_full_preserves_distance(rng):
    x, y = rng.standard_normal(20), rng.standard_normal(20)
    assert reduced_lb(dct(x, 20), dct(y, 20)) == pytest.approx(lp_norm(x, y), abs=1e-9)
    with pytest.raises(TooManyCoefficients):
        dct(x, 21)


# -- Haar ----------------------------------------------------------------------------

def test_haar_constant():
    np.testing.assert_allclose(haar([2, 2, 2, 2], 1).coords, [4.0])


@pytest.mark.parametrize("n", [1, 2, 4, 16])
def test_haar_matches_matrix_oracle(rng, n):
    x = rng.standard_normal(n)
    np.testing.assert_allclose(haar_full(x), haar_matrix(n) @ x, atol=1e-12)


def test_haar_inverse_roundtrip(rng):
    x = rng.standard_normal(32)
    np.testing.assert_allclose(haar_inverse(haar_full(x)), x, atol=1e-9)
    np.testing.assert_allclose(reconstruct(haar(x, 32)), x, atol=1e-9)


def test_haar_errors():
    with pytest.raises(NotPowerOfTwo):
        haar(np.zeros(6), 1)
    with pytest.raises(TooManyCoefficients):
        haar(np.zeros(4), 5)


# -- lower bounding ----------------------------------------------------------------

def _specs(n):
    out = []
    for N in range(1, n + 1):
        if n % N == 0:
            out.append(TransformSpec("paa", N))
    out += [TransformSpec("dft", k) for k in range(1, n // 2 + 2)]
    out += [TransformSpec("dct", k) for k in range(1, n + 1)]
    if n & (n - 1) == 0:
        out += [TransformSpec("haar", k) for k in range(1, n + 1)]
    return out


@pytest.mark.parametrize("n", [8, 12, 16])
def test_every_truncation_lower_bounds(rng, n):
    specs = _specs(n)
    for _ in range(300):
        x = np.cumsum(rng.standard_normal(n))
        y = np.cumsum(rng.standard_normal(n))
        true = lp_norm(x, y)
        for s in specs:
            assert reduced_lb(s(x), s(y)) <= true + 1e-9, s


@pytest.mark.parametrize("kind", ["dft", "dct", "haar"])
def test_monotone_in_k(rng, kind):
    n = 16
    top = n // 2 + 1 if kind == "dft" else n
    for _ in range(100):
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        d = [reduced_lb(TransformSpec(kind, k)(x), TransformSpec(kind, k)(y)) for k in range(1, top + 1)]
        assert all(b >= a - 1e-12 for a, b in zip(d, d[1:]))


def test_batch_matches_single(rng):
    X = rng.standard_normal((5, 16))
    for kind in ("paa", "dft", "dct", "haar", "identity"):
        spec = TransformSpec(kind, 4)
        B = spec.weighted_batch(X)
        for row, x in zip(B, X):
            np.testing.assert_allclose(row, spec(x).weighted(), atol=1e-12)


# -- APCA ------------------------------------------------------------------------

def test_apca_examples():
    assert apca([1, 1, 1, 5, 5, 5], 2).segments == ((1.0, 2), (5.0, 5))
    assert apca([3, 3, 3], 1).segments == ((3.0, 2),)
    np.testing.assert_array_equal(reconstruct(apca([1, 1, 5, 5], 2)), [1, 1, 5, 5])


def test_apca_one_segment_per_point(rng):
    x = rng.standard_normal(9)
    r = apca(x, 9)
    assert len(r) == 9
    np.testing.assert_array_equal(reconstruct(r), x)


def test_apca_too_many_segments():
    with pytest.raises(TooManySegments):
        apca([1, 2], 3)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=9), st.integers(1, 4))
def test_apca_matches_exhaustive_oracle(vals, M):
    x = np.array(vals, dtype=float)
    if M > len(x):
        M = len(x)
    r = apca(x, M)
    sse = float(((reconstruct(r) - x) ** 2).sum())
    best_sse, _ = apca_exhaustive(x, M)
    assert sse == pytest.approx(best_sse, abs=1e-9)
    assert len(r) == M and r.segments[-1][1] == len(x) - 1


def test_apca_heuristic_path(rng):
    x = np.repeat(rng.standard_normal(8), 512)  # n*M > 2**16 -> greedy
    r = apca(x, 8)
    assert len(r) == 8
    assert r.source_len == x.size
    np.testing.assert_allclose(reconstruct(r), x, atol=1e-9)


def test_apca_representation_invariants():
    with pytest.raises(Exception):
        ApcaRepresentation(((1.0, 3), (2.0, 3)))


# -- reconstruct -------------------------------------------------------------------

def test_reconstruct_paa():
    np.testing.assert_array_equal(reconstruct(paa([1, 2, 3, 4], 2)), [1.5, 1.5, 3.5, 3.5])


@pytest.mark.parametrize("n", [7, 8])
def test_reconstruct_full_orthonormal(rng, n):
    x = rng.standard_normal(n)
    np.testing.assert_allclose(reconstruct(dft(x, n // 2 + 1)), x, atol=1e-9)
    np.testing.assert_allclose(reconstruct(dct(x, n)), x, atol=1e-9)
