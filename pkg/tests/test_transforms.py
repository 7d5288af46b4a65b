import numpy as np
import pytest

from lpmri.core import ShapeError
from lpmri.transforms import (
    FILTERS,
    WaveletSpec,
    adjoint_operator,
    fft_centered,
    forward_operator,
    ifft_centered,
    operator_norm,
    sample,
    wavelet_analyze,
    wavelet_synthesize,
)

from conftest import crandn


def dft_matrix(n):
    # centered unitary DFT built entry by entry
    idx = np.arange(n) - n // 2
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def direct_dft2(x):
    n = x.shape[0]
    out = np.zeros_like(x, dtype=complex)
    idx = np.arange(n) - n // 2
    for a in range(n):
        for b in range(n):
            phase = np.exp(-2j * np.pi * (idx[a] * idx[:, None] + idx[b] * idx[None, :]) / n)
            out[a, b] = np.sum(x * phase) / n
    return out


def test_constant_image_gives_center_impulse():
    k = fft_centered(np.full((16, 16), 3.0))
    expected = np.zeros((16, 16), complex)
    expected[8, 8] = 3.0 * 16
    np.testing.assert_allclose(k, expected, atol=1e-12)


def test_center_impulse_gives_constant_image():
    k = np.zeros((8, 8), complex)
    k[4, 4] = 8.0
    np.testing.assert_allclose(ifft_centered(k), np.ones((8, 8)), atol=1e-12)


def test_fft_matches_direct_dft(rng):
    x = crandn(rng, 8, 8)
    np.testing.assert_allclose(fft_centered(x), direct_dft2(x), atol=1e-12)


def test_ifft_matches_direct_inverse(rng):
    k = crandn(rng, 8, 8)
    m = dft_matrix(8)
    np.testing.assert_allclose(ifft_centered(k), m.conj().T @ k @ m.conj(), atol=1e-10)


def test_fft_round_trips(rng):
    x = crandn(rng, 32, 32)
    np.testing.assert_allclose(ifft_centered(fft_centered(x)), x, atol=1e-12)
    np.testing.assert_allclose(fft_centered(ifft_centered(x)), x, atol=1e-12)


def test_fft_adjoint_identity(rng):
    x, y = crandn(rng, 8, 8), crandn(rng, 8, 8)
    lhs = np.vdot(y, fft_centered(x))
    rhs = np.vdot(ifft_centered(y), x)
    assert abs(lhs - rhs) < 1e-12


def test_fft_rejects_non_square():
    with pytest.raises(ShapeError):
        fft_centered(np.zeros((8, 16)))


@pytest.mark.parametrize("family", sorted(FILTERS))
def test_filters_are_orthonormal(family):
    h = FILTERS[family]
    assert np.sum(h) == pytest.approx(np.sqrt(2), abs=1e-14)
    for shift in range(0, len(h), 2):
        expected = 1.0 if shift == 0 else 0.0
        assert np.dot(h[:len(h) - shift], h[shift:]) == pytest.approx(expected, abs=1e-14)


def test_db4_has_eight_taps():
    assert len(FILTERS["db4"]) == 8


def test_haar_one_level_approximation_by_hand():
    a, b, c, d = 1.0, 2.0, 5.0, -3.0
    x = np.array([[a, b], [c, d]])
    code = wavelet_analyze(x, WaveletSpec("haar", 1))
    assert code[0, 0] == pytest.approx((a + b + c + d) / 2, abs=1e-14)
    # orthonormal Haar: the remaining entries are scaled differences
    got = sorted(np.abs(code.ravel()[1:]))
    hand = sorted(abs(v) for v in ((a - b + c - d) / 2, (a + b - c - d) / 2,
                                   (a - b - c + d) / 2))
    np.testing.assert_allclose(got, hand, atol=1e-14)


def test_zero_image_gives_zero_code():
    assert not np.any(wavelet_analyze(np.zeros((64, 64))))


@pytest.mark.parametrize("family,levels", [("haar", 6), ("db2", 4), ("db4", 3)])
def test_wavelet_round_trip_and_norm(rng, family, levels):
    spec = WaveletSpec(family, levels)
    x = crandn(rng, 64, 64)
    c = wavelet_analyze(x, spec)
    assert np.linalg.norm(c) == pytest.approx(np.linalg.norm(x), rel=1e-12)
    np.testing.assert_allclose(wavelet_synthesize(c, spec), x, atol=1e-10)


def test_wavelet_adjoint_identity(rng):
    spec = WaveletSpec("db4", 2)
    alpha, x = crandn(rng, 32, 32), crandn(rng, 32, 32)
    lhs = np.vdot(x, wavelet_synthesize(alpha, spec))
    rhs = np.vdot(wavelet_analyze(x, spec), alpha)
    assert abs(lhs - rhs) < 1e-10


def test_wavelet_rejects_too_many_levels():
    with pytest.raises(ShapeError):
        wavelet_analyze(np.zeros((16, 16)), WaveletSpec("haar", 5))


def test_sample_is_diagonal(rng):
    mask = rng.random((16, 16)) < 0.3
    k, y = crandn(rng, 16, 16), crandn(rng, 16, 16)
    pk = sample(k, mask)
    assert np.all(pk[~mask] == 0)
    np.testing.assert_array_equal(pk[mask], k[mask])
    assert np.vdot(y, pk) == np.vdot(sample(y, mask), k)


def test_sample_full_mask_is_identity(rng):
    k = crandn(rng, 8, 8)
    np.testing.assert_array_equal(sample(k, np.ones((8, 8), bool)), k)


def test_dc_only_mask_keeps_constant_spectrum():
    k = fft_centered(np.full((16, 16), 0.5))
    mask = np.zeros((16, 16), bool)
    mask[8, 8] = True
    np.testing.assert_allclose(sample(k, mask), k, atol=1e-12)


def test_forward_operator_collapses_to_fft(rng):
    spec = WaveletSpec("db4", 2)
    x = crandn(rng, 32, 32)
    full = np.ones((32, 32), bool)
    np.testing.assert_allclose(forward_operator(wavelet_analyze(x, spec), full, spec),
                               fft_centered(x), atol=1e-12)
    assert not np.any(forward_operator(np.zeros((32, 32)), full, spec))


def test_forward_adjoint_pair(rng):
    spec = WaveletSpec("db2", 3)
    mask = rng.random((32, 32)) < 0.4
    a, r = crandn(rng, 32, 32), crandn(rng, 32, 32)
    lhs = np.vdot(r, forward_operator(a, mask, spec))
    rhs = np.vdot(adjoint_operator(r, mask, spec), a)
    assert abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))


def test_operator_norm_bounded(rng):
    mask = rng.random((32, 32)) < 0.3
    assert operator_norm(mask, WaveletSpec("db4", 3), seed=0) <= 1 + 1e-8


@pytest.mark.parametrize("family", sorted(FILTERS))
def test_filter_taps_match_pywavelets(family):
    pywt = pytest.importorskip("pywt")
    np.testing.assert_allclose(FILTERS[family], pywt.Wavelet(family).rec_lo, atol=1e-14)
