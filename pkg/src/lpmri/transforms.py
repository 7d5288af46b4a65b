"""Linear operators: centered unitary FFT, orthonormal periodic DWT, k-space sampling.

All operators are norm preserving (FFT, DWT) or a 0/1 diagonal (sampling),
so the composite ``P F A`` has spectral norm at most one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import ShapeError, as_array, is_power_of_two, validate_shapes

__all__ = [
    "WaveletSpec",
    "fft_centered",
    "ifft_centered",
    "wavelet_analyze",
    "wavelet_synthesize",
    "sample",
    "forward_operator",
    "adjoint_operator",
    "operator_norm",
    "zero_filled",
    "FILTERS",
]

# Daubechies reconstruction low-pass filters (orthonormal, sum = sqrt(2)).
FILTERS = {
    "haar": (0.7071067811865476, 0.7071067811865476),
    "db2": (
        0.48296291314453416, 0.8365163037378079,
        0.2241438680420134, -0.12940952255126037,
    ),
    "db4": (
        0.2303778133088965, 0.7148465705529157, 0.6308807679298589,
        -0.027983769416859854, -0.18703481171909309, 0.030841381835560764,
        0.0328830116668852, -0.010597401785069032,
    ),
}


def _analysis_filters(family: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        rec_lo = np.array(FILTERS[family])
    except KeyError:
        raise ValueError(f"unknown wavelet family {family!r}; "
                         f"choose from {sorted(FILTERS)}") from None
    # correlation form: lo[k] = sum_j dec_lo[j] x[2k + j]
    dec_lo = rec_lo.copy()
    dec_hi = np.array([(-1) ** (j + 1) * rec_lo[len(rec_lo) - 1 - j]
                       for j in range(len(rec_lo))])
    return dec_lo, dec_hi


@dataclass(frozen=True)
class WaveletSpec:
    """Orthonormal periodic wavelet basis ``A`` (synthesis) and ``A^T`` (analysis)."""

    family: str = "db4"
    levels: int = 3

    def __post_init__(self):
        _analysis_filters(self.family)
        if int(self.levels) != self.levels or self.levels < 1:
            raise ValueError(f"levels must be a positive integer, got {self.levels}")

    def check_shape(self, shape: tuple[int, ...]) -> None:
        _check_square(shape)
        max_levels = int(math.log2(shape[0]))
        if self.levels > max_levels:
            raise ShapeError(
                f"{self.levels} wavelet levels invalid for {shape[0]}x{shape[1]} "
                f"(at most {max_levels})"
            )

    @property
    def filters(self) -> tuple[np.ndarray, np.ndarray]:
        return _analysis_filters(self.family)

    @classmethod
    def for_size(cls, n: int, family: str = "db4", levels: int = 3) -> WaveletSpec:
        return cls(family, max(1, min(levels, int(math.log2(n)))))


def _check_square(shape) -> None:
    if len(shape) != 2 or shape[0] != shape[1] or not is_power_of_two(shape[0]):
        raise ShapeError(f"expected a square power-of-two grid, got shape {tuple(shape)}")


def fft_centered(img) -> np.ndarray:
    """Unitary 2-D DFT with the zero frequency at index ``(H//2, W//2)``."""
    x = as_array(img)
    _check_square(x.shape)
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(x), norm="ortho"))


def ifft_centered(k) -> np.ndarray:
    """Inverse of :func:`fft_centered` (also its adjoint)."""
    y = as_array(k)
    _check_square(y.shape)
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(y), norm="ortho"))


def _apply_real(fn, x: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(x):
        return fn(np.ascontiguousarray(x.real)) + 1j * fn(np.ascontiguousarray(x.imag))
    return fn(x.astype(np.float64))


def wavelet_analyze(x, spec: WaveletSpec = WaveletSpec()) -> np.ndarray:
    """Multi-level 2-D DWT; coefficients are laid out in the usual pyramid.

    The coarsest approximation band sits in the top-left corner.
    """
    arr = as_array(x)
    spec.check_shape(arr.shape)
    dec_lo, dec_hi = spec.filters

    def run(a):
        c = a.copy()
        n = c.shape[0]
        for _ in range(spec.levels):
            lo, hi = _kernels.dwt_rows(c[:n, :n], dec_lo, dec_hi)
            block = np.hstack([lo, hi])
            lo, hi = _kernels.dwt_rows(block.T, dec_lo, dec_hi)
            c[:n, :n] = np.hstack([lo, hi]).T
            n //= 2
        return c

    return _apply_real(run, arr)


def wavelet_synthesize(code, spec: WaveletSpec = WaveletSpec()) -> np.ndarray:
    """Inverse (and adjoint) of :func:`wavelet_analyze`."""
    arr = as_array(code)
    spec.check_shape(arr.shape)
    dec_lo, dec_hi = spec.filters

    def run(c):
        x = c.copy()
        n = x.shape[0] >> (spec.levels - 1)
        for _ in range(spec.levels):
            half = n // 2
            cols = x[:n, :n].T
            block = _kernels.idwt_rows(cols[:, :half], cols[:, half:], dec_lo, dec_hi).T
            x[:n, :n] = _kernels.idwt_rows(block[:, :half], block[:, half:], dec_lo, dec_hi)
            n *= 2
        return x

    return _apply_real(run, arr)


def sample(k, mask) -> np.ndarray:
    """Apply ``P^T P``: zero every unsampled k-space entry."""
    validate_shapes(k, mask)
    return np.where(as_array(mask), as_array(k), 0)


def forward_operator(alpha, mask, spec: WaveletSpec = WaveletSpec()) -> np.ndarray:
    """``P F A alpha`` as a full grid with unsampled entries zero."""
    return sample(fft_centered(wavelet_synthesize(alpha, spec)), mask)


def adjoint_operator(r, mask, spec: WaveletSpec = WaveletSpec()) -> np.ndarray:
    """``A^T F^H P^T r``."""
    return wavelet_analyze(ifft_centered(sample(r, mask)), spec)


def zero_filled(y, spec: WaveletSpec | None = None) -> np.ndarray:
    """Zero-filled image ``F^H y`` (or its code ``A^T F^H y`` when ``spec`` is given)."""
    img = ifft_centered(y)
    return img if spec is None else wavelet_analyze(img, spec)


def operator_norm(mask, spec: WaveletSpec = WaveletSpec(), iters: int = 100,
                  seed: int = 0) -> float:
    """Estimate ``||P F A||_2`` by power iteration on the normal operator."""
    m = as_array(mask)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(m.shape) + 1j * rng.standard_normal(m.shape)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = adjoint_operator(forward_operator(x, m, spec), m, spec)
        est = np.linalg.norm(y)
        if est == 0:
            return 0.0
        x = y / est
    return float(np.sqrt(est))
