"""The reconstruction energy ``Phi = f + g`` over wavelet codes.

``f(alpha) = 1/2 ||P F A alpha - y||^2 (+ anchor_weight/2 ||A alpha - anchor||^2)``
``g(alpha) = lam * sum |alpha_i|^p``

The optional anchor term is the extra quadratic used by the Rician z-step;
with unitary ``F`` and orthonormal ``A`` it keeps ``f`` diagonal in k-space.
"""

from __future__ import annotations

import numpy as np

from .core import ConfigError, ShapeError, as_array, validate_shapes
from .transforms import (
    WaveletSpec,
    fft_centered,
    ifft_centered,
    wavelet_analyze,
    wavelet_synthesize,
)

__all__ = ["Objective", "lp_penalty"]


def lp_penalty(alpha, lam: float, p: float) -> float:
    """``lam * sum |alpha_i|^p`` using the complex modulus."""
    if lam == 0:
        return 0.0
    mag = np.abs(as_array(alpha)).ravel()
    nz = mag[mag > 0]
    return float(lam * np.sum(nz ** p))


class Objective:
    """Evaluate ``f``, its gradient, ``g`` and ``Phi`` for one problem instance.

    Parameters
    ----------
    y : array_like
        Centered k-space observation; unsampled entries are ignored.
    mask : array_like or SamplingMask
        Sampling indicator.
    spec : WaveletSpec
    lam, p : float
        Weight and exponent of the lp penalty.
    lipschitz : float, optional
        Lipschitz constant of ``grad f``. Defaults to ``1 + anchor_weight``,
        which is exact for the orthonormal operators used here.
    anchor, anchor_weight : optional
        Image-domain anchor and its quadratic weight.
    """

    def __init__(self, y, mask, spec: WaveletSpec = WaveletSpec(), lam: float = 1e-5,
                 p: float = 0.8, lipschitz: float | None = None, anchor=None,
                 anchor_weight: float = 0.0):
        y = np.asarray(as_array(y), dtype=np.complex128)
        m = np.asarray(as_array(mask), dtype=bool)
        validate_shapes(y, m)
        spec.check_shape(y.shape)
        if lam < 0 or not 0 < p <= 1:
            raise ConfigError(f"need lam >= 0 and p in (0, 1], got lam={lam}, p={p}")
        if anchor_weight < 0:
            raise ConfigError("anchor_weight must be nonnegative")
        self.mask = m
        self.y = np.where(m, y, 0)
        self.spec = spec
        self.lam = float(lam)
        self.p = float(p)
        self.anchor_weight = float(anchor_weight)
        if anchor is not None:
            anchor = np.asarray(as_array(anchor), dtype=np.complex128)
            validate_shapes(anchor, m)
        elif anchor_weight:
            raise ConfigError("anchor_weight given without an anchor image")
        self.anchor = anchor
        self._anchor_k = fft_centered(anchor) if anchor is not None else None
        bound = 1.0 + self.anchor_weight
        self.lipschitz = bound if lipschitz is None else float(lipschitz)
        if self.lipschitz < bound * (1 - 1e-12):
            raise ConfigError(
                f"lipschitz={self.lipschitz} is below the provable bound {bound}"
            )

    def _check(self, alpha) -> np.ndarray:
        a = as_array(alpha)
        if a.shape != self.mask.shape:
            raise ShapeError(f"code shape {a.shape} does not match problem {self.mask.shape}")
        return a

    def residual(self, alpha) -> np.ndarray:
        """``P F A alpha - y`` on the full grid."""
        k = fft_centered(wavelet_synthesize(self._check(alpha), self.spec))
        return np.where(self.mask, k - self.y, 0)

    def eval_f(self, alpha) -> float:
        a = self._check(alpha)
        img = wavelet_synthesize(a, self.spec)
        r = np.where(self.mask, fft_centered(img) - self.y, 0)
        val = 0.5 * np.vdot(r, r).real
        if self.anchor_weight:
            d = img - self.anchor
            val += 0.5 * self.anchor_weight * np.vdot(d, d).real
        return float(val)

    def grad_f(self, alpha) -> np.ndarray:
        a = self._check(alpha)
        k = fft_centered(wavelet_synthesize(a, self.spec))
        kgrad = np.where(self.mask, k - self.y, 0)
        if self.anchor_weight:
            kgrad = kgrad + self.anchor_weight * (k - self._anchor_k)
        return wavelet_analyze(ifft_centered(kgrad), self.spec)

    def eval_g(self, alpha) -> float:
        return lp_penalty(self._check(alpha), self.lam, self.p)

    def eval_phi(self, alpha) -> float:
        return self.eval_f(alpha) + self.eval_g(alpha)

    __call__ = eval_phi

    def exact_fit(self) -> np.ndarray:
        """Code of the zero-filled image; minimizes ``f`` when the mask is full."""
        return wavelet_analyze(ifft_centered(self.y), self.spec)
