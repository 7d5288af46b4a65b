"""Proximal operator of the nonconvex lp penalty, 0 < p <= 1.

For a scalar ``v >= 0`` the prox solves ``min_{x>=0} tau*x**p + (x-v)**2/2``.
Below the generalized threshold

    tau* = t + tau*p*t**(p-1),   t = (2*tau*(1-p))**(1/(2-p))

the minimizer is 0. Above it the minimizer is the larger root of
``x - v + tau*p*x**(p-1) = 0``, found by Newton's method started at ``v``
(the left-hand side is convex and increasing there, so the iterates decrease
monotonically onto the root). Inputs exactly at the threshold map to 0.

Complex inputs are shrunk in modulus with their phase kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import as_array

__all__ = ["ProxParams", "prox_lp_scalar", "prox_lp", "lp_threshold", "prox_objective"]


@dataclass(frozen=True)
class ProxParams:
    tau: float
    p: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 0 < self.p <= 1:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")


def lp_threshold(params: ProxParams) -> float:
    return float(_kernels.lp_threshold(params.tau, params.p))


def prox_lp_scalar(v: float, params: ProxParams) -> float:
    if v < 0:
        raise ValueError(f"scalar prox expects v >= 0, got {v}")
    return float(_kernels.prox_lp_modulus(np.array([v], dtype=np.float64),
                                          params.tau, params.p)[0])


def prox_lp(v, params: ProxParams | None = None, *, tau: float | None = None,
            p: float | None = None) -> np.ndarray:
    """Elementwise lp prox of a real or complex array.

    Either pass ``params`` or the keywords ``tau`` and ``p``. ``tau = 0`` is
    accepted and returns the input unchanged.
    """
    if params is not None:
        tau, p = params.tau, params.p
    arr = np.asarray(as_array(v))
    if tau == 0:
        return arr.copy()
    mag = np.abs(arr)
    shrunk = _kernels.prox_lp_modulus(mag.ravel(), tau, p).reshape(arr.shape)
    out = np.zeros_like(arr, dtype=np.result_type(arr.dtype, np.float64))
    nz = shrunk > 0
    out[nz] = arr[nz] * (shrunk[nz] / mag[nz])
    return out


def prox_objective(x, v, tau: float, p: float) -> float:
    """Value of ``tau*sum|x|^p + ||x - v||^2 / 2`` (used by audits and tests)."""
    x = np.asarray(x)
    mag = np.abs(x)
    return float(tau * np.sum(mag[mag > 0] ** p) + 0.5 * np.sum(np.abs(x - v) ** 2))
