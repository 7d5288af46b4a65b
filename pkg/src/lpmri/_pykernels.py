"""Pure numpy implementations of the hot kernels.

Signatures mirror ``_ckernels`` exactly; :mod:`lpmri._kernels` picks one at
import time.
"""

import numpy as np

NEWTON_MAX_ITERS = 100
NEWTON_TOL = 1e-14


def lp_threshold(tau, p):
    """Smallest input magnitude for which the lp prox is nonzero."""
    if p >= 1.0:
        return tau
    t = (2.0 * tau * (1.0 - p)) ** (1.0 / (2.0 - p))
    return t + tau * p * t ** (p - 1.0)


def prox_lp_modulus(mag, tau, p):
    """Elementwise argmin over x >= 0 of ``tau*x**p + (x - v)**2 / 2``.

    ``mag`` must be a 1-D float64 array of nonnegative values.
    """
    mag = np.ascontiguousarray(mag, dtype=np.float64)
    out = np.zeros_like(mag)
    if tau <= 0.0:
        out[:] = mag
        return out
    if p >= 1.0:
        return np.maximum(mag - tau, 0.0)

    active = mag > lp_threshold(tau, p)
    if not active.any():
        return out
    v = mag[active]
    x_lb = (tau * p * (1.0 - p)) ** (1.0 / (2.0 - p))
    x = v.copy()
    todo = np.ones(v.shape, dtype=bool)
    for _ in range(NEWTON_MAX_ITERS):
        xi, vi = x[todo], v[todo]
        h = xi - vi + tau * p * xi ** (p - 1.0)
        dh = 1.0 + tau * p * (p - 1.0) * xi ** (p - 2.0)
        step = h / dh
        x_new = xi - step
        bad = ~((x_new >= x_lb) & (x_new <= vi) & np.isfinite(x_new))
        if bad.any():
            x_new[bad] = _bisect(vi[bad], tau, p, x_lb)
            step[bad] = 0.0
        x[todo] = x_new
        done = np.abs(step) <= NEWTON_TOL * np.maximum(vi, 1.0)
        idx = np.flatnonzero(todo)
        todo[idx[done]] = False
        if not todo.any():
            break
    else:
        raise RuntimeError("lp prox Newton iteration did not converge")

    keep = tau * x ** p + 0.5 * (x - v) ** 2 < 0.5 * v * v
    x[~keep] = 0.0
    out[active] = x
    return out


def _bisect(v, tau, p, x_lb):
    lo = np.full(v.shape, x_lb)
    hi = v.copy()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        h = mid - v + tau * p * mid ** (p - 1.0)
        pos = h > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    return 0.5 * (lo + hi)


def dwt_rows(x, dec_lo, dec_hi):
    """One periodic analysis stage along the last axis of a real 2-D array."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[1]
    half = n // 2
    base = 2 * np.arange(half)
    lo = np.zeros((x.shape[0], half))
    hi = np.zeros((x.shape[0], half))
    for j in range(len(dec_lo)):
        cols = x[:, (base + j) % n]
        lo += dec_lo[j] * cols
        hi += dec_hi[j] * cols
    return lo, hi


def idwt_rows(lo, hi, dec_lo, dec_hi):
    """Adjoint (= inverse, for orthonormal filters) of :func:`dwt_rows`."""
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    half = lo.shape[1]
    n = 2 * half
    base = 2 * np.arange(half)
    x = np.zeros((lo.shape[0], n))
    for j in range(len(dec_lo)):
        # for fixed j the target columns are distinct, so += is safe
        x[:, (base + j) % n] += dec_lo[j] * lo + dec_hi[j] * hi
    return x
