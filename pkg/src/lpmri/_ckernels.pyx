# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, exp, log, fabs, isfinite

cnp.import_array()

cdef int NEWTON_MAX_ITERS = 100
cdef double NEWTON_TOL = 1e-14


cpdef double lp_threshold(double tau, double p):
    cdef double t
    if p >= 1.0:
        return tau
    t = pow(2.0 * tau * (1.0 - p), 1.0 / (2.0 - p))
    return t + tau * p * pow(t, p - 1.0)


cdef inline double _bisect(double v, double tau, double p, double x_lb):
    cdef double lo = x_lb, hi = v, mid, h
    cdef int i
    for i in range(200):
        mid = 0.5 * (lo + hi)
        h = mid - v + tau * p * pow(mid, p - 1.0)
        if h > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


cdef double _prox_one(double v, double tau, double p, double thresh,
                      double x_lb) except -1.0:
    cdef double x, x_new, h, dh, step, scale, q
    cdef int it
    if v <= thresh:
        return 0.0
    x = v
    scale = v if v > 1.0 else 1.0
    for it in range(NEWTON_MAX_ITERS):
        # x^(p-2) via exp/log is cheaper than pow; x^(p-1) = x^(p-2) * x
        q = exp((p - 2.0) * log(x))
        h = x - v + tau * p * q * x
        dh = 1.0 + tau * p * (p - 1.0) * q
        step = h / dh
        x_new = x - step
        if not (x_new >= x_lb and x_new <= v and isfinite(x_new)):
            x = _bisect(v, tau, p, x_lb)
            break
        x = x_new
        if fabs(step) <= NEWTON_TOL * scale:
            break
    else:
        raise RuntimeError("lp prox Newton iteration did not converge")
    if tau * pow(x, p) + 0.5 * (x - v) * (x - v) < 0.5 * v * v:
        return x
    return 0.0


def prox_lp_modulus(mag, double tau, double p):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] m = np.ascontiguousarray(mag, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef double thresh, x_lb, v
    if tau <= 0.0:
        out[:] = m
        return out
    if p >= 1.0:
        for i in range(n):
            v = m[i] - tau
            out[i] = v if v > 0.0 else 0.0
        return out
    thresh = lp_threshold(tau, p)
    x_lb = pow(tau * p * (1.0 - p), 1.0 / (2.0 - p))
    for i in range(n):
        out[i] = _prox_one(m[i], tau, p, thresh, x_lb)
    return out


def dwt_rows(x, dec_lo, dec_hi):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hl = np.ascontiguousarray(dec_lo, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hh = np.ascontiguousarray(dec_hi, dtype=np.float64)
    cdef Py_ssize_t rows = a.shape[0], n = a.shape[1], half = n // 2
    cdef Py_ssize_t taps = hl.shape[0], r, k, j, idx
    cdef cnp.ndarray[cnp.float64_t, ndim=2] lo = np.zeros((rows, half), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] hi = np.zeros((rows, half), dtype=np.float64)
    cdef double sl, sh, s
    for r in range(rows):
        for k in range(half):
            sl = 0.0
            sh = 0.0
            for j in range(taps):
                idx = (2 * k + j) % n
                s = a[r, idx]
                sl += hl[j] * s
                sh += hh[j] * s
            lo[r, k] = sl
            hi[r, k] = sh
    return lo, hi


def idwt_rows(lo, hi, dec_lo, dec_hi):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] l = np.ascontiguousarray(lo, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] h = np.ascontiguousarray(hi, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hl = np.ascontiguousarray(dec_lo, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hh = np.ascontiguousarray(dec_hi, dtype=np.float64)
    cdef Py_ssize_t rows = l.shape[0], half = l.shape[1], n = 2 * half
    cdef Py_ssize_t taps = hl.shape[0], r, k, j, idx
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((rows, n), dtype=np.float64)
    for r in range(rows):
        for j in range(taps):
            for k in range(half):
                idx = (2 * k + j) % n
                out[r, idx] += hl[j] * l[r, k] + hh[j] * h[r, k]
    return out
