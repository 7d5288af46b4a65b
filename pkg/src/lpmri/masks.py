"""Cartesian, radial and Gaussian variable-density k-space masks.

Masks use the centered layout: the DC sample sits at ``(h // 2, w // 2)``.
"""

from __future__ import annotations

import math

import numpy as np

from .core import SamplingMask

__all__ = ["cartesian_mask", "radial_mask", "gaussian_mask", "make_mask", "MASKS",
           "bresenham"]

CARTESIAN_CENTER_FRACTION = 0.32


def _check_ratio(ratio: float) -> None:
    if not (0 < ratio <= 1):
        raise ValueError(f"sampling ratio must lie in (0, 1], got {ratio}")


def cartesian_mask(h: int, w: int, ratio: float, seed: int = 0) -> SamplingMask:
    """Fully sampled phase-encode rows: a central band plus random rows.

    The band holds ``ceil(0.32 * ratio * h)`` rows; the rest of the
    ``floor(ratio * h)`` rows are drawn uniformly from the remaining ones.
    """
    _check_ratio(ratio)
    total = max(1, min(h, math.floor(ratio * h + 1e-9)))
    band = min(total, math.ceil(CARTESIAN_CENTER_FRACTION * ratio * h - 1e-9))
    band = max(band, 1)
    start = h // 2 - band // 2
    rows = set(range(start, start + band))
    rest = np.array([r for r in range(h) if r not in rows])
    rng = np.random.default_rng(seed)
    extra = rng.choice(rest, size=total - band, replace=False) if total > band else []
    rows.update(int(r) for r in extra)
    m = np.zeros((h, w), dtype=bool)
    m[sorted(rows), :] = True
    return SamplingMask(m)


def bresenham(r0: int, c0: int, r1: int, c1: int) -> list[tuple[int, int]]:
    """Integer raster of the segment from ``(r0, c0)`` to ``(r1, c1)``."""
    pts = []
    dr, dc = abs(r1 - r0), abs(c1 - c0)
    sr = 1 if r1 >= r0 else -1
    sc = 1 if c1 >= c0 else -1
    err = dc - dr
    r, c = r0, c0
    while True:
        pts.append((r, c))
        if r == r1 and c == c1:
            break
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr
    return pts


def _boundary_point(h: int, w: int, cr: int, cc: int, theta: float) -> tuple[int, int]:
    """Last grid point hit by the ray from the center at angle ``theta``."""
    dr, dc = -math.sin(theta), math.cos(theta)
    ts = []
    if dc > 1e-12:
        ts.append((w - 1 - cc) / dc)
    elif dc < -1e-12:
        ts.append(-cc / dc)
    if dr > 1e-12:
        ts.append((h - 1 - cr) / dr)
    elif dr < -1e-12:
        ts.append(-cr / dr)
    t = min(ts)
    r = min(max(int(round(cr + t * dr)), 0), h - 1)
    c = min(max(int(round(cc + t * dc)), 0), w - 1)
    return r, c


def _spokes(h: int, w: int, n: int, offset: float = 0.0) -> np.ndarray:
    m = np.zeros((h, w), dtype=bool)
    cr, cc = h // 2, w // 2
    m[cr, cc] = True
    for i in range(n):
        theta = offset + math.pi * i / n
        for ang in (theta, theta + math.pi):
            r, c = _boundary_point(h, w, cr, cc, ang)
            for pr, pc in bresenham(cr, cc, r, c):
                m[pr, pc] = True
    return m


def radial_mask(h: int, w: int, ratio: float, seed: int = 0,
                tolerance: float = 0.01) -> SamplingMask:
    """Rasterized spokes through the center at uniformly spaced angles.

    The spoke count is chosen by bisection so the achieved ratio is as close
    to ``ratio`` as possible (within ``tolerance`` on reasonably sized grids).
    ``seed`` rotates the whole pattern by a random angle smaller than the
    spoke spacing; ``seed=0`` keeps a spoke at angle 0.
    """
    _check_ratio(ratio)
    if ratio >= 1:
        return SamplingMask.full(h, w)
    rng = np.random.default_rng(seed)

    def build(n):
        offset = 0.0 if seed == 0 else rng_offset * math.pi / n
        return _spokes(h, w, n, offset)

    rng_offset = float(rng.random())
    lo, hi = 1, 4 * (h + w)
    while lo < hi:
        mid = (lo + hi) // 2
        if build(mid).mean() < ratio:
            lo = mid + 1
        else:
            hi = mid
    best = min((build(n) for n in {max(1, lo - 1), lo}),
               key=lambda m: abs(m.mean() - ratio))
    return SamplingMask(best)


def _gaussian_density(h: int, w: int, s: float) -> np.ndarray:
    rr = np.arange(h)[:, None] - h // 2
    cc = np.arange(w)[None, :] - w // 2
    return np.exp(-(rr ** 2 + cc ** 2) / (2.0 * s * s))


def gaussian_mask(h: int, w: int, ratio: float, seed: int = 0) -> SamplingMask:
    """Variable-density random mask with exactly ``floor(ratio*h*w)`` samples.

    Selection probability is proportional to ``exp(-r^2 / (2 s^2))`` with
    ``s`` calibrated so that the probabilities sum to the target count. The
    exact count is obtained by weighted sampling without replacement
    (exponential-key ranking); the DC location is always included.
    """
    _check_ratio(ratio)
    count = max(1, math.floor(ratio * h * w + 1e-9))
    if count >= h * w:
        return SamplingMask.full(h, w)
    lo, hi = 1e-3, 10.0 * max(h, w)
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if _gaussian_density(h, w, mid).sum() < count:
            lo = mid
        else:
            hi = mid
    prob = _gaussian_density(h, w, hi).ravel()
    rng = np.random.default_rng(seed)
    u = rng.random(prob.size)
    keys = np.log(u) / prob
    dc = (h // 2) * w + w // 2
    keys[dc] = np.inf
    chosen = np.argsort(-keys, kind="stable")[:count]
    m = np.zeros(h * w, dtype=bool)
    m[chosen] = True
    return SamplingMask(m.reshape(h, w))


MASKS = {"cartesian": cartesian_mask, "radial": radial_mask, "gaussian": gaussian_mask}


def make_mask(kind: str, h: int, w: int, ratio: float, seed: int = 0) -> SamplingMask:
    try:
        fn = MASKS[kind]
    except KeyError:
        raise ValueError(f"unknown mask kind {kind!r}; choose from {sorted(MASKS)}") from None
    return fn(h, w, ratio, seed)
