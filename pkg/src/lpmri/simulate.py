"""Synthetic test data: phantoms and k-space corruption."""

from __future__ import annotations

import math

import numpy as np

from .core import RealImage, ShapeError, as_array, is_power_of_two, validate_shapes
from .transforms import fft_centered

__all__ = ["SHEPP_LOGAN_ELLIPSES", "shepp_logan", "blocks", "phantom", "corrupt",
           "ellipse_sum"]

# Modified Shepp-Logan (Toft): intensity, semi-axis a, semi-axis b, x0, y0, angle [deg]
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.8, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.1, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.1, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.1, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.1, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
)


def _pixel_coords(n: int) -> tuple[np.ndarray, np.ndarray]:
    # pixel centers on [-1, 1]; row 0 is the top (y = +1)
    t = (np.arange(n) + 0.5) / n * 2 - 1
    return t[None, :], -t[:, None]


def ellipse_sum(x, y) -> np.ndarray:
    """Unclipped sum of ellipse intensities at coordinates ``(x, y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape)
    for val, a, b, x0, y0, deg in SHEPP_LOGAN_ELLIPSES:
        th = math.radians(deg)
        dx, dy = x - x0, y - y0
        xr = dx * math.cos(th) + dy * math.sin(th)
        yr = -dx * math.sin(th) + dy * math.cos(th)
        out = out + val * ((xr / a) ** 2 + (yr / b) ** 2 <= 1.0)
    return out


def shepp_logan(n: int) -> np.ndarray:
    x, y = _pixel_coords(n)
    return np.clip(ellipse_sum(x, y), 0.0, 1.0)


def blocks(n: int) -> np.ndarray:
    """Piecewise-constant test image of nested rectangles on [0, 1]."""
    img = np.zeros((n, n))
    q = n // 8
    img[q:n - q, q:n - q] = 0.4
    img[2 * q:4 * q, 2 * q:5 * q] = 1.0
    img[5 * q:6 * q, 3 * q:6 * q] = 0.7
    img[2 * q:3 * q, 6 * q:7 * q] = 0.0
    return img


def phantom(size: int, kind: str = "shepp-logan") -> RealImage:
    if not (is_power_of_two(size) and size >= 32):
        raise ShapeError(f"phantom size must be a power of two >= 32, got {size}")
    if kind == "shepp-logan":
        return RealImage(shepp_logan(size))
    if kind == "blocks":
        return RealImage(blocks(size))
    raise ValueError(f"unknown phantom kind {kind!r}")


def corrupt(x, mask, rician=None) -> np.ndarray:
    """Simulated acquisition ``P F x``; Rician noise is applied to ``x`` first.

    ``rician`` is an optional :class:`lpmri.rician.RicianParams`.
    """
    img = as_array(x)
    validate_shapes(img, mask)
    if rician is not None:
        from .rician import add_rician

        img = as_array(add_rician(img, rician))
    return np.where(as_array(mask), fft_centered(img.astype(np.complex128)), 0)
