"""Reconstruction quality metrics. Complex inputs are reduced to magnitude."""

from __future__ import annotations

import math

import numpy as np

from .core import as_array, validate_shapes

__all__ = ["PSNR_CAP", "mse", "psnr", "rlne"]

PSNR_CAP = 99.0


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    validate_shapes(a, b)
    a, b = as_array(a), as_array(b)
    if np.iscomplexobj(a):
        a = np.abs(a)
    if np.iscomplexobj(b):
        b = np.abs(b)
    return a.astype(np.float64), b.astype(np.float64)


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def psnr(ref, rec, peak: float | None = None, *, with_flag: bool = False):
    """Peak signal-to-noise ratio in dB.

    ``peak`` defaults to the maximum of ``ref``. Identical images give
    :data:`PSNR_CAP`; pass ``with_flag=True`` to also get a bool telling
    whether the cap was applied.
    """
    ref, rec = _pair(ref, rec)
    if peak is None:
        peak = float(ref.max())
    if not peak > 0:
        raise ValueError(f"peak must be positive, got {peak}")
    err = float(np.mean((ref - rec) ** 2))
    capped = err == 0.0
    value = PSNR_CAP if capped else 10.0 * math.log10(peak * peak / err)
    return (value, capped) if with_flag else value


def rlne(ref, rec) -> float:
    """Relative l2 error ``||rec - ref|| / ||ref||``."""
    ref, rec = _pair(ref, rec)
    denom = float(np.linalg.norm(ref))
    if denom == 0:
        raise ValueError("RLNE is undefined for an all-zero reference")
    return float(np.linalg.norm(rec - ref)) / denom
