"""Checked proximal CS-MRI reconstruction."""

from ._kernels import BACKEND
from .core import DescentViolation, SolverConfig
from .masks import make_mask
from .metrics import mse, psnr, rlne
from .rician import RicianParams, RicianSolverConfig, solve_rician
from .simulate import corrupt, phantom
from .solver import solve

__version__ = "0.1.0"

__all__ = ["BACKEND", "DescentViolation", "SolverConfig", "make_mask", "mse", "psnr", "rlne",
           "RicianParams", "RicianSolverConfig", "solve_rician", "corrupt", "phantom", "solve"]
