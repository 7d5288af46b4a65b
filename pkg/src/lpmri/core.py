"""Domain types shared across the package.

Images are carried as plain 2-D numpy arrays inside small frozen wrappers.
Every wrapper implements ``__array__`` so that the numerical routines accept
either the wrapper or a bare ndarray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

__all__ = [
    "LpmriError",
    "ShapeError",
    "ConfigError",
    "DescentViolation",
    "RealImage",
    "ComplexImage",
    "SparseCode",
    "SamplingMask",
    "SolverConfig",
    "TraceRecord",
    "IterateTrace",
    "validate_shapes",
    "is_power_of_two",
    "as_array",
]


class LpmriError(Exception):
    """Base class for all package errors."""


class ShapeError(LpmriError, ValueError):
    """Raised when array dimensions are inconsistent or unsupported."""


class ConfigError(LpmriError, ValueError):
    """Raised for invalid hyperparameters."""


class DescentViolation(LpmriError, RuntimeError):
    """A monotonicity guarantee was broken beyond numerical slack.

    The convergence theory makes this impossible for a correct prox and
    gradient, so it is treated as a bug trap rather than a warning.
    """


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def as_array(x) -> np.ndarray:
    """Unwrap a domain type (or pass through an array-like) as an ndarray."""
    if isinstance(x, (RealImage, ComplexImage, SparseCode)):
        return x.data
    if isinstance(x, SamplingMask):
        return x.indicator
    return np.asarray(x)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def _check_grid(data: np.ndarray, what: str, square_pow2: bool) -> None:
    if data.ndim != 2:
        raise ShapeError(f"{what} must be 2-D, got shape {data.shape}")
    h, w = data.shape
    if h < 1 or w < 1:
        raise ShapeError(f"{what} must have positive dimensions, got {data.shape}")
    if square_pow2 and (h != w or not is_power_of_two(h)):
        raise ShapeError(
            f"{what} must be square with power-of-two side, got {h}x{w}"
        )
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{what} contains non-finite values (NaN or Inf)")


@dataclass(frozen=True)
class RealImage:
    """Real-valued H x W image (magnitude images, phantoms, Rician draws)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if np.iscomplexobj(arr):
            raise TypeError("RealImage requires real data")
        arr = arr.astype(np.float64, copy=False)
        _check_grid(arr, "RealImage", square_pow2=False)
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


@dataclass(frozen=True)
class ComplexImage:
    """Complex H x W grid in either the image or the k-space domain."""

    data: np.ndarray
    domain: Literal["image", "kspace"] = "image"

    def __post_init__(self):
        if self.domain not in ("image", "kspace"):
            raise ValueError(f"unknown domain tag {self.domain!r}")
        arr = np.asarray(self.data).astype(np.complex128, copy=False)
        _check_grid(arr, "ComplexImage", square_pow2=False)
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


@dataclass(frozen=True)
class SparseCode:
    """Wavelet coefficients of an image, stored on the image grid."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data).astype(np.complex128, copy=False)
        _check_grid(arr, "SparseCode", square_pow2=False)
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


@dataclass(frozen=True)
class SamplingMask:
    """Binary indicator of acquired k-space locations (centered layout)."""

    indicator: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.indicator)
        if arr.ndim != 2 or min(arr.shape) < 1:
            raise ShapeError(f"mask must be a non-empty 2-D array, got {arr.shape}")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("mask entries must be 0 or 1")
        arr = arr.astype(bool)
        if not arr.any():
            raise ValueError("mask samples no k-space locations")
        object.__setattr__(self, "indicator", _frozen(arr))

    @property
    def shape(self) -> tuple[int, int]:
        return self.indicator.shape

    @property
    def height(self) -> int:
        return self.indicator.shape[0]

    @property
    def width(self) -> int:
        return self.indicator.shape[1]

    @property
    def ratio(self) -> float:
        return float(self.indicator.sum()) / self.indicator.size

    @classmethod
    def full(cls, h: int, w: int) -> SamplingMask:
        return cls(np.ones((h, w), dtype=bool))

    def __array__(self, dtype=None, copy=None):
        return self.indicator if dtype is None else self.indicator.astype(dtype)


def validate_shapes(a, b) -> None:
    """Raise :class:`ShapeError` unless ``a`` and ``b`` have equal 2-D shapes."""
    sa = np.shape(as_array(a))
    sb = np.shape(as_array(b))
    if sa != sb:
        raise ShapeError(f"dimension mismatch: {_shape_str(sa)} vs {_shape_str(sb)}")


def _shape_str(shape: tuple) -> str:
    return "x".join(str(n) for n in shape) if shape else "scalar"


@dataclass(frozen=True)
class SolverConfig:
    """Scalar hyperparameters of the checked proximal scheme.

    ``epsilon0=None`` picks the largest tolerance that keeps the descent
    constant ``C^0`` at or above 10% of its ``epsilon = 0`` value.

    With ``guaranteed=False`` the step-size preconditions are not enforced
    and the runtime descent assertions are disabled; this exists only to
    replay non-guaranteed settings such as :meth:`large_step_preset`.
    """

    lam: float = 1e-5
    p: float = 0.8
    rho: float = 5.0
    eta1: float | None = None
    eta2: float | None = None
    lipschitz: float = 1.0
    epsilon0: float | None = None
    epsilon_decay: float = 1.0
    tol: float = 1e-4
    max_iters: int = 50
    wavelet: str = "db4"
    wavelet_levels: int = 3
    check_form: Literal["descent", "alternate"] = "descent"
    rho_momentum: float | None = None
    guaranteed: bool = True

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ConfigError(f"lam must be a finite nonnegative number, got {self.lam}")
        if not (0 < self.p <= 1):
            raise ConfigError(f"p must lie in (0, 1], got {self.p}")
        if not self.rho > 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        if not self.lipschitz > 0:
            raise ConfigError(f"lipschitz must be positive, got {self.lipschitz}")
        if self.eta1 is None:
            object.__setattr__(self, "eta1", 0.9 / self.lipschitz)
        if self.eta2 is None:
            object.__setattr__(self, "eta2", 0.9 / self.lipschitz)
        if self.rho_momentum is None:
            object.__setattr__(self, "rho_momentum", self.rho)
        if not (self.eta1 > 0 and self.eta2 > 0):
            raise ConfigError("step sizes eta1, eta2 must be positive")
        if not (0 < self.epsilon_decay <= 1):
            raise ConfigError(f"epsilon_decay must lie in (0, 1], got {self.epsilon_decay}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ConfigError(f"max_iters must be a positive integer, got {self.max_iters}")
        if int(self.wavelet_levels) != self.wavelet_levels or self.wavelet_levels < 1:
            raise ConfigError(f"wavelet_levels must be a positive integer, got {self.wavelet_levels}")
        if self.check_form not in ("descent", "alternate"):
            raise ConfigError(
                f"check_form must be 'descent' or 'alternate', got {self.check_form!r}")
        if self.epsilon0 is None:
            slack = 1.0 / (2 * self.eta1) - self.lipschitz / 2
            coupling = self.lipschitz + abs(self.rho_momentum - 1.0 / self.eta1)
            object.__setattr__(self, "epsilon0", max(0.9 * slack / coupling, 1e-12))
        if not self.epsilon0 > 0:
            raise ConfigError(f"epsilon0 must be positive, got {self.epsilon0}")
        if self.guaranteed:
            if not self.eta2 < 1.0 / self.lipschitz:
                raise ConfigError(
                    f"eta2={self.eta2} must be < 1/lipschitz={1.0 / self.lipschitz} "
                    "for the prior step to be a descent step"
                )
            c0 = self.c_k(0)
            if not c0 > 0:
                raise ConfigError(
                    f"descent constant C^0={c0:.6g} is not positive; "
                    "reduce eta1 or epsilon0"
                )

    @classmethod
    def large_step_preset(cls, **overrides) -> SolverConfig:
        """Large steps ``eta1 = eta2 = 2/L`` with ``L = 1.1`` and ``epsilon0 = 0.1``.

        These violate ``eta2 < 1/L`` so no descent guarantee applies.
        """
        kw = dict(lam=1e-5, p=0.8, rho=5.0, lipschitz=1.1, eta1=2 / 1.1,
                  eta2=2 / 1.1, epsilon0=0.1, guaranteed=False)
        kw.update(overrides)
        return cls(**kw)

    def epsilon(self, k: int) -> float:
        return self.epsilon0 * self.epsilon_decay ** k

    def c_k(self, k: int) -> float:
        """Per-iteration descent constant of the checked momentum step."""
        return (1.0 / (2 * self.eta1) - self.lipschitz / 2
                - (self.lipschitz + abs(self.rho_momentum - 1.0 / self.eta1))
                * self.epsilon(k))

    @property
    def prior_descent_constant(self) -> float:
        return 1.0 / (2 * self.eta2) - self.lipschitz / 2

    def replace(self, **changes) -> SolverConfig:
        from dataclasses import asdict

        kw = asdict(self)
        # derived defaults must be recomputed when their inputs change
        if "lipschitz" in changes:
            for key in ("eta1", "eta2"):
                if key not in changes:
                    kw[key] = None
        if any(k in changes for k in ("eta1", "rho", "rho_momentum", "lipschitz")) \
                and "epsilon0" not in changes:
            kw["epsilon0"] = None
        if "rho" in changes and "rho_momentum" not in changes:
            kw["rho_momentum"] = None
        kw.update(changes)
        return SolverConfig(**kw)


@dataclass
class TraceRecord:
    k: int
    phi: float
    phi_w: float = math.nan
    accepted: bool | None = None
    step_norm: float = math.nan
    c_k: float = math.nan
    rel_change: float = math.nan


@dataclass
class IterateTrace:
    """Per-iteration history; row ``k`` describes the iterate ``alpha^k``.

    Row 0 holds the initial point only. For ``k >= 1``, ``phi_w`` is the
    objective at the checked point ``w^k`` and ``step_norm`` is
    ``||alpha^k - w^k||``.
    """

    records: list[TraceRecord] = field(default_factory=list)

    def append(self, rec: TraceRecord) -> None:
        self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def phi(self) -> np.ndarray:
        return self.column("phi")

    def acceptance_rate(self) -> float:
        flags = [r.accepted for r in self.records if r.accepted is not None]
        return float(np.mean(flags)) if flags else math.nan

    CSV_COLUMNS = ("k", "phi", "phi_w", "accepted", "step_norm", "c_k", "rel_change")

    def to_csv(self, path_or_file) -> None:
        """Write the trace as CSV with 17 significant digits, '.' decimal."""
        lines = [",".join(self.CSV_COLUMNS)]
        for r in self.records:
            acc = "" if r.accepted is None else str(int(r.accepted))
            cells = [str(r.k), _fmt(r.phi), _fmt(r.phi_w), acc,
                     _fmt(r.step_norm), _fmt(r.c_k), _fmt(r.rel_change)]
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w", newline="") as fh:
                fh.write(text)


def _fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".17g")
