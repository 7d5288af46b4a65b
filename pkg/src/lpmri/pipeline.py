"""Stage operators of the checked scheme and the denoiser plug-ins.

One outer iteration maps ``alpha^k`` to ``alpha^{k+1}`` through

* :func:`fidelity_step`: closed-form proximal data-consistency update,
* a denoiser applied in the image domain,
* :func:`momentum_prox` and :func:`check`: accept the denoiser output only
  when it satisfies the first-order error condition,
* :func:`prior_step`: one lp proximal-gradient step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from .core import ConfigError, DescentViolation, LpmriError, SolverConfig
from .objective import Objective
from .proximal import prox_lp
from .transforms import (
    WaveletSpec,
    fft_centered,
    ifft_centered,
    wavelet_analyze,
    wavelet_synthesize,
)

__all__ = [
    "DenoiserError",
    "Denoiser",
    "IdentityDenoiser",
    "GaussianDenoiser",
    "WaveletThresholdDenoiser",
    "MedianDenoiser",
    "RandomDenoiser",
    "register_denoiser",
    "make_denoiser",
    "available_denoisers",
    "denoise",
    "CheckOutcome",
    "fidelity_step",
    "momentum_prox",
    "check",
    "prior_step",
    "descent_slack",
]

RELATIVE_SLACK = 1e-9
ABSOLUTE_SLACK = 1e-13


def descent_slack(reference: float) -> float:
    """Numerical allowance for a descent inequality anchored at ``reference``."""
    return RELATIVE_SLACK * abs(reference) + ABSOLUTE_SLACK


class DenoiserError(LpmriError, RuntimeError):
    """A denoiser plug-in returned an output violating its contract."""


# ---------------------------------------------------------------- denoisers


class Denoiser:
    """Image-to-image map used as the data-driven stage.

    Subclasses implement :meth:`apply`. ``k`` is the outer iteration index,
    which lets a plug-in follow a per-iteration strength schedule.
    """

    name = "base"

    def apply(self, image: np.ndarray, k: int) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, image: np.ndarray, k: int = 0) -> np.ndarray:
        return self.apply(image, k)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"


@dataclass(frozen=True)
class LevelSchedule:
    """Linear noise-level schedule, on the 0-255 intensity convention."""

    start: float = 50.0
    stop: float = 3.0
    steps: int = 50

    def level(self, k: int) -> float:
        if self.steps <= 1:
            return self.stop
        t = min(max(k, 0), self.steps - 1) / (self.steps - 1)
        return self.start + (self.stop - self.start) * t


class IdentityDenoiser(Denoiser):
    name = "identity"

    def apply(self, image, k):
        return np.array(image, copy=True)


class GaussianDenoiser(Denoiser):
    """Separable Gaussian blur of real and imaginary parts."""

    name = "gaussian"

    def __init__(self, sigma: float = 0.7):
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        self.sigma = float(sigma)

    def apply(self, image, k):
        image = np.asarray(image)
        if self.sigma == 0:
            return image.copy()
        blur = lambda a: ndimage.gaussian_filter(a, self.sigma, mode="reflect")
        if np.iscomplexobj(image):
            return blur(image.real) + 1j * blur(image.imag)
        return blur(image.astype(np.float64))


class WaveletThresholdDenoiser(Denoiser):
    """Complex soft-thresholding of the wavelet detail bands.

    With a ``schedule`` the threshold at iteration ``k`` is
    ``schedule.level(k) / 255`` (images are assumed scaled to [0, 1]).
    """

    name = "wavelet"

    def __init__(self, threshold: float = 0.02, family: str = "db4", levels: int = 3,
                 schedule: LevelSchedule | None = None):
        if threshold < 0:
            raise ValueError("threshold must be nonnegative")
        self.threshold = float(threshold)
        self.family = family
        self.levels = levels
        self.schedule = schedule

    def threshold_at(self, k: int) -> float:
        if self.schedule is not None:
            return self.schedule.level(k) / 255.0
        return self.threshold

    def apply(self, image, k):
        image = np.asarray(image, dtype=np.complex128)
        spec = WaveletSpec.for_size(image.shape[0], self.family, self.levels)
        c = wavelet_analyze(image, spec)
        t = self.threshold_at(k)
        if t > 0:
            n = image.shape[0] >> spec.levels
            approx = c[:n, :n].copy()
            mag = np.abs(c)
            scale = np.where(mag > t, 1 - t / np.where(mag > 0, mag, 1), 0.0)
            c = c * scale
            c[:n, :n] = approx
        return wavelet_synthesize(c, spec)


class MedianDenoiser(Denoiser):
    """3x3 median filter on the magnitude; the phase is passed through."""

    name = "median"

    def __init__(self, size: int = 3):
        self.size = int(size)

    def apply(self, image, k):
        image = np.asarray(image)
        mag = np.abs(image)
        med = ndimage.median_filter(mag, size=self.size, mode="reflect")
        phase = np.exp(1j * np.angle(image)) if np.iscomplexobj(image) else 1.0
        return med * phase


class RandomDenoiser(Denoiser):
    """Adversarial plug-in: ignores its input and returns complex noise.

    The noise RMS matches the input RMS so the output is plausible in scale.
    Draws depend only on ``(seed, k)``, which keeps runs reproducible.
    """

    name = "random"

    def __init__(self, seed: int = 0):
        self.seed = int(seed)

    def apply(self, image, k):
        image = np.asarray(image)
        rng = np.random.default_rng([self.seed, int(k)])
        rms = np.sqrt(np.mean(np.abs(image) ** 2)) or 1.0
        noise = rng.standard_normal(image.shape) + 1j * rng.standard_normal(image.shape)
        return noise * (rms / np.sqrt(2))


class CallableDenoiser(Denoiser):
    """Wrap a plain function ``f(image) -> image`` or ``f(image, k) -> image``."""

    def __init__(self, fn: Callable, name: str = "callable", takes_k: bool = False):
        self.fn = fn
        self.name = name
        self.takes_k = takes_k

    def apply(self, image, k):
        return self.fn(image, k) if self.takes_k else self.fn(image)


_REGISTRY: dict[str, Callable[..., Denoiser]] = {}


def register_denoiser(name: str, factory: Callable[..., Denoiser]) -> None:
    """Make ``factory`` available under ``name`` (e.g. for ``--denoiser``)."""
    _REGISTRY[name] = factory


def available_denoisers() -> list[str]:
    return sorted(_REGISTRY)


def make_denoiser(name: str | Denoiser, **params) -> Denoiser:
    if isinstance(name, Denoiser):
        return name
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown denoiser {name!r}; "
                         f"available: {', '.join(available_denoisers())}") from None
    return factory(**params)


for _cls in (IdentityDenoiser, GaussianDenoiser, WaveletThresholdDenoiser,
             MedianDenoiser, RandomDenoiser):
    register_denoiser(_cls.name, _cls)


def denoise(image, denoiser: Denoiser, k: int = 0) -> np.ndarray:
    """Run a plug-in and enforce its contract (same shape, finite output)."""
    image = np.asarray(image)
    out = np.asarray(denoiser(image, k))
    if out.shape != image.shape:
        raise DenoiserError(
            f"denoiser {denoiser.name!r} changed shape {image.shape} -> {out.shape}"
        )
    if not np.all(np.isfinite(out)):
        raise DenoiserError(f"denoiser {denoiser.name!r} produced non-finite values")
    return out.astype(np.complex128, copy=False)


# ---------------------------------------------------------------- stages


def fidelity_step(alpha_k, obj: Objective, rho: float) -> np.ndarray:
    """Exact minimizer of ``f(u) + rho/2 ||u - alpha_k||^2``.

    In k-space the normal matrix is diagonal: sampled entries are divided by
    ``1 + rho`` and unsampled ones by ``rho`` (each shifted by the anchor
    weight when the objective carries an anchor term).
    """
    if not rho > 0:
        raise ConfigError(f"rho must be positive, got {rho}")
    spec = obj.spec
    k_alpha = fft_centered(wavelet_synthesize(alpha_k, spec))
    rhs = obj.y + rho * k_alpha
    diag = obj.mask.astype(np.float64) + rho
    if obj.anchor_weight:
        rhs = rhs + obj.anchor_weight * obj._anchor_k
        diag = diag + obj.anchor_weight
    return wavelet_analyze(ifft_centered(rhs / diag), spec)


def momentum_prox(v, alpha_k, cfg: SolverConfig, obj: Objective) -> np.ndarray:
    """``prox_{eta1*lam}(v - eta1 * (grad f(v) + rho (v - alpha_k)))``."""
    v = np.asarray(v)
    alpha_k = np.asarray(alpha_k)
    point = v - cfg.eta1 * (obj.grad_f(v) + cfg.rho_momentum * (v - alpha_k))
    return prox_lp(point, tau=cfg.eta1 * obj.lam, p=obj.p)


@dataclass
class CheckOutcome:
    chosen: np.ndarray
    accepted: bool
    beta: np.ndarray
    lhs: float
    rhs: float
    c_k: float


def check(v, beta, alpha_k, eps_k: float, cfg: SolverConfig) -> CheckOutcome:
    """Accept ``beta`` iff the denoiser output passes the error condition.

    The default form is ``||v - alpha_k|| <= eps_k ||beta - alpha_k||``, the
    bound under which the descent estimate is proved. ``cfg.check_form='alternate'``
    switches to ``||v - beta|| <= eps_k ||alpha_k - beta||`` for ablations;
    that form carries no descent guarantee.
    """
    if not eps_k > 0:
        raise ConfigError(f"eps_k must be positive, got {eps_k}")
    c_k = (1.0 / (2 * cfg.eta1) - cfg.lipschitz / 2
           - (cfg.lipschitz + abs(cfg.rho_momentum - 1.0 / cfg.eta1)) * eps_k)
    if cfg.guaranteed and not c_k > 0:
        raise ConfigError(f"descent constant C^k={c_k:.6g} is not positive")
    v, beta, alpha_k = np.asarray(v), np.asarray(beta), np.asarray(alpha_k)
    if cfg.check_form == "descent":
        lhs = float(np.linalg.norm(v - alpha_k))
        rhs = eps_k * float(np.linalg.norm(beta - alpha_k))
    else:
        lhs = float(np.linalg.norm(v - beta))
        rhs = eps_k * float(np.linalg.norm(alpha_k - beta))
    accepted = lhs <= rhs
    chosen = beta if accepted else alpha_k
    return CheckOutcome(chosen=chosen, accepted=accepted, beta=beta, lhs=lhs, rhs=rhs,
                        c_k=c_k)


def prior_step(w, cfg: SolverConfig, obj: Objective, *, verify: bool = True,
               phi_w: float | None = None) -> np.ndarray:
    """One proximal-gradient step ``prox_{eta2*lam}(w - eta2 grad f(w))``.

    With ``verify`` (and a guaranteed configuration) the sufficient-decrease
    inequality ``Phi(out) <= Phi(w) - (1/(2 eta2) - L/2) ||out - w||^2`` is
    checked and :class:`DescentViolation` raised if it fails.
    """
    w = np.asarray(w)
    out = prox_lp(w - cfg.eta2 * obj.grad_f(w), tau=cfg.eta2 * obj.lam, p=obj.p)
    if verify and cfg.guaranteed:
        if phi_w is None:
            phi_w = obj.eval_phi(w)
        phi_new = obj.eval_phi(out)
        gap = cfg.prior_descent_constant * float(np.sum(np.abs(out - w) ** 2))
        if phi_new > phi_w - gap + descent_slack(phi_w):
            raise DescentViolation(
                f"prior step increased the energy: Phi(new)={phi_new:.17g}, "
                f"Phi(w)={phi_w:.17g}, required decrease {gap:.3g}"
            )
    return out
