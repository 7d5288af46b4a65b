import numpy as np
import pytest
from scipy.optimize import brentq

from lpmri import pipeline
from lpmri.core import ConfigError, DescentViolation, SolverConfig
from lpmri.masks import radial_mask
from lpmri.metrics import psnr
from lpmri.objective import Objective
from lpmri.pipeline import RandomDenoiser
from lpmri.simulate import corrupt, phantom
from lpmri.solver import VARIANTS, ablation_variant, run_scheme, solve, solve_batch
from lpmri.transforms import WaveletSpec, fft_centered, ifft_centered, wavelet_analyze, \
    wavelet_synthesize

from conftest import crandn


def scalar_prox_oracle(v, tau, p):
    """Independent lp prox: bracketed root of the stationarity equation."""
    if v == 0:
        return 0.0
    x_lb = (tau * p * (1 - p)) ** (1 / (2 - p))
    h = lambda x: x - v + tau * p * x ** (p - 1)
    if x_lb >= v or h(v) * h(x_lb) > 0:
        return 0.0
    root = brentq(h, x_lb, v, xtol=1e-15, rtol=1e-15)
    cost = lambda x: tau * x ** p + 0.5 * (x - v) ** 2
    return root if cost(root) < cost(0.0) else 0.0


def ista_oracle(y, mask, spec, lam, p, eta, iters):
    n = mask.shape[0]
    cols = []
    for j in range(n * n):
        e = np.zeros(n * n, complex)
        e[j] = 1
        cols.append(np.where(mask, fft_centered(wavelet_synthesize(e.reshape(n, n), spec)),
                             0).ravel())
    m = np.array(cols).T
    a = wavelet_analyze(ifft_centered(y), spec).ravel()
    iterates = []
    for _ in range(iters):
        z = a - eta * (m.conj().T @ (m @ a - y.ravel()))
        mag = np.array([scalar_prox_oracle(abs(t), eta * lam, p) for t in z])
        a = np.where(mag > 0, mag * np.exp(1j * np.angle(z)), 0)
        iterates.append(a.reshape(n, n))
    return iterates


def test_prior_variant_matches_ista(rng):
    n, spec = 8, WaveletSpec("haar", 2)
    mask = rng.random((n, n)) < 0.5
    mask[n // 2, n // 2] = True
    y = np.where(mask, crandn(rng, n, n), 0)
    cfg = SolverConfig(lam=0.2, wavelet="haar", wavelet_levels=2, tol=1e-300)
    ref = ista_oracle(y, mask, spec, cfg.lam, cfg.p, cfg.eta2, 6)
    for k in range(1, 7):
        res = solve(y, mask, cfg.replace(max_iters=k), variant="P")
        assert np.max(np.abs(res.alpha_star - ref[k - 1])) < 1e-10


def test_full_mask_noiseless_recovers_phantom():
    x = np.asarray(phantom(64))
    full = np.ones((64, 64), bool)
    res = solve(corrupt(x, full), full, SolverConfig(lam=1e-5), "identity")
    assert res.converged
    assert psnr(x, res.magnitude) >= 60


def test_x_star_is_synthesis_of_alpha():
    x = np.asarray(phantom(32))
    m = radial_mask(32, 32, 0.3, 1)
    res = solve(corrupt(x, m), m, SolverConfig(lam=1e-3, max_iters=5))
    np.testing.assert_allclose(res.x_star, wavelet_synthesize(res.alpha_star, res.spec),
                               atol=1e-10)


def audit(res, cfg, phi0):
    phi = res.trace.phi
    phi_w = res.trace.column("phi_w")[1:]
    slack = 1e-9 * np.abs(phi[:-1]) + 1e-13
    assert np.all(phi[1:] <= phi_w + slack)
    assert np.all(phi_w <= phi[:-1] + slack)
    steps = res.trace.column("step_norm")[1:]
    bound = (phi0 - phi[-1]) / cfg.prior_descent_constant + 1e-6
    assert np.sum(steps ** 2) <= bound


@pytest.mark.parametrize("denoiser", ["identity", "gaussian", "wavelet", "median", "random"])
def test_full_variant_descends(denoiser):
    x = np.asarray(phantom(32))
    m = radial_mask(32, 32, 0.3, 2)
    cfg = SolverConfig(lam=1e-3, max_iters=20, wavelet_levels=2)
    res = solve(corrupt(x, m), m, cfg, denoiser)
    audit(res, cfg, res.trace.phi[0])


def test_adversarial_denoiser_is_rejected():
    x = np.asarray(phantom(32))
    m = radial_mask(32, 32, 0.3, 0)
    cfg = SolverConfig(lam=1e-3, max_iters=50, wavelet_levels=2, tol=1e-12)
    res = solve(corrupt(x, m), m, cfg, RandomDenoiser(9))
    assert res.trace.acceptance_rate() < 1.0
    assert res.trace.phi[-1] <= res.trace.phi[0]
    assert np.all(np.diff(res.trace.phi) <= 1e-9 * np.abs(res.trace.phi[:-1]))


def test_accepted_steps_report_positive_ck():
    x = np.asarray(phantom(32))
    full = np.ones((32, 32), bool)
    cfg = SolverConfig(lam=1e-4, eta1=0.5, rho_momentum=2.0, wavelet_levels=2)
    res = solve(corrupt(x, full), full, cfg)
    acc = res.trace.column("accepted")[1:] == 1
    assert acc.any()
    assert np.all(res.trace.column("c_k")[1:][acc] > 0)


def test_fn_variant_is_denoised_fidelity(rng):
    x = np.asarray(phantom(32))
    m = radial_mask(32, 32, 0.3, 0)
    y = corrupt(x, m)
    cfg = SolverConfig(max_iters=1, wavelet_levels=2)
    res = solve(y, m, cfg, "gaussian", "FN")
    obj = Objective(y, m, res.spec, lam=cfg.lam)
    u = pipeline.fidelity_step(wavelet_analyze(ifft_centered(y), res.spec), obj, cfg.rho)
    v = pipeline.GaussianDenoiser()(wavelet_synthesize(u, res.spec))
    np.testing.assert_allclose(res.x_star, v, atol=1e-12)


def test_variants_table():
    assert ablation_variant("P") == ("prior",)
    assert VARIANTS["full"][-1] == "prior" and "check" in VARIANTS["full"]
    with pytest.raises(ValueError):
        ablation_variant("XYZ")


def test_trace_length_and_stopping():
    x = np.asarray(phantom(32))
    m = radial_mask(32, 32, 0.3, 0)
    res = solve(corrupt(x, m), m, SolverConfig(lam=1e-3, max_iters=7, tol=1e-12,
                                              wavelet_levels=2))
    assert not res.converged and res.iterations_used == 7
    assert len(res.trace) == res.iterations_used + 1
    assert res.trace[0].k == 0 and res.trace[-1].k == 7


def test_zero_observation_uses_absolute_criterion():
    m = radial_mask(32, 32, 0.3, 0)
    res = solve(np.zeros((32, 32), complex), m, SolverConfig(wavelet_levels=2))
    assert res.converged and res.iterations_used == 1
    assert not np.any(res.x_star)
    assert res.trace[-1].rel_change == 0.0


def test_config_errors():
    m = np.ones((16, 16), bool)
    obj = Objective(np.zeros((16, 16)), m, WaveletSpec("haar", 2), anchor=np.zeros((16, 16)),
                    anchor_weight=0.5)
    with pytest.raises(ConfigError):
        run_scheme(obj, SolverConfig(wavelet="haar", wavelet_levels=2))
    with pytest.raises(ConfigError):
        SolverConfig(eta2=1.0)


def test_large_step_preset_runs_unchecked():
    x = np.asarray(phantom(32))
    m = radial_mask(32, 32, 0.3, 0)
    cfg = SolverConfig.large_step_preset(max_iters=5, wavelet_levels=2)
    res = solve(corrupt(x, m), m, cfg)
    assert res.iterations_used <= 5


def test_descent_trap(monkeypatch):
    x = np.asarray(phantom(32))
    m = radial_mask(32, 32, 0.3, 0)
    monkeypatch.setattr(pipeline, "prox_lp", lambda v, tau, p: 3 * v)
    with pytest.raises(DescentViolation):
        solve(corrupt(x, m), m, SolverConfig(lam=1e-3, wavelet_levels=2), variant="P")


def test_determinism_and_batch():
    x = np.asarray(phantom(32))
    jobs = []
    for s in range(4):
        m = radial_mask(32, 32, 0.25, s)
        jobs.append(dict(y=corrupt(x, m), mask=m,
                         cfg=SolverConfig(lam=1e-3, max_iters=10, wavelet_levels=2),
                         denoiser="wavelet"))
    seq = [solve(**kw) for kw in jobs]
    par = solve_batch(jobs, max_workers=4)
    for a, b in zip(seq, par):
        np.testing.assert_array_equal(a.alpha_star, b.alpha_star)
        np.testing.assert_array_equal(a.trace.phi, b.trace.phi)
