"""Command-line harness: ``lpmri <subcommand> ...``.

Exit codes: 0 success (or convergence), 2 iteration cap reached without
convergence, 1 any error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io
from .core import LpmriError
from .masks import MASKS, make_mask
from .metrics import mse, psnr, rlne
from .pipeline import available_denoisers
from .simulate import corrupt, phantom

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_ERROR, EXIT_MAXITER = 0, 1, 2

log = logging.getLogger("lpmri")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; 2 is reserved for max-iters here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _read_mask(path) -> np.ndarray:
    return np.asarray(io.load_image(path)).real > 0.5


def _load_cfg(path):
    return io.load_config(path) if path else io.ExperimentConfig()


# ------------------------------------------------------------------ commands


def cmd_phantom(a) -> int:
    io.write_image(a.out, np.asarray(phantom(a.size, a.kind)))
    return EXIT_OK


def cmd_mask(a) -> int:
    h = a.height or a.size
    w = a.width or a.size
    m = make_mask(a.kind, h, w, a.ratio, a.seed)
    io.write_image(a.out, np.asarray(m).astype(np.float32))
    print(f"ratio={m.ratio:.6f}")
    return EXIT_OK


def cmd_corrupt(a) -> int:
    from .rician import RicianParams

    x = np.asarray(io.load_image(a.x), dtype=np.float64)
    rician = RicianParams(a.rician_sigma, a.seed) if a.rician_sigma else None
    io.write_image(a.out, corrupt(x, _read_mask(a.mask), rician))
    return EXIT_OK


def _recon(y, mask, cfg, denoiser, variant, sigma):
    from .rician import solve_rician
    from .solver import solve

    if sigma:
        return solve_rician(y, mask, cfg.rician_config(sigma), denoiser=denoiser,
                            variant=variant)
    return solve(y, mask, cfg.solver_config(), denoiser, variant)


def _write_result(res, out, trace) -> int:
    io.write_image(out, res.x_star)
    if trace:
        res.trace.to_csv(trace)
    return EXIT_OK if res.converged else EXIT_MAXITER


def cmd_recon(a) -> int:
    cfg = _load_cfg(a.config)
    y = np.asarray(io.load_image(a.y), dtype=np.complex128)
    mask = _read_mask(a.mask)
    denoiser = a.denoiser or cfg.denoiser
    variant = a.variant or cfg.variant
    sigma = cfg.rician_sigma if a.rician_sigma is None else a.rician_sigma
    res = _recon(y, mask, cfg, denoiser, variant, sigma)
    return _write_result(res, a.out, a.trace)


def cmd_rician_sim(a) -> int:
    from .rician import RicianParams, add_rician

    x = np.asarray(io.load_image(a.x), dtype=np.float64)
    io.write_image(a.out, np.asarray(add_rician(x, RicianParams(a.sigma, a.seed))))
    return EXIT_OK


def cmd_rician_recon(a) -> int:
    cfg = _load_cfg(a.config)
    y = np.asarray(io.load_image(a.y), dtype=np.complex128)
    res = _recon(y, _read_mask(a.mask), cfg, a.denoiser or cfg.denoiser,
                 a.variant or cfg.variant, a.sigma)
    return _write_result(res, a.out, a.trace)


def cmd_metrics(a) -> int:
    ref = io.load_image(a.ref)
    rec = io.load_image(a.rec)
    value, capped = psnr(ref, rec, a.peak, with_flag=True)
    print(f"psnr={value:.6f}")
    print(f"psnr_capped={int(capped)}")
    print(f"mse={mse(ref, rec):.10g}")
    print(f"rlne={rlne(ref, rec):.10g}")
    return EXIT_OK


def _batch_jobs(path):
    """Manifest rows: ``y mask config denoiser out trace [variant]``."""
    jobs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (6, 7):
                raise io.FormatError(f"{path}:{lineno}: expected 6 or 7 fields")
            jobs.append(parts)
    return jobs


def cmd_batch(a) -> int:
    jobs = _batch_jobs(a.manifest)

    def run(parts):
        y, mask, config, denoiser, out, trace = parts[:6]
        variant = parts[6] if len(parts) == 7 else None
        cfg = _load_cfg(None if config == "-" else config)
        res = _recon(np.asarray(io.load_image(y), dtype=np.complex128), _read_mask(mask),
                     cfg, denoiser, variant or cfg.variant, cfg.rician_sigma)
        return _write_result(res, out, trace)

    with ThreadPoolExecutor(max_workers=a.workers) as pool:
        codes = list(pool.map(run, jobs))
    for parts, code in zip(jobs, codes):
        print(f"{parts[4]} {'converged' if code == EXIT_OK else 'max-iters'}")
    return max(codes, default=EXIT_OK)


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lpmri", description="lp-regularized CS-MRI reconstruction toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("phantom", help="write a synthetic test image")
    s.add_argument("--size", type=int, default=64)
    s.add_argument("--kind", choices=["shepp-logan", "blocks"], default="shepp-logan")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_phantom)

    s = sub.add_parser("mask", help="write a k-space sampling mask")
    s.add_argument("--kind", choices=sorted(MASKS), default="radial")
    s.add_argument("--size", type=int, default=64)
    s.add_argument("--height", type=int)
    s.add_argument("--width", type=int)
    s.add_argument("--ratio", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_mask)

    s = sub.add_parser("corrupt", help="simulate undersampled k-space")
    s.add_argument("--x", required=True)
    s.add_argument("--mask", required=True)
    s.add_argument("--rician-sigma", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_corrupt)

    s = sub.add_parser("recon", help="reconstruct an image from k-space")
    s.add_argument("--y", required=True)
    s.add_argument("--mask", required=True)
    s.add_argument("--config")
    s.add_argument("--denoiser", choices=available_denoisers())
    s.add_argument("--out", required=True)
    s.add_argument("--trace")
    s.add_argument("--variant", choices=["P", "FN", "FNP", "full"])
    s.add_argument("--rician-sigma", type=float)
    s.set_defaults(func=cmd_recon)

    s = sub.add_parser("rician-sim", help="add Rician noise to a magnitude image")
    s.add_argument("--x", required=True)
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_rician_sim)

    s = sub.add_parser("rician-recon", help="Rician-robust reconstruction")
    s.add_argument("--y", required=True)
    s.add_argument("--mask", required=True)
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--config")
    s.add_argument("--denoiser", choices=available_denoisers())
    s.add_argument("--variant", choices=["P", "FN", "FNP", "full"])
    s.add_argument("--out", required=True)
    s.add_argument("--trace")
    s.set_defaults(func=cmd_rician_recon)

    s = sub.add_parser("metrics", help="PSNR, MSE and RLNE of a reconstruction")
    s.add_argument("--ref", required=True)
    s.add_argument("--rec", required=True)
    s.add_argument("--peak", type=float)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("batch", help="run reconstructions listed in a manifest")
    s.add_argument("--manifest", required=True)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_batch)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (LpmriError, OSError, ValueError) as exc:
        print(f"lpmri {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
