import subprocess
import sys

import numpy as np
import pytest

from lpmri.cli import main
from lpmri.io import read_image
from lpmri.metrics import psnr


@pytest.fixture
def workspace(tmp_path):
    def run(*args):
        return main([str(a) for a in args])
    return tmp_path, run


def make_problem(tmp, run, ratio=0.3, size=32, sigma=None):
    assert run("phantom", "--size", size, "--out", tmp / "x.rimg") == 0
    assert run("mask", "--kind", "radial", "--size", size, "--ratio", ratio, "--seed", 1,
               "--out", tmp / "m.rimg") == 0
    extra = ["--rician-sigma", sigma, "--seed", 3] if sigma else []
    assert run("corrupt", "--x", tmp / "x.rimg", "--mask", tmp / "m.rimg",
               "--out", tmp / "y.rimg", *extra) == 0


def test_full_mask_recon_exit_zero(workspace):
    tmp, run = workspace
    make_problem(tmp, run, ratio=1.0, size=64)
    code = run("recon", "--y", tmp / "y.rimg", "--mask", tmp / "m.rimg", "--denoiser",
               "identity", "--out", tmp / "r.rimg", "--trace", tmp / "t.csv")
    assert code == 0
    assert psnr(read_image(tmp / "x.rimg"), read_image(tmp / "r.rimg")) >= 60


def test_trace_rows_and_maxiter_exit(workspace):
    tmp, run = workspace
    make_problem(tmp, run)
    (tmp / "c.cfg").write_text("lam = 1e-3\nmax_iters = 4\ntol = 1e-12\nwavelet_levels = 2\n")
    code = run("recon", "--y", tmp / "y.rimg", "--mask", tmp / "m.rimg", "--config",
               tmp / "c.cfg", "--denoiser", "wavelet", "--out", tmp / "r.rimg",
               "--trace", tmp / "t.csv", "--variant", "full")
    assert code == 2
    lines = (tmp / "t.csv").read_text().splitlines()
    assert lines[0].startswith("k,phi") and len(lines) - 1 == 4 + 1


def test_missing_flag_exit_one(workspace, capsys):
    tmp, run = workspace
    assert run("recon", "--mask", "m", "--out", "o") == 1
    assert "usage" in capsys.readouterr().err


def test_errors_exit_one(workspace, capsys):
    tmp, run = workspace
    assert run("recon", "--y", tmp / "nope.rimg", "--mask", tmp / "nope.rimg",
               "--out", tmp / "o.rimg") == 1
    (tmp / "bad.cfg").write_text("bogus = 1\n")
    make_problem(tmp, run)
    assert run("recon", "--y", tmp / "y.rimg", "--mask", tmp / "m.rimg", "--config",
               tmp / "bad.cfg", "--out", tmp / "o.rimg") == 1
    assert "unknown key" in capsys.readouterr().err


def test_deterministic_outputs(workspace):
    tmp, run = workspace
    outs = []
    for rep in range(2):
        d = tmp / f"rep{rep}"
        d.mkdir()
        make_problem(d, run, sigma=0.05)
        run("recon", "--y", d / "y.rimg", "--mask", d / "m.rimg", "--denoiser", "gaussian",
            "--out", d / "r.rimg", "--trace", d / "t.csv")
        outs.append([(d / f).read_bytes() for f in ("x.rimg", "m.rimg", "y.rimg", "r.rimg",
                                                     "t.csv")])
    assert outs[0] == outs[1]


def test_rician_commands(workspace, capsys):
    tmp, run = workspace
    make_problem(tmp, run)
    assert run("rician-sim", "--x", tmp / "x.rimg", "--sigma", 0.05, "--seed", 2,
               "--out", tmp / "xn.rimg") == 0
    assert read_image(tmp / "xn.rimg").min() >= 0
    (tmp / "c.cfg").write_text("wavelet_levels = 2\nmax_iters = 5\nouter_iters = 2\n")
    code = run("rician-recon", "--y", tmp / "y.rimg", "--mask", tmp / "m.rimg", "--sigma",
               0.05, "--config", tmp / "c.cfg", "--out", tmp / "r.rimg", "--trace",
               tmp / "t.csv")
    assert code in (0, 2)
    assert len((tmp / "t.csv").read_text().splitlines()) == 2 + 1 + 1


def test_metrics_command(workspace, capsys):
    tmp, run = workspace
    make_problem(tmp, run)
    assert run("metrics", "--ref", tmp / "x.rimg", "--rec", tmp / "x.rimg") == 0
    out = dict(line.split("=") for line in capsys.readouterr().out.split())
    assert float(out["psnr"]) == 99.0 and out["psnr_capped"] == "1"
    assert float(out["mse"]) == 0.0


def test_batch_matches_single_runs(workspace):
    tmp, run = workspace
    make_problem(tmp, run)
    (tmp / "c.cfg").write_text("lam = 1e-3\nmax_iters = 6\nwavelet_levels = 2\n")
    rows = []
    for i, den in enumerate(["identity", "gaussian", "median"]):
        rows.append(f"{tmp}/y.rimg {tmp}/m.rimg {tmp}/c.cfg {den} {tmp}/b{i}.rimg "
                    f"{tmp}/b{i}.csv full")
        run("recon", "--y", tmp / "y.rimg", "--mask", tmp / "m.rimg", "--config",
            tmp / "c.cfg", "--denoiser", den, "--out", tmp / f"s{i}.rimg")
    (tmp / "jobs.txt").write_text("\n".join(rows) + "\n")
    assert run("batch", "--manifest", tmp / "jobs.txt", "--workers", 3) in (0, 2)
    for i in range(3):
        assert (tmp / f"b{i}.rimg").read_bytes() == (tmp / f"s{i}.rimg").read_bytes()


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "lpmri.cli", "phantom", "--size", "32",
                          "--out", str(tmp_path / "p.rimg")], capture_output=True)
    assert out.returncode == 0
    assert read_image(tmp_path / "p.rimg").shape == (32, 32)


def test_all_subcommands_listed(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    text = capsys.readouterr().out
    for cmd in ("phantom", "mask", "corrupt", "recon", "rician-sim", "rician-recon",
                "metrics", "batch"):
        assert cmd in text
