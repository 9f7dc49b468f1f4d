import os

import numpy as np
import pytest

from bquad.cli import main


def test_integrate_translate(capsys):
    rc = main(["integrate", "--kernel", "brownian", "--sampler", "grid",
               "--n", "8", "--fn", "linear", "--no-fit"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "mu " in out and "lambda" in out and "truth" in out


def test_integrate_with_fit(capsys):
    rc = main(["integrate", "--kernel", "se", "--sampler", "legendre",
               "--n", "30", "--fn", "fourier:0", "--ml-restarts", "2"])
    out = capsys.readouterr().out
    assert rc == 0
    mu = float(next(l for l in out.splitlines() if l.startswith("mu")).split("=")[1])
    err = float(next(l for l in out.splitlines()
                     if l.startswith("abs_err")).split("=")[1])
    assert np.isfinite(mu) and err < 1e-2


def test_integrate_bad_fn(capsys):
    rc = main(["integrate", "--kernel", "se", "--sampler", "grid",
               "--n", "4", "--fn", "mystery"])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_benchmark_end_to_end(tmp_path, capsys):
    cfgfile = tmp_path / "exp.toml"
    cfgfile.write_text(
        'kernels = ["brownian"]\n'
        'samplers = ["grid"]\n'
        'family = "brownian_kl"\n'
        "T = 2\n"
        "n_min = 4\nn_max = 6\n"
        f'output = "{tmp_path / "scores.csv"}"\n'
        "[ml]\nrestarts = 1\n")
    rc = main(["benchmark", "--config", str(cfgfile), "--plot"])
    out = capsys.readouterr().out
    assert rc == 0
    assert (tmp_path / "scores.csv").exists()
    assert (tmp_path / "scores.png").exists()
    assert "wrote" in out


def test_benchmark_missing_config(capsys):
    rc = main(["benchmark", "--config", "/nonexistent.toml"])
    assert rc == 2


def test_benchmark_bad_kernel(tmp_path, capsys):
    cfgfile = tmp_path / "exp.toml"
    cfgfile.write_text('kernels = ["rbf"]\nsamplers = ["grid"]\n')
    rc = main(["benchmark", "--config", str(cfgfile)])
    assert rc == 2


def test_converge_end_to_end(tmp_path, capsys):
    out = tmp_path / "rates.csv"
    rc = main(["converge", "--kernel", "brownian", "--sampler", "grid",
               "--fn", "linear", "--n-list", "4,8,16,32",
               "--output", str(out), "--plot"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "slope" in text
    assert out.exists()
    assert (tmp_path / "rates.png").exists()


def test_converge_translate_fn(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["converge", "--kernel", "matern32", "--sampler", "grid",
               "--fn", "translate:0.37", "--n-list", "8,16,32",
               "--lengthscale", "0.3", "--output", str(out)])
    assert rc == 0


def test_converge_bad_n_list(tmp_path, capsys):
    rc = main(["converge", "--kernel", "se", "--sampler", "grid",
               "--fn", "linear", "--n-list", "a,b"])
    assert rc == 2
