"""Command-line interface.

Subcommands::

    bq integrate --kernel se --sampler legendre --n 20 --fn fourier:0
        One quadrature run; prints mu, Sigma, fitted hyperparameters and
        the nugget that was used.
    bq benchmark --config exp.toml [--output scores.csv] [--plot]
        Full (kernel x sampler x integrand x N) grid to CSV; --plot also
        renders a score figure next to the CSV.
    bq converge --kernel matern32 --sampler grid --fn translate:0.37 \
                --n-list 8,16,32,64,128 [--output rates.csv] [--plot]
        Convergence-rate study; writes per-N errors and the fitted slope.

Integrand specs for --fn: "fourier:SEED", "brownian_kl:SEED",
"translate:Z" (the kernel translate k(., Z), whose exact integral is the
kernel mean at Z), or "linear" (f(x) = x).

Exit codes: 0 success, 2 configuration error, 3 when grid-cell hard
failures exceed the configured threshold.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bench
from .config import ConfigError, load_experiment_config, nugget_from_dict
from .designs import STRATEGIES, DesignSpec, generate_design
from .embeddings import Measure, kernel_mean
from .gp import FactorizationError, NuggetPolicy
from .hyper import fit_ml
from .kernels import CONFIG_NAMES, kernel_from_name
from .quadrature import Dataset, bq_infer
from .testbed import make_brownian_path, make_fourier


def _parse_fn(text: str, spec):
    """Resolve an --fn argument to (callable, true_integral)."""
    name, _, arg = text.partition(":")
    if name == "fourier":
        f = make_fourier(int(arg or 0))
        return f, f.true_integral
    if name == "brownian_kl":
        f = make_brownian_path(int(arg or 0))
        return f, f.true_integral
    if name == "translate":
        z = float(arg)
        if not 0.0 <= z <= 1.0:
            raise ConfigError("translate point must lie in [0,1]")
        from .kernels import kernel_eval
        truth = kernel_mean(spec, Measure(dim=spec.dim), [z])
        return (lambda x: kernel_eval(spec, np.atleast_1d(x), [z])), truth
    if name == "linear":
        return (lambda x: float(np.atleast_1d(x)[0])), 0.5
    raise ConfigError(f"unknown integrand spec {text!r}")


def _add_kernel_args(p):
    p.add_argument("--kernel", required=True, choices=sorted(CONFIG_NAMES))
    p.add_argument("--lengthscale", type=float, default=0.2,
                   help="initial / fixed length-scale (default 0.2)")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bq",
                                 description="Conjugate Bayesian quadrature")
    sub = ap.add_subparsers(dest="command", required=True)

    p_int = sub.add_parser("integrate", help="single quadrature run")
    _add_kernel_args(p_int)
    p_int.add_argument("--sampler", required=True, choices=STRATEGIES)
    p_int.add_argument("--n", type=int, required=True)
    p_int.add_argument("--fn", required=True)
    p_int.add_argument("--no-fit", action="store_true",
                       help="skip ML-II and use the given hyperparameters")
    p_int.add_argument("--ml-restarts", type=int, default=3)

    p_bench = sub.add_parser("benchmark", help="score grid to CSV")
    p_bench.add_argument("--config", required=True)
    p_bench.add_argument("--output", default=None,
                         help="override the config output path")
    p_bench.add_argument("--plot", action="store_true",
                         help="render a score figure next to the CSV")

    p_conv = sub.add_parser("converge", help="convergence-rate study")
    _add_kernel_args(p_conv)
    p_conv.add_argument("--sampler", required=True, choices=STRATEGIES)
    p_conv.add_argument("--fn", required=True)
    p_conv.add_argument("--n-list", required=True,
                        help="comma-separated budgets, e.g. 8,16,32,64")
    p_conv.add_argument("--fit-hypers", action="store_true")
    p_conv.add_argument("--output", default="rates.csv")
    p_conv.add_argument("--plot", action="store_true")
    return ap


def _cmd_integrate(args) -> int:
    spec = kernel_from_name(args.kernel, lengthscales=(args.lengthscale,),
                            sigma2=args.sigma2)
    f, truth = _parse_fn(args.fn, spec)
    X = generate_design(DesignSpec(args.sampler, dim=1, n=args.n,
                                   seed=args.seed))
    data = Dataset(X, [float(f(x[0])) for x in X])
    policy = NuggetPolicy()
    if not args.no_fit:
        spec = fit_ml(spec, data, restarts=args.ml_restarts, seed=args.seed,
                      policy=policy).spec
    post = bq_infer(spec, Measure(dim=1), data, policy)
    print(f"mu       = {post.mu:.12g}")
    print(f"sigma2   = {post.sigma2:.12g}")
    print(f"sigma    = {np.sqrt(post.sigma2):.12g}")
    print(f"theta    = sigma2={spec.sigma2:.6g} "
          f"lengthscales={tuple(round(l, 6) for l in spec.lengthscales)}")
    print(f"lambda   = {post.lambda_used:.6g}")
    if truth is not None:
        print(f"truth    = {truth:.12g}")
        print(f"abs_err  = {abs(truth - post.mu):.6g}")
    return 0


def _cmd_benchmark(args) -> int:
    cfg = load_experiment_config(args.config)
    out = args.output or cfg.output_path
    rows = bench.run_benchmark(cfg)
    bench.write_scores_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    if args.plot:
        from .plots import plot_scores
        png = os.path.splitext(out)[0] + ".png"
        print(f"wrote figure {plot_scores(rows, png)}")
    failures = sum(r.n_failures for r in rows)
    if failures > cfg.fail_threshold:
        print(f"hard failures: {failures} > threshold {cfg.fail_threshold}",
              file=sys.stderr)
        return 3
    return 0


def _cmd_converge(args) -> int:
    spec = kernel_from_name(args.kernel, lengthscales=(args.lengthscale,),
                            sigma2=args.sigma2)
    f, truth = _parse_fn(args.fn, spec)
    try:
        n_list = [int(v) for v in args.n_list.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --n-list: {exc}") from exc
    if not n_list:
        raise ConfigError("--n-list is empty")
    report = bench.convergence_study(spec, args.sampler, f, truth, n_list,
                                     seed=args.seed,
                                     fit_hypers=args.fit_hypers)
    bench.write_convergence_csv(report, args.output)
    print(f"wrote {len(report.rows)} rows to {args.output}")
    print(f"slope = {report.slope:.3f}")
    if report.floor_n is not None:
        print(f"error floor from N={report.floor_n} "
              f"at {report.floor_error:.3e}")
    if args.plot:
        from .plots import plot_convergence
        png = os.path.splitext(args.output)[0] + ".png"
        title = f"{args.kernel} / {args.sampler} / {args.fn}"
        print(f"wrote figure {plot_convergence(report, png, title)}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "integrate":
            return _cmd_integrate(args)
        if args.command == "benchmark":
            return _cmd_benchmark(args)
        return _cmd_converge(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FactorizationError as exc:
        print(f"hard failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
