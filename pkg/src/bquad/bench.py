"""Benchmark grid engine, scores, and convergence-rate studies.

Runs the (kernel x sampler x integrand x N) grid, scoring each cell by

* error score — mean relative error |I - mu| / |I| over the family, and
* calibration score — mean |I - mu| / sqrt(Sigma), i.e. the miss measured
  in posterior standard deviations (< 1 means the truth typically lies
  inside the one-sigma band),

after dropping outliers outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR] (quartiles by
linear interpolation; no filtering below 4 values).  Node sets are
precomputed once per (sampler, N) and shared by every kernel and
integrand; hyperparameters are refit by ML-II per dataset.  A hard failure
in one cell is counted and never aborts the rest of the grid.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .designs import DesignSpec, design_geometry, generate_design
from .embeddings import Measure
from .gp import FactorizationError, NuggetPolicy
from .hyper import fit_ml
from .kernels import CONFIG_NAMES, KernelSpec, kernel_from_name
from .quadrature import Dataset, bq_infer
from .seeds import rng_for
from .testbed import make_family

CSV_SCHEMA_VERSION = 1

SCORE_COLUMNS = ("kernel", "sampler", "N", "error_score", "calibration_score",
                 "n_outliers_dropped", "n_failures")
CONVERGE_COLUMNS = ("N", "abs_error", "mu", "sigma2", "lambda_used",
                    "fill_distance", "separation_radius", "mesh_ratio")


@dataclass(frozen=True)
class ExperimentConfig:
    kernels: tuple
    samplers: tuple
    family: str = "fourier"
    T: int = 10
    n_min: int = 2
    n_max: int = 30
    n_step: int = 1
    seed: int = 0
    nugget: NuggetPolicy = NuggetPolicy()
    ml_restarts: int = 3
    output_path: str = "scores.csv"
    max_n_cap: int = 512
    fail_threshold: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kernels", tuple(self.kernels))
        object.__setattr__(self, "samplers", tuple(self.samplers))
        for k in self.kernels:
            if k not in CONFIG_NAMES:
                raise ValueError(f"unknown kernel {k!r}")
        if self.n_max > self.max_n_cap:
            raise ValueError(f"n_max exceeds cap {self.max_n_cap}")
        if self.n_min < 1 or self.n_max < self.n_min or self.n_step < 1:
            raise ValueError("bad N range")

    @property
    def n_values(self):
        return range(self.n_min, self.n_max + 1, self.n_step)


@dataclass
class ScoreRow:
    kernel: str
    sampler: str
    N: int
    error_score: float
    calibration_score: float
    n_outliers_dropped: int
    n_failures: int


def filter_outliers(scores) -> np.ndarray:
    """Drop values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR].

    Quartiles use linear interpolation (numpy's default percentile
    method).  Fewer than 4 values are returned unfiltered.
    """
    s = np.asarray(scores, dtype=float)
    if s.size < 4:
        return s
    q1, q3 = np.percentile(s, [25.0, 75.0])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    return s[(s >= lo) & (s <= hi)]


def error_score(mu_list, truth_list, filtered: bool = True) -> tuple:
    """Mean relative error after outlier filtering.

    Entries with a zero true integral are excluded (relative error is
    undefined there).  Returns (score, n_dropped).
    """
    mu = np.asarray(mu_list, dtype=float)
    truth = np.asarray(truth_list, dtype=float)
    keep = truth != 0.0
    rel = np.abs(truth[keep] - mu[keep]) / np.abs(truth[keep])
    kept = filter_outliers(rel) if filtered else rel
    return float(np.mean(kept)) if kept.size else np.nan, int(rel.size - kept.size)


def calibration_score(mu_list, sigma2_list, truth_list,
                      filtered: bool = True) -> tuple:
    """Mean |I - mu| / sqrt(Sigma) after outlier filtering.

    Entries with Sigma = 0 and mu != I are infinitely miscalibrated and
    are excluded (counted as dropped).  Returns (score, n_dropped).
    """
    mu = np.asarray(mu_list, dtype=float)
    s2 = np.asarray(sigma2_list, dtype=float)
    truth = np.asarray(truth_list, dtype=float)
    miss = np.abs(truth - mu)
    ok = (s2 > 0.0) | (miss == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(s2 > 0.0, miss / np.sqrt(s2), 0.0)
    z = z[ok]
    kept = filter_outliers(z) if filtered else z
    n_dropped = int(mu.size - ok.sum()) + int(z.size - kept.size)
    return float(np.mean(kept)) if kept.size else np.nan, n_dropped


def _design_for(sampler: str, n: int, seed: int, dim: int = 1) -> np.ndarray:
    sub = int(rng_for(seed, "sampler-nodes", n).integers(2 ** 62))
    return generate_design(DesignSpec(sampler, dim=dim, n=n, seed=sub))


def run_benchmark(cfg: ExperimentConfig, progress=None) -> list:
    """Execute the full grid; returns sorted ScoreRow entries.

    Nodes are generated once per (sampler, N) with a seed substream, so
    every kernel and integrand sees the same design at a given budget.
    """
    P = Measure(dim=1)
    funcs = make_family(cfg.family, cfg.T, seed=cfg.seed)
    truths = np.array([f.true_integral for f in funcs])
    rows = []
    for sampler in cfg.samplers:
        for n in cfg.n_values:
            X = _design_for(sampler, n, cfg.seed)
            fvals = [np.array([f(x[0]) for x in X]) for f in funcs]
            for kname in cfg.kernels:
                mus, s2s, tr, fails = [], [], [], 0
                template = kernel_from_name(kname, dim=1, lengthscales=(0.2,))
                for f_X, truth in zip(fvals, truths):
                    try:
                        data = Dataset(X, f_X)
                        fit = fit_ml(template, data, restarts=cfg.ml_restarts,
                                     seed=cfg.seed, policy=cfg.nugget)
                        post = bq_infer(fit.spec, P, data, cfg.nugget)
                        mus.append(post.mu)
                        s2s.append(post.sigma2)
                        tr.append(truth)
                    except (FactorizationError, FloatingPointError):
                        fails += 1
                err, d1 = error_score(mus, tr)
                cal, d2 = calibration_score(mus, s2s, tr)
                rows.append(ScoreRow(kernel=kname, sampler=sampler, N=n,
                                     error_score=err, calibration_score=cal,
                                     n_outliers_dropped=max(d1, d2),
                                     n_failures=fails))
                if progress:
                    progress(rows[-1])
    rows.sort(key=lambda r: (r.kernel, r.sampler, r.N))
    return rows


def write_scores_csv(rows, path_or_buf) -> None:
    """Write ScoreRow entries with a versioned header comment."""
    close = False
    if isinstance(path_or_buf, (str, bytes)):
        fh = open(path_or_buf, "w", newline="")
        close = True
    else:
        fh = path_or_buf
    try:
        fh.write(f"# bquad-scores schema={CSV_SCHEMA_VERSION} "
                 f"columns={','.join(SCORE_COLUMNS)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCORE_COLUMNS)
        for r in rows:
            w.writerow([r.kernel, r.sampler, r.N,
                        f"{r.error_score:.12e}", f"{r.calibration_score:.12e}",
                        r.n_outliers_dropped, r.n_failures])
    finally:
        if close:
            fh.close()


@dataclass
class ConvergenceReport:
    """Per-N errors, geometry, the fitted log-log slope and the detected
    error floor (first N where the error stops decreasing by >= 5%)."""

    n_list: list
    errors: list
    rows: list            # dicts keyed by CONVERGE_COLUMNS
    slope: float
    intercept: float
    floor_n: int | None
    floor_error: float | None


def convergence_study(spec: KernelSpec, sampler: str, f, true_integral: float,
                      n_list, policy: NuggetPolicy = NuggetPolicy(),
                      seed: int = 0, fit_hypers: bool = False,
                      ml_restarts: int = 3) -> ConvergenceReport:
    """Run BQ at each budget and fit log|error| against log N.

    Errors below 1e-14 are censored from the slope fit (machine-precision
    floor).  The slope is least squares over the surviving budgets; the
    error floor is the first N whose error fails to improve on the
    previous budget by at least 5%.
    """
    P = Measure(dim=spec.dim)
    rows, errors = [], []
    for n in n_list:
        X = _design_for(sampler, int(n), seed, dim=spec.dim)
        f_X = np.array([float(f(x if spec.dim > 1 else x[0])) for x in X])
        data = Dataset(X, f_X)
        use = spec
        if fit_hypers:
            use = fit_ml(spec, data, restarts=ml_restarts, seed=seed,
                         policy=policy).spec
        post = bq_infer(use, P, data, policy)
        err = abs(true_integral - post.mu)
        geom = design_geometry(X) if len(X) > 1 else None
        rows.append({"N": int(n), "abs_error": err, "mu": post.mu,
                     "sigma2": post.sigma2, "lambda_used": post.lambda_used,
                     "fill_distance": geom.fill_distance if geom else np.nan,
                     "separation_radius": geom.separation_radius if geom else np.nan,
                     "mesh_ratio": geom.mesh_ratio if geom else np.nan})
        errors.append(err)

    n_arr = np.asarray(list(n_list), dtype=float)
    e_arr = np.asarray(errors)
    keep = e_arr > 1e-14
    if keep.sum() >= 2:
        slope, intercept = np.polyfit(np.log(n_arr[keep]),
                                      np.log(e_arr[keep]), 1)
    else:
        slope, intercept = np.nan, np.nan

    floor_n = floor_err = None
    for i in range(1, len(errors)):
        if errors[i] > 0.95 * errors[i - 1]:
            floor_n, floor_err = int(n_arr[i]), errors[i]
            break
    return ConvergenceReport(n_list=list(map(int, n_list)), errors=errors,
                             rows=rows, slope=float(slope),
                             intercept=float(intercept),
                             floor_n=floor_n, floor_error=floor_err)


def write_convergence_csv(report: ConvergenceReport, path_or_buf) -> None:
    close = False
    if isinstance(path_or_buf, (str, bytes)):
        fh = open(path_or_buf, "w", newline="")
        close = True
    else:
        fh = path_or_buf
    try:
        fh.write(f"# bquad-converge schema={CSV_SCHEMA_VERSION} "
                 f"columns={','.join(CONVERGE_COLUMNS)} "
                 f"slope={report.slope:.6f}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CONVERGE_COLUMNS)
        for r in report.rows:
            w.writerow([r["N"]] + [f"{r[c]:.12e}" for c in CONVERGE_COLUMNS[1:]])
    finally:
        if close:
            fh.close()
