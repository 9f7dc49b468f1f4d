"""Active node selection: squared correlation, acquisition functions,
acquisition maximization, and the sequential quadrature loop.

All acquisitions are driven by the squared correlation between the
integral and a candidate observation,

    rho^2(x) = k_{D;P}(x)^2 / (Sigma_D * k_D(x, x)),

where k_D is the posterior kernel and k_{D;P} its mean embedding; with no
data this reduces to k_P(x)^2 / (k_PP * k(x,x)).  MI, IVR and NIV are
strictly increasing transformations of rho^2 and therefore share their
maximizer; US and PVC weight posterior-uncertainty quantities by the
measure's density instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embeddings import Measure, initial_variance, kernel_mean_vector
from .gp import FactoredSystem, NuggetPolicy, cholesky_with_nugget
from .hyper import fit_ml
from .kernels import KernelSpec, _as_points, cross, gram, kernel_diag
from .quadrature import BQPosterior, Dataset, bq_infer, empty_dataset

ACQUISITION_KINDS = ("mi", "ivr", "niv", "us", "pvc")

#: value used when rho^2 reaches 1 exactly (perfectly informative candidate)
MI_INFINITY = np.inf


@dataclass(frozen=True)
class SearchConfig:
    """Candidate-set size and local-refinement settings for the maximizer."""

    candidates: int = 512
    refine_iters: int = 40
    exclusion_radius: float = 1e-8
    top_k: int = 3


@dataclass
class SequentialState:
    """Posterior cache for one node set: factorization plus embeddings."""

    spec: KernelSpec
    P: Measure
    data: Dataset
    policy: NuggetPolicy
    sys: FactoredSystem | None
    k_PX: np.ndarray
    k_PP: float
    sigma2: float
    weights: np.ndarray
    step: int = 0

    @property
    def N(self) -> int:
        return self.data.N


def make_state(spec: KernelSpec, P: Measure, data: Dataset = None,
               policy: NuggetPolicy = NuggetPolicy()) -> SequentialState:
    """Build the posterior cache for a (possibly empty) dataset."""
    if data is None:
        data = empty_dataset(spec.dim)
    k_PP = initial_variance(spec, P)
    if data.N == 0:
        return SequentialState(spec, P, data, policy, None, np.empty(0),
                               k_PP, k_PP, np.empty(0))
    sys = cholesky_with_nugget(gram(spec, data.X), policy)
    k_PX = kernel_mean_vector(spec, P, data.X)
    w = sys.solve(k_PX)
    sigma2 = max(k_PP - float(w @ k_PX), 0.0)
    return SequentialState(spec, P, data, policy, sys, k_PX, k_PP, sigma2, w)


def _posterior_pieces(state: SequentialState, C: np.ndarray):
    """Vectorized posterior variance k_D(x,x) and posterior embedding
    k_{D;P}(x) at each candidate row of C."""
    kxx = kernel_diag(state.spec, C)
    k_PC = kernel_mean_vector(state.spec, state.P, C)
    if state.data.N == 0:
        return kxx, k_PC
    Kxc = cross(state.spec, state.data.X, C)          # (N, M)
    half = state.sys.half_solve(Kxc)                  # L^-1 Kxc
    var = kxx - np.sum(half * half, axis=0)
    emb = k_PC - Kxc.T @ state.weights
    return np.maximum(var, 0.0), emb


def _rho2_pointwise(state: SequentialState, C: np.ndarray) -> np.ndarray:
    """Sequential (n=1) squared correlation at each candidate."""
    var, emb = _posterior_pieces(state, C)
    denom = state.sigma2 * var
    with np.errstate(divide="ignore", invalid="ignore"):
        rho2 = np.where(denom > 0.0, emb * emb / denom, 0.0)
    return np.clip(rho2, 0.0, 1.0)


def squared_correlation(state: SequentialState, candidates) -> float:
    """Squared correlation of the integral with a candidate batch.

    For a batch X~ this is k_{D;P}^T K_D^-1 k_{D;P} / Sigma_D computed in
    the posterior; with empty data it is the prior form
    k_PX~^T K_X~X~^-1 k_PX~ / k_PP.  Always clamped to [0, 1].
    """
    C = _as_points(candidates, state.spec.dim)
    if C.shape[0] == 1:
        return float(_rho2_pointwise(state, C)[0])
    _, emb = _posterior_pieces(state, C)
    Kcc = cross(state.spec, C, C)
    if state.data.N > 0:
        Kxc = cross(state.spec, state.data.X, C)
        half = state.sys.half_solve(Kxc)
        Kcc = Kcc - half.T @ half
        Kcc = 0.5 * (Kcc + Kcc.T)
    sub = cholesky_with_nugget(Kcc, state.policy)
    h = sub.half_solve(emb)
    rho2 = float(h @ h) / state.sigma2 if state.sigma2 > 0 else 0.0
    return float(np.clip(rho2, 0.0, 1.0))


def acquisition_values(kind: str, state: SequentialState, C) -> np.ndarray:
    """Vectorized acquisition evaluation at candidate points."""
    kind = kind.lower()
    if kind not in ACQUISITION_KINDS:
        raise ValueError(f"unknown acquisition {kind!r}")
    C = _as_points(C, state.spec.dim)
    if kind in ("mi", "ivr", "niv"):
        rho2 = _rho2_pointwise(state, C)
        if kind == "ivr":
            return rho2
        if kind == "niv":
            return rho2 - 1.0
        with np.errstate(divide="ignore"):
            return np.where(rho2 >= 1.0, MI_INFINITY,
                            -0.5 * np.log1p(-rho2))
    var, emb = _posterior_pieces(state, C)
    p = state.P.density(C)
    if kind == "us":
        return var * p * p
    return emb * p  # pvc


def acquisition_value(kind: str, state: SequentialState, x) -> float:
    """Acquisition at a single point."""
    return float(acquisition_values(kind, state, [np.atleast_1d(x)])[0])


def _sobol_candidates(n: int, dim: int) -> np.ndarray:
    from .designs import DesignSpec, generate_design
    pts = generate_design(DesignSpec("sobol", dim=dim, n=n))
    # drop the origin corner; it carries zero information for the Brownian
    # kernel and is never optimal for the stationary ones
    return pts


def _golden_section(f, a, b, iters):
    """Maximize f on [a, b] by golden-section; returns (x, f(x))."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def maximize_acquisition(kind: str, state: SequentialState,
                         search_cfg: SearchConfig = SearchConfig()) -> np.ndarray:
    """Global candidate sweep plus local refinement; deterministic.

    Candidates come from an unscrambled Sobol set; those within the
    exclusion radius of an existing node are dropped (their posterior
    variance vanishes).  The top candidates are refined by golden-section
    search per coordinate.  Ties break toward the lexicographically
    smallest point.
    """
    d = state.spec.dim
    C = _sobol_candidates(search_cfg.candidates, d)
    if state.data.N > 0:
        dist = np.sqrt(np.sum((C[:, None, :] - state.data.X[None, :, :]) ** 2,
                              axis=-1))
        C = C[np.min(dist, axis=1) > search_cfg.exclusion_radius]
    if C.shape[0] == 0:
        raise RuntimeError("no admissible acquisition candidates remain")

    vals = acquisition_values(kind, state, C)
    order = np.lexsort(tuple(C[:, j] for j in range(d - 1, -1, -1)))
    C, vals = C[order], vals[order]
    top = np.argsort(-vals, kind="stable")[:search_cfg.top_k]

    def objective(x):
        x = np.clip(np.atleast_1d(x), 0.0, 1.0)
        if state.data.N > 0:
            dmin = np.min(np.sqrt(np.sum((state.data.X - x) ** 2, axis=-1)))
            if dmin <= search_cfg.exclusion_radius:
                return -np.inf
        return float(acquisition_values(kind, state, x.reshape(1, -1))[0])

    # bracket width: one candidate-grid cell on each side
    width = 1.0 / max(search_cfg.candidates ** (1.0 / d), 2.0)
    best_x, best_v = None, -np.inf
    for idx in top:
        x = C[idx].copy()
        v = vals[idx]
        for _ in range(1 if d == 1 else 3):  # coordinate sweeps for d > 1
            for j in range(d):
                def f1(t, x=x, j=j):
                    y = x.copy()
                    y[j] = t
                    return objective(y)
                lo = max(0.0, x[j] - width)
                hi = min(1.0, x[j] + width)
                t, vt = _golden_section(f1, lo, hi, search_cfg.refine_iters)
                if vt > v:
                    x[j], v = t, vt
        if v > best_v or (v == best_v and best_x is not None
                          and tuple(x) < tuple(best_x)):
            best_x, best_v = x, v
    return best_x


@dataclass(frozen=True)
class StoppingRule:
    """Stop at the node budget, or earlier once Sigma <= variance_tol."""

    budget: int
    variance_tol: float | None = None


@dataclass(frozen=True)
class TraceRow:
    N: int
    mu: float
    sigma2: float
    theta: tuple
    lambda_used: float


def run_sequential_bq(integrand, spec: KernelSpec, P: Measure,
                      acq_kind: str = "ivr",
                      stopping: StoppingRule = StoppingRule(budget=20),
                      seed: int = 0,
                      policy: NuggetPolicy = NuggetPolicy(),
                      refit: bool = True, ml_restarts: int = 3,
                      search_cfg: SearchConfig = SearchConfig(),
                      n_init: int | None = None):
    """Sequential Bayesian quadrature (myopic, batch size 1).

    Starts from min(budget, 5) random nodes drawn from P, then alternates:
    maximize the acquisition, evaluate the integrand, refit the kernel
    hyperparameters by ML-II (optional), and recompute the posterior.
    Returns (dataset, posterior, trace, stop_reason) where stop_reason is
    "budget" or "variance_tol" and each trace row records
    (N, mu, sigma2, theta, lambda_used).
    """
    from .seeds import rng_for

    rng = rng_for(seed, "sequential-init")
    if n_init is None:
        n_init = min(stopping.budget, 5)
    X0 = rng.uniform(size=(n_init, spec.dim))
    f0 = [_eval_finite(integrand, x, 0) for x in X0]
    data = Dataset(X0, f0)

    trace = []
    step = 0
    while True:
        if refit and data.N >= 2:
            spec = fit_ml(spec, data, restarts=ml_restarts, seed=seed,
                          policy=policy).spec
        state = make_state(spec, P, data, policy)
        post = bq_infer(spec, P, data, policy, sys=state.sys)
        theta = (spec.sigma2,) + tuple(spec.lengthscales)
        trace.append(TraceRow(N=data.N, mu=post.mu, sigma2=post.sigma2,
                              theta=theta, lambda_used=post.lambda_used))
        hit_tol = (stopping.variance_tol is not None
                   and post.sigma2 <= stopping.variance_tol)
        if hit_tol or data.N >= stopping.budget:
            return data, post, trace, ("variance_tol" if hit_tol else "budget")
        x_new = maximize_acquisition(acq_kind, state, search_cfg)
        data = data.append(x_new, _eval_finite(integrand, x_new, step + 1))
        state.step = step = step + 1


def _eval_finite(f, x, step):
    val = float(f(np.atleast_1d(x)) if callable(f) else f)
    if not np.isfinite(val):
        raise FloatingPointError(
            f"integrand returned non-finite value {val} at step {step}, x={x}")
    return val
