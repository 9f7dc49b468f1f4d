"""Maximum marginal-likelihood (ML-II) hyperparameter estimation.

The log marginal likelihood of noiseless observations f_X under a GP prior is

    log L = -1/2 r^T (K + lambda I)^-1 r - 1/2 log det(K + lambda I)
            - N/2 log 2 pi,        r = f_X - m_X.

The output scale has a closed-form maximizer: with K0 the unit-scale Gram,
sigma2_hat = r^T K0^-1 r / N.  `fit_ml` therefore profiles the scale out and
runs a multi-restart Nelder-Mead search over the remaining parameters in
log space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .gp import FactorizationError, NuggetPolicy, cholesky_with_nugget, _mean_at_nodes
from .kernels import KernelSpec, gram

LOG2PI = np.log(2.0 * np.pi)

DEFAULT_BOUNDS = {"lengthscale": (1e-3, 1e3), "sigma2": (1e-6, 1e6)}


@dataclass(frozen=True)
class HyperParams:
    """Fitted hyperparameters with the achieved log marginal likelihood."""

    spec: KernelSpec
    log_marginal: float
    restarts_used: int = 0


def log_marginal(spec: KernelSpec, prior_mean, data,
                 policy: NuggetPolicy = NuggetPolicy()) -> float:
    """Log marginal likelihood via the guarded Cholesky factor."""
    sys = cholesky_with_nugget(gram(spec, data.X), policy)
    r = data.f_X - _mean_at_nodes(prior_mean, data.X)
    half = sys.half_solve(r)
    return float(-0.5 * (half @ half) - 0.5 * sys.log_det()
                 - 0.5 * data.N * LOG2PI)


def ml_scale_closed_form(spec_unit_scale: KernelSpec, data,
                         policy: NuggetPolicy = NuggetPolicy(),
                         prior_mean=0.0) -> float:
    """Closed-form ML scale given all other parameters fixed.

    ``spec_unit_scale`` must have sigma2 = 1; the regularized unit-scale
    Gram is used, so the nugget scales with sigma2 as in `log_marginal`.
    """
    if spec_unit_scale.sigma2 != 1.0:
        raise ValueError("pass a unit-scale spec")
    sys = cholesky_with_nugget(gram(spec_unit_scale, data.X), policy)
    r = data.f_X - _mean_at_nodes(prior_mean, data.X)
    half = sys.half_solve(r)
    return float(half @ half) / data.N


def _profiled_objective(template: KernelSpec, data, policy, prior_mean,
                        sigma2_bounds):
    """Return f(log_ls) -> -log L with the scale profiled out."""
    lo, hi = sigma2_bounds

    def neg_loglik(log_ls):
        ls = tuple(np.exp(log_ls))
        spec1 = template.with_params(sigma2=1.0, lengthscales=ls)
        try:
            s2 = ml_scale_closed_form(spec1, data, policy, prior_mean)
        except FactorizationError:
            return np.inf
        s2 = float(np.clip(s2, lo, hi))
        if s2 <= 0:
            s2 = lo
        try:
            return -log_marginal(spec1.with_params(sigma2=s2), prior_mean,
                                 data, policy)
        except FactorizationError:
            return np.inf

    return neg_loglik


def fit_ml(template: KernelSpec, data, bounds: dict = None, restarts: int = 5,
           seed: int = 0, policy: NuggetPolicy = NuggetPolicy(),
           prior_mean: float = 0.0) -> HyperParams:
    """Best-of-restarts ML-II fit.

    ``template`` fixes the family, smoothness and dimension; sigma2 and the
    length-scales are re-estimated.  The scale uses its closed form, so only
    log length-scales are searched (Nelder-Mead).  Deterministic given
    ``seed``; the reported optimum is never below the value at any restart's
    start point.  The Brownian kernel has no length-scale, so its fit is the
    closed-form scale alone.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    b = dict(DEFAULT_BOUNDS)
    if bounds:
        b.update(bounds)
    ls_lo, ls_hi = b["lengthscale"]
    s2_bounds = b["sigma2"]

    def finish(spec):
        return HyperParams(spec=spec,
                           log_marginal=log_marginal(spec, prior_mean, data,
                                                     policy),
                           restarts_used=restarts)

    if template.family == "brownian":
        s2 = ml_scale_closed_form(template.with_params(sigma2=1.0), data,
                                  policy, prior_mean)
        s2 = float(np.clip(s2, *s2_bounds))
        return finish(template.with_params(sigma2=max(s2, s2_bounds[0])))

    nls = len(template.lengthscales)
    obj = _profiled_objective(template, data, policy, prior_mean, s2_bounds)
    rng = np.random.default_rng(seed)
    lo, hi = np.log(ls_lo), np.log(ls_hi)

    starts = [np.log(np.asarray(template.lengthscales))]
    # restarts drawn log-uniformly inside a moderate sub-box of the bounds;
    # extreme corners only produce flat likelihoods
    sub_lo, sub_hi = max(lo, np.log(1e-2)), min(hi, np.log(1e1))
    while len(starts) < restarts:
        starts.append(rng.uniform(sub_lo, sub_hi, size=nls))

    best_val, best_x = np.inf, None
    for x0 in starts:
        x0 = np.clip(x0, lo, hi)
        v0 = obj(x0)
        if v0 < best_val:
            best_val, best_x = v0, x0
        res = minimize(obj, x0, method="Nelder-Mead",
                       options={"xatol": 1e-5, "fatol": 1e-8, "maxiter": 400})
        x = np.clip(res.x, lo, hi)
        v = obj(x)
        if np.isfinite(v) and v < best_val:
            best_val, best_x = v, x
    if best_x is None or not np.isfinite(best_val):
        raise FactorizationError("every ML-II restart failed factorization")

    ls = tuple(np.exp(best_x))
    spec1 = template.with_params(sigma2=1.0, lengthscales=ls)
    s2 = ml_scale_closed_form(spec1, data, policy, prior_mean)
    s2 = float(np.clip(s2, *s2_bounds))
    return finish(spec1.with_params(sigma2=max(s2, s2_bounds[0])))
