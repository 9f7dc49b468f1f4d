"""Conjugate Bayesian quadrature: weights, posterior, worst-case error.

Given noiseless evaluations f_X at nodes X, the posterior over the integral
I_P(f) is Gaussian with

    mu     = m_P + w^T (f_X - m_X),      w = (K_XX + lambda I)^-1 k_PX,
    sigma2 = k_PP - w^T k_PX.

Weights may be negative.  `worst_case_error` evaluates the RKHS worst-case
integration error of an arbitrary weight vector; at the BQ weights (with
lambda -> 0) it equals sqrt(sigma2), which is the optimality property the
tests exercise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import Measure, initial_variance, kernel_mean_vector
from .gp import FactoredSystem, NuggetPolicy, cholesky_with_nugget, _mean_at_nodes
from .kernels import KernelSpec, _as_points, gram


@dataclass(frozen=True)
class Dataset:
    """Nodes X in [0,1]^d (pairwise distinct) with integrand values f_X."""

    X: np.ndarray
    f_X: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        f = np.asarray(self.f_X, dtype=float).reshape(-1)
        if X.shape[0] != f.shape[0]:
            raise ValueError("X and f_X lengths differ")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "f_X", f)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def append(self, x, fx) -> "Dataset":
        x = np.asarray(x, dtype=float).reshape(1, -1)
        return Dataset(np.vstack([self.X, x]), np.append(self.f_X, float(fx)))


def empty_dataset(dim: int = 1) -> Dataset:
    return Dataset(np.empty((0, dim)), np.empty(0))


@dataclass(frozen=True)
class BQPosterior:
    """Gaussian posterior over the integral plus the weights that produced it."""

    mu: float
    sigma2: float
    weights: np.ndarray
    lambda_used: float


def bq_weights(spec: KernelSpec, P: Measure, X,
               policy: NuggetPolicy = NuggetPolicy()) -> tuple:
    """Solve (K_XX + lambda I) w = k_PX; returns (w, lambda_used)."""
    sys = cholesky_with_nugget(gram(spec, X), policy)
    k_PX = kernel_mean_vector(spec, P, X)
    return sys.solve(k_PX), sys.lambda_used


def bq_infer(spec: KernelSpec, P: Measure, data: Dataset,
             policy: NuggetPolicy = NuggetPolicy(),
             prior_mean: float = 0.0,
             sys: FactoredSystem = None) -> BQPosterior:
    """Posterior mean and variance of the integral.

    Only constant prior means are supported; for those the prior-mean
    integral m_P is the constant itself.  Pass a precomputed ``sys`` to
    reuse a factorization across calls with the same nodes.
    """
    if sys is None:
        sys = cholesky_with_nugget(gram(spec, data.X), policy)
    k_PX = kernel_mean_vector(spec, P, data.X)
    k_PP = initial_variance(spec, P)
    w = sys.solve(k_PX)
    resid = data.f_X - _mean_at_nodes(prior_mean, data.X)
    mu = float(prior_mean) + float(w @ resid)
    sigma2 = k_PP - float(w @ k_PX)
    return BQPosterior(mu=mu, sigma2=max(sigma2, 0.0), weights=w,
                       lambda_used=sys.lambda_used)


def normalized_weights(spec: KernelSpec, P: Measure, X,
                       policy: NuggetPolicy = NuggetPolicy()) -> np.ndarray:
    """BQ weights projected to sum to one (constant-trend variant).

    w_1 = w + (1 - 1^T w) / (1^T K^-1 1) * K^-1 1, which is the usual
    closed form for universal kriging with a constant basis.
    """
    sys = cholesky_with_nugget(gram(spec, X), policy)
    k_PX = kernel_mean_vector(spec, P, X)
    w = sys.solve(k_PX)
    ones = np.ones(len(w))
    Kinv1 = sys.solve(ones)
    w1 = w + (1.0 - ones @ w) / (ones @ Kinv1) * Kinv1
    return w1


def worst_case_error(spec: KernelSpec, P: Measure, v, X) -> float:
    """RKHS worst-case integration error of the rule sum v_i f(x_i).

    Equals sqrt(k_PP - 2 v^T k_PX + v^T K_XX v), clamped at zero for
    round-off.  Minimized exactly at the (lambda=0) BQ weights, where it
    coincides with the posterior standard deviation.
    """
    X = _as_points(X, spec.dim)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != X.shape[0]:
        raise ValueError("weight vector and node set lengths differ")
    k_PX = kernel_mean_vector(spec, P, X)
    k_PP = initial_variance(spec, P)
    K = gram(spec, X)
    val = k_PP - 2.0 * float(v @ k_PX) + float(v @ K @ v)
    return float(np.sqrt(max(val, 0.0)))


def rkhs_norm_translates(spec: KernelSpec, c, Z) -> float:
    """Norm of f = sum_j c_j k(., z_j): ||f||^2 = c^T K_ZZ c."""
    c = np.asarray(c, dtype=float).reshape(-1)
    K = gram(spec, Z)
    return float(np.sqrt(max(c @ K @ c, 0.0)))
