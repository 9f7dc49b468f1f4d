"""Guarded Cholesky factorization and GP conditional moments.

The Gram matrix is regularized with a nugget built from three terms:
two fixed jitters (defaults 1e-10 and 1e-8) plus a dynamic term a_bar * m
where a_bar is the mean diagonal of the jittered matrix and m walks up an
increasing ladder of multipliers until the Cholesky factorization succeeds.
The dynamic term starts from zero on every call; if even the largest
multiplier cannot repair the matrix a `FactorizationError` is raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .kernels import KernelSpec, _as_points, cross, gram, kernel_diag


class FactorizationError(RuntimeError):
    """All nugget-ladder rungs exhausted without a successful Cholesky."""


@dataclass(frozen=True)
class NuggetPolicy:
    """Composition of the diagonal regularizer lambda.

    lambda = fixed_a + fixed_b + a_bar * m_i with m_i the smallest ladder
    multiplier at which factorization succeeds.
    """

    fixed_a: float = 1e-10
    fixed_b: float = 1e-8
    dynamic_multipliers: tuple = (0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2)

    def __post_init__(self):
        m = tuple(float(v) for v in self.dynamic_multipliers)
        if any(v < 0 for v in m) or self.fixed_a < 0 or self.fixed_b < 0:
            raise ValueError("nugget terms must be nonnegative")
        tail = [v for v in m if v > 0]
        if any(b <= a for a, b in zip(tail, tail[1:])):
            raise ValueError("dynamic multipliers must be strictly increasing")
        object.__setattr__(self, "dynamic_multipliers", m)


#: policy with no regularization at all, for exactness tests
ZERO_NUGGET = NuggetPolicy(fixed_a=0.0, fixed_b=0.0, dynamic_multipliers=(0.0,))


@dataclass(frozen=True)
class FactoredSystem:
    """Lower Cholesky factor of K + lambda_used * I."""

    chol_factor: np.ndarray
    lambda_used: float
    n: int

    def solve(self, b) -> np.ndarray:
        """Solve (K + lambda I) z = b."""
        return cho_solve((self.chol_factor, True), np.asarray(b, dtype=float))

    def half_solve(self, b) -> np.ndarray:
        """Solve L z = b (useful for quadratic forms b^T (K+lambda I)^-1 b)."""
        return solve_triangular(self.chol_factor, np.asarray(b, dtype=float),
                                lower=True)

    def log_det(self) -> float:
        """log det(K + lambda I) from the factor diagonal."""
        return 2.0 * float(np.sum(np.log(np.diag(self.chol_factor))))


def cholesky_with_nugget(K: np.ndarray, policy: NuggetPolicy = NuggetPolicy()
                         ) -> FactoredSystem:
    """Factor K + lambda I, climbing the nugget ladder as needed."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("K must be square")
    if not np.all(np.isfinite(K)):
        raise ValueError("non-finite entries in K")
    if not np.allclose(K, K.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(K).max())):
        raise ValueError("K must be symmetric")
    n = K.shape[0]
    fixed = policy.fixed_a + policy.fixed_b
    base = K + fixed * np.eye(n)
    a_bar = float(np.mean(np.diag(base)))
    for m in policy.dynamic_multipliers:
        try:
            L = np.linalg.cholesky(base + (a_bar * m) * np.eye(n))
        except np.linalg.LinAlgError:
            continue
        return FactoredSystem(chol_factor=L, lambda_used=fixed + a_bar * m, n=n)
    raise FactorizationError(
        f"Cholesky failed at every ladder rung (n={n}, "
        f"largest multiplier {policy.dynamic_multipliers[-1]:g})")


def factor_gram(spec: KernelSpec, X, policy: NuggetPolicy = NuggetPolicy()
                ) -> FactoredSystem:
    """Convenience: assemble the Gram matrix of X and factor it."""
    return cholesky_with_nugget(gram(spec, X), policy)


def gp_posterior_at(spec: KernelSpec, prior_mean, data, sys: FactoredSystem,
                    x) -> tuple:
    """Conditional mean and variance of the GP at a single point.

    Parameters
    ----------
    prior_mean : callable, float, or None
        Prior mean function m(x); None means zero.
    data : Dataset or None
        Observed nodes and values; None/empty returns the prior moments.
    sys : FactoredSystem or None
        Factorization of the (regularized) Gram matrix of ``data.X``.
    """
    x = _as_points(x, spec.dim)
    kxx = float(kernel_diag(spec, x)[0])
    m = _mean_at(prior_mean, x)
    if data is None or data.N == 0:
        return m, kxx
    kx = cross(spec, data.X, x)[:, 0]
    alpha = sys.solve(data.f_X - _mean_at_nodes(prior_mean, data.X))
    half = sys.half_solve(kx)
    var = kxx - float(half @ half)
    if var < -1e-8:
        raise FloatingPointError(f"posterior variance {var:g} below tolerance")
    return m + float(kx @ alpha), max(var, 0.0)


def _mean_at(prior_mean, x) -> float:
    if prior_mean is None:
        return 0.0
    if callable(prior_mean):
        return float(prior_mean(np.asarray(x).reshape(-1)))
    return float(prior_mean)


def _mean_at_nodes(prior_mean, X) -> np.ndarray:
    X = np.asarray(X)
    if prior_mean is None:
        return np.zeros(X.shape[0])
    if callable(prior_mean):
        return np.array([float(prior_mean(row)) for row in X])
    return np.full(X.shape[0], float(prior_mean))
