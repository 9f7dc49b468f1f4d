"""Node-generation strategies and design-geometry diagnostics.

Strategies (config names in parentheses): uniform random draws from the
measure ("random"), Latin hypercube ("lhs"), unscrambled Sobol ("sobol"),
Gauss-Legendre roots mapped to [0,1] ("legendre"), and the regular tensor
grid {1/(n+1), ..., n/(n+1)} ("grid").  Legendre and grid designs are
deterministic; the random strategies are reproducible given a seed.

Sobol points for a non-power-of-two n are the first n points of the next
power-of-two block, so nested budgets share a common prefix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

STRATEGIES = ("random", "lhs", "sobol", "legendre", "grid")

_SOBOL_MAX_DIM = 16


@dataclass(frozen=True)
class DesignSpec:
    strategy: str
    dim: int = 1
    n: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; "
                             f"choose from {STRATEGIES}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.strategy == "sobol" and self.dim > _SOBOL_MAX_DIM:
            raise ValueError(f"sobol supported up to d={_SOBOL_MAX_DIM}")


@dataclass(frozen=True)
class DesignGeometry:
    """Fill distance h_X, separation radius q_X and mesh ratio h_X/q_X."""

    fill_distance: float
    separation_radius: float
    mesh_ratio: float
    fill_exact: bool = True


def legendre_roots(n: int) -> np.ndarray:
    """Roots of the degree-n Legendre polynomial by Newton iteration.

    P_n is evaluated through the three-term recurrence; the derivative
    comes from the standard identity.  Initial guesses are the usual
    Chebyshev-like approximations, accurate enough for quadratic Newton
    convergence at any practical n.
    """
    roots = np.empty(n)
    for i in range(1, n + 1):
        x = np.cos(np.pi * (4 * i - 1) / (4 * n + 2))
        for _ in range(100):
            p_prev, p = 1.0, x
            for k in range(2, n + 1):
                p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
            if n == 1:
                p, p_prev = x, 1.0
            dp = n * (x * p - p_prev) / (x * x - 1.0)
            step = p / dp
            x -= step
            if abs(step) < 1e-15:
                break
        roots[i - 1] = x
    return np.sort(roots)


def generate_design(spec: DesignSpec) -> np.ndarray:
    """Generate n pairwise-distinct points in [0,1]^dim, shape (n, dim)."""
    n, d = spec.n, spec.dim
    if spec.strategy == "random":
        return np.random.default_rng(spec.seed).uniform(size=(n, d))
    if spec.strategy == "lhs":
        return qmc.LatinHypercube(d=d, seed=spec.seed).random(n)
    if spec.strategy == "sobol":
        m = max(int(np.ceil(np.log2(n))), 0)
        pts = qmc.Sobol(d=d, scramble=False).random_base2(m)
        return pts[:n]
    if spec.strategy == "legendre":
        if d != 1:
            raise ValueError("legendre design is one-dimensional")
        return (0.5 * (legendre_roots(n) + 1.0)).reshape(-1, 1)
    # grid: requires n = m^d points for a regular tensor grid
    m = round(n ** (1.0 / d))
    if m ** d != n:
        raise ValueError(f"tensor grid needs n = m^{d}; got n={n}")
    axis = np.arange(1, m + 1) / (m + 1.0)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=-1)


def design_geometry(X, grid_resolution: int = 256) -> DesignGeometry:
    """Geometry diagnostics of a node set on [0,1]^d.

    The separation radius is exact.  The fill distance is exact in d=1
    (largest half-gap including the two boundary gaps); for d >= 2 it is
    evaluated on a regular lattice of ``grid_resolution`` points per axis
    and is therefore a lower bound.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    n, d = X.shape
    if n < 2:
        raise ValueError("separation radius undefined for a single node")
    dist = np.sqrt(np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1))
    np.fill_diagonal(dist, np.inf)
    q = 0.5 * float(np.min(dist))
    if q == 0.0:
        raise ValueError("duplicate nodes")
    if d == 1:
        xs = np.sort(X[:, 0])
        h = float(max(xs[0], 1.0 - xs[-1], np.max(np.diff(xs)) / 2.0
                      if n > 1 else 0.0))
        exact = True
    else:
        axis = np.linspace(0.0, 1.0, grid_resolution)
        mesh = np.meshgrid(*([axis] * d), indexing="ij")
        G = np.stack([g.ravel() for g in mesh], axis=-1)
        dmin = np.full(G.shape[0], np.inf)
        for row in X:
            dmin = np.minimum(dmin, np.sqrt(np.sum((G - row) ** 2, axis=-1)))
        h = float(np.max(dmin))
        exact = False
    return DesignGeometry(fill_distance=h, separation_radius=q,
                          mesh_ratio=h / q, fill_exact=exact)
