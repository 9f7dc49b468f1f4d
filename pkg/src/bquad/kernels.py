"""Covariance functions and Gram-matrix assembly.

Four families are supported:

``se``
    Square-exponential, ``k(x,y) = s2 * exp(-sum_i (x_i-y_i)^2 / (2 l_i^2))``.
    In dimension d this equals a product of one-dimensional SE kernels.
``matern``
    Isotropic Matern with half-integer smoothness nu in {1/2, 3/2, 5/2},
    ``k(x,y) = s2 * P(z) exp(-z)`` with ``z = sqrt(2 nu) r`` and
    ``r = sqrt(sum_i ((x_i-y_i)/l_i)^2)``.  P is the elementary polynomial
    associated with each half-integer nu, so no Bessel evaluation is needed.
``matern_prod``
    Dimension-wise product of one-dimensional Matern kernels (same nu in
    every dimension, one length-scale per dimension).  Coincides with
    ``matern`` in d=1.
``brownian``
    Brownian-motion covariance ``k(x,y) = s2 * min(x, y)`` on [0, 1];
    one-dimensional and non-stationary.

Distances are formed from explicit coordinate differences rather than the
expanded-square shortcut; acquisition search evaluates nearly coincident
points where the cancellation would hurt.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("se", "matern", "matern_prod", "brownian")

#: polynomial coefficients of P(z) = sum_k c_k z^k for half-integer Matern
_MATERN_POLY = {
    0.5: (1.0,),
    1.5: (1.0, 1.0),
    2.5: (1.0, 1.0, 1.0 / 3.0),
}

#: names accepted in config files -> (family, nu)
CONFIG_NAMES = {
    "se": ("se", None),
    "matern12": ("matern", 0.5),
    "matern32": ("matern", 1.5),
    "matern52": ("matern", 2.5),
    "matern_prod12": ("matern_prod", 0.5),
    "matern_prod32": ("matern_prod", 1.5),
    "matern_prod52": ("matern_prod", 2.5),
    "brownian": ("brownian", None),
}


@dataclass(frozen=True)
class KernelSpec:
    """Immutable description of a covariance function.

    Parameters
    ----------
    family : str
        One of ``se``, ``matern``, ``matern_prod``, ``brownian``.
    sigma2 : float
        Output scale, > 0.
    lengthscales : tuple of float
        One positive length-scale per dimension (ignored by ``brownian``).
    nu : float or None
        Half-integer smoothness for the Matern families, in {1/2, 3/2, 5/2}.
    dim : int
        Input dimension d >= 1 (``brownian`` requires d = 1).
    """

    family: str
    sigma2: float = 1.0
    lengthscales: tuple = (1.0,)
    nu: float | None = None
    dim: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not np.isfinite(self.sigma2) or self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive and finite")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        ls = tuple(float(l) for l in np.atleast_1d(self.lengthscales))
        if len(ls) == 1 and self.dim > 1:
            ls = ls * self.dim
        object.__setattr__(self, "lengthscales", ls)
        if self.family != "brownian":
            if len(ls) != self.dim:
                raise ValueError("need one lengthscale per dimension")
            if any(l <= 0 or not np.isfinite(l) for l in ls):
                raise ValueError("lengthscales must be positive and finite")
        if self.family in ("matern", "matern_prod"):
            if self.nu not in _MATERN_POLY:
                raise ValueError("nu must be one of 1/2, 3/2, 5/2")
        if self.family == "brownian" and self.dim != 1:
            raise ValueError("brownian kernel is one-dimensional")

    def with_params(self, **kw) -> "KernelSpec":
        """Copy with some hyperparameters replaced."""
        d = dict(family=self.family, sigma2=self.sigma2,
                 lengthscales=self.lengthscales, nu=self.nu, dim=self.dim)
        d.update(kw)
        return KernelSpec(**d)


def kernel_from_name(name: str, dim: int = 1, sigma2: float = 1.0,
                     lengthscales=(1.0,)) -> KernelSpec:
    """Build a KernelSpec from a config-file name such as ``matern32``."""
    try:
        family, nu = CONFIG_NAMES[name]
    except KeyError:
        raise ValueError(
            f"unknown kernel name {name!r}; choose from {sorted(CONFIG_NAMES)}"
        ) from None
    return KernelSpec(family=family, sigma2=sigma2, lengthscales=lengthscales,
                      nu=nu, dim=dim)


def _as_points(X, dim):
    """Coerce input to an (N, dim) float array."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1) if dim == 1 else X.reshape(1, -1)
    if X.shape[1] != dim:
        raise ValueError(f"points have dimension {X.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite input point")
    return X


def _matern_profile(z, nu):
    """Unit-scale half-integer Matern profile P(z) exp(-z) for z >= 0."""
    c = _MATERN_POLY[nu]
    p = np.zeros_like(z)
    for k in range(len(c) - 1, -1, -1):
        p = p * z + c[k]
    return p * np.exp(-z)


def cross(spec: KernelSpec, X, Y) -> np.ndarray:
    """Cross-covariance matrix k(X, Y) of shape (N, M)."""
    X = _as_points(X, spec.dim)
    Y = _as_points(Y, spec.dim)
    s2 = spec.sigma2
    if spec.family == "brownian":
        if np.any(X < 0) or np.any(Y < 0):
            raise ValueError("brownian kernel requires nonnegative inputs")
        return s2 * np.minimum(X[:, 0][:, None], Y[:, 0][None, :])
    ls = np.asarray(spec.lengthscales)
    diff = (X[:, None, :] - Y[None, :, :]) / ls
    if spec.family == "se":
        return s2 * np.exp(-0.5 * np.sum(diff * diff, axis=-1))
    if spec.family == "matern":
        r = np.sqrt(np.sum(diff * diff, axis=-1))
        return s2 * _matern_profile(np.sqrt(2.0 * spec.nu) * r, spec.nu)
    # matern_prod: product of 1-d profiles over dimensions
    z = np.sqrt(2.0 * spec.nu) * np.abs(diff)
    return s2 * np.prod(_matern_profile(z, spec.nu), axis=-1)


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate k(x, y) for two single points."""
    return float(cross(spec, [x] if np.ndim(x) == 0 else x,
                       [y] if np.ndim(y) == 0 else y)[0, 0])


def kernel_diag(spec: KernelSpec, X) -> np.ndarray:
    """Vector of k(x_i, x_i) for each row of X."""
    X = _as_points(X, spec.dim)
    if spec.family == "brownian":
        return spec.sigma2 * X[:, 0].copy()
    return np.full(X.shape[0], spec.sigma2)


def gram(spec: KernelSpec, X) -> np.ndarray:
    """Gram matrix K_XX; rejects duplicate nodes.

    Nodes must be pairwise distinct, otherwise the matrix is exactly
    singular and the quadrature weights are not identifiable.
    """
    X = _as_points(X, spec.dim)
    n = X.shape[0]
    if n == 0:
        raise ValueError("empty node set")
    if n > 1:
        d2 = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1)
        np.fill_diagonal(d2, np.inf)
        if np.min(d2) == 0.0:
            raise ValueError("duplicate nodes in design")
    K = cross(spec, X, X)
    return 0.5 * (K + K.T)  # enforce exact symmetry against round-off
