"""Random test-integrand families with analytic ground-truth integrals.

Two univariate families on [0,1]:

* ``fourier`` — a finite Fourier series
      f(x) = sqrt(2) * sum_{j=1}^{J} [a_j cos(2 pi j x / L) + u_j sin(2 pi j x / L)]
  with L=5, J=25 and coefficients drawn i.i.d. N(0, 2(J+1)) by default
  (the zero-frequency terms are fixed to zero).  Smooth (analytic).
* ``brownian_kl`` — a truncated Karhunen-Loeve expansion of Brownian motion,
      f(x) = sqrt(2) * sum_{j=1}^{500} a_j sin((j - 1/2) pi x) / ((j - 1/2) pi),
  a_j ~ N(0,1).  Rough (Hoelder-1/2 regularity in the limit).

True integrals over [0,1] follow term-wise from elementary antiderivatives
and are certified against adaptive quadrature (`true_integral_oracle`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .seeds import rng_for

FAMILIES = ("fourier", "brownian_kl")

FOURIER_L = 5.0
FOURIER_J = 25
BROWNIAN_KL_J = 500


@dataclass(frozen=True)
class TestFunction:
    """Callable test integrand with its exact integral over [0,1]."""

    __test__ = False  # not a pytest class despite the name

    family: str
    coefficients: dict
    params: dict
    true_integral: float
    id: int = 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 0
        t = np.atleast_1d(x).reshape(-1)
        if self.family == "fourier":
            a, u = self.coefficients["a"], self.coefficients["u"]
            L = self.params["L"]
            j = np.arange(1, len(a))
            ang = 2.0 * np.pi * np.outer(t, j) / L
            out = np.sqrt(2.0) * (np.cos(ang) @ a[1:] + np.sin(ang) @ u[1:])
        else:
            a = self.coefficients["a"]
            j = np.arange(1, len(a) + 1)
            freq = (j - 0.5) * np.pi
            out = np.sqrt(2.0) * (np.sin(np.outer(t, freq)) / freq) @ a
        return float(out[0]) if squeeze else out.reshape(np.shape(x))


def make_fourier(seed: int, coeff_scale: float | None = None,
                 J: int = FOURIER_J, L: float = FOURIER_L,
                 func_id: int = 0) -> TestFunction:
    """Draw one Fourier-series integrand.

    ``coeff_scale`` is the coefficient *variance*; default 2(J+1).  Pass
    1/(2(J+1)) to normalize the family to unit prior variance instead —
    relative-error scores are invariant to this choice.
    """
    if coeff_scale is None:
        coeff_scale = 2.0 * (J + 1)
    rng = rng_for(seed, "fourier-coefficients")
    sd = np.sqrt(coeff_scale)
    a = rng.normal(0.0, sd, size=J + 1)
    u = rng.normal(0.0, sd, size=J + 1)
    a[0] = u[0] = 0.0
    j = np.arange(1, J + 1)
    w = 2.0 * np.pi * j / L
    # int_0^1 cos(w x) dx = sin(w)/w ; int_0^1 sin(w x) dx = (1 - cos(w))/w
    integral = np.sqrt(2.0) * float(a[1:] @ (np.sin(w) / w)
                                    + u[1:] @ ((1.0 - np.cos(w)) / w))
    return TestFunction(family="fourier", coefficients={"a": a, "u": u},
                        params={"L": L, "J": J}, true_integral=integral,
                        id=func_id)


def make_brownian_path(seed: int, J: int = BROWNIAN_KL_J,
                       func_id: int = 0) -> TestFunction:
    """Draw one truncated-KL Brownian-path integrand."""
    rng = rng_for(seed, "brownian-kl-coefficients")
    a = rng.normal(0.0, 1.0, size=J)
    freq = (np.arange(1, J + 1) - 0.5) * np.pi
    # int_0^1 sin(freq x) dx = (1 - cos(freq))/freq = 1/freq since
    # cos((j-1/2) pi) = 0
    integral = np.sqrt(2.0) * float(np.sum(a / freq ** 2))
    return TestFunction(family="brownian_kl", coefficients={"a": a},
                        params={"J": J}, true_integral=integral, id=func_id)


def make_family(family: str, T: int, seed: int = 0, **kw) -> list:
    """T integrands with per-function substream seeds."""
    maker = {"fourier": make_fourier, "brownian_kl": make_brownian_path}
    try:
        mk = maker[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}") from None
    out = []
    for t in range(T):
        sub = int(rng_for(seed, f"{family}-function", t).integers(2 ** 62))
        out.append(mk(sub, func_id=t, **kw))
    return out


def true_integral_oracle(f, tol: float = 1e-10) -> float:
    """Adaptive quadrature of f over [0,1] to absolute tolerance tol."""
    val, err = integrate.quad(lambda t: float(f(t)), 0.0, 1.0,
                              epsabs=tol, epsrel=0.0, limit=1000)
    if err > 10.0 * max(tol, 1e-12):
        raise RuntimeError(f"quadrature budget exhausted: err={err:g}")
    return val
