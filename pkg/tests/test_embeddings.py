import numpy as np
import pytest
from scipy.special import erf

from bquad.embeddings import (Measure, UnsupportedEmbedding, embedding_vector,
                              initial_variance, kernel_mean,
                              kernel_mean_vector, oracle_embedding,
                              oracle_initial_variance)
from bquad.kernels import KernelSpec

P1 = Measure(dim=1)
P2 = Measure(dim=2)

# every (spec, measure) pair with a closed form, d in {1, 2}
CERTIFIED = [
    (KernelSpec("se", lengthscales=(1.0,)), P1),
    (KernelSpec("se", sigma2=2.5, lengthscales=(0.25,)), P1),
    (KernelSpec("se", lengthscales=(0.4, 0.9), dim=2), P2),
    (KernelSpec("matern", nu=0.5, lengthscales=(0.5,)), P1),
    (KernelSpec("matern", nu=1.5, lengthscales=(0.3,)), P1),
    (KernelSpec("matern", nu=2.5, lengthscales=(0.8,)), P1),
    (KernelSpec("matern_prod", nu=0.5, lengthscales=(0.6, 0.2), dim=2), P2),
    (KernelSpec("matern_prod", nu=1.5, lengthscales=(0.3, 0.5), dim=2), P2),
    (KernelSpec("matern_prod", nu=2.5, lengthscales=(0.4, 0.7), dim=2), P2),
    (KernelSpec("brownian"), P1),
]


def _ids(val):
    if isinstance(val, KernelSpec):
        return f"{val.family}{val.nu or ''}d{val.dim}"
    return ""


def test_se_closed_form_at_half():
    spec = KernelSpec("se", lengthscales=(1.0,))
    want = np.sqrt(np.pi / 2.0) * 2.0 * erf(0.5 / np.sqrt(2.0))
    assert kernel_mean(spec, P1, [0.5]) == pytest.approx(want, abs=1e-14)
    assert kernel_mean(spec, P1, [0.5]) == pytest.approx(0.959850, abs=1e-6)


def test_se_initial_variance_formula():
    l = 1.0
    spec = KernelSpec("se", lengthscales=(l,))
    want = (2 * l ** 2 * (np.exp(-1 / (2 * l ** 2)) - 1)
            + np.sqrt(2 * np.pi * l ** 2) * erf(1 / (l * np.sqrt(2))))
    assert initial_variance(spec, P1) == pytest.approx(want, abs=1e-14)


def test_brownian_embedding_values():
    spec = KernelSpec("brownian")
    assert kernel_mean(spec, P1, [0.0]) == 0.0
    assert kernel_mean(spec, P1, [1.0]) == pytest.approx(0.5, abs=1e-15)
    assert initial_variance(spec, P1) == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_scale_linearity():
    s1 = KernelSpec("se", sigma2=1.0, lengthscales=(0.6,))
    s4 = s1.with_params(sigma2=4.0)
    assert initial_variance(s4, P1) == pytest.approx(
        4.0 * initial_variance(s1, P1), rel=1e-14)
    assert kernel_mean(s4, P1, [0.3]) == pytest.approx(
        4.0 * kernel_mean(s1, P1, [0.3]), rel=1e-14)


@pytest.mark.parametrize("spec,P", CERTIFIED, ids=_ids)
def test_closed_form_vs_oracle_50_points(spec, P):
    """The anti-hallucination gate: every closed form must match adaptive
    quadrature at 50 random points."""
    rng = np.random.default_rng(42)
    n = 50 if P.dim == 1 else 12   # tensorized oracle is slow in d=2
    for _ in range(n):
        x = rng.uniform(size=P.dim)
        closed = kernel_mean(spec, P, x)
        assert closed == pytest.approx(oracle_embedding(spec, P, x, tol=1e-10),
                                       abs=1e-8)


@pytest.mark.parametrize("spec,P", CERTIFIED, ids=_ids)
def test_initial_variance_vs_oracle(spec, P):
    closed = initial_variance(spec, P)
    if P.dim == 1:
        assert closed == pytest.approx(
            oracle_initial_variance(spec, P, tol=1e-9), abs=1e-8)
    else:
        assert closed == pytest.approx(
            oracle_initial_variance(spec, P, tol=1e-9), abs=1e-8)


@pytest.mark.parametrize("spec,P", CERTIFIED, ids=_ids)
def test_positivity_bounds(spec, P):
    rng = np.random.default_rng(9)
    kpp = initial_variance(spec, P)
    assert kpp >= 0.0
    if spec.family != "brownian":
        assert 0.0 < kpp <= spec.sigma2
    for _ in range(25):
        x = rng.uniform(size=P.dim)
        kp = kernel_mean(spec, P, x)
        if spec.family != "brownian":
            assert 0.0 < kp <= spec.sigma2


def test_product_factorization():
    spec = KernelSpec("matern_prod", nu=1.5, lengthscales=(0.3, 0.5), dim=2)
    x = np.array([0.2, 0.8])
    prod = 1.0
    for j, l in enumerate((0.3, 0.5)):
        prod *= kernel_mean(KernelSpec("matern", nu=1.5, lengthscales=(l,)),
                            P1, [x[j]])
    assert kernel_mean(spec, P2, x) == pytest.approx(prod, rel=1e-12)
    v1 = initial_variance(KernelSpec("matern", nu=1.5, lengthscales=(0.3,)), P1)
    v2 = initial_variance(KernelSpec("matern", nu=1.5, lengthscales=(0.5,)), P1)
    assert initial_variance(spec, P2) == pytest.approx(v1 * v2, rel=1e-12)


def test_matern_iso_d2_unsupported():
    spec = KernelSpec("matern", nu=1.5, lengthscales=(0.3, 0.3), dim=2)
    with pytest.raises(UnsupportedEmbedding):
        kernel_mean(spec, P2, [0.5, 0.5])
    # ...but the oracle still handles it
    val = oracle_embedding(spec, P2, [0.5, 0.5], tol=1e-8)
    assert 0.0 < val < 1.0


def test_embedding_vector_bundle():
    spec = KernelSpec("se", lengthscales=(0.5,))
    X = np.array([[0.1], [0.9]])
    ev = embedding_vector(spec, P1, X, prior_mean=2.0)
    assert ev.k_PX.shape == (2,)
    assert ev.m_P == 2.0
    assert np.allclose(ev.k_PX, kernel_mean_vector(spec, P1, X))


def test_measure_validation():
    with pytest.raises(ValueError):
        Measure(kind="gaussian")
    with pytest.raises(ValueError):
        kernel_mean(KernelSpec("se"), P2, [0.5, 0.5])  # dim mismatch


def test_density_indicator():
    assert P1.density([[0.5]])[0] == 1.0
    assert P1.density([[1.5]])[0] == 0.0
