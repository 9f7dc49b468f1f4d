import numpy as np
import pytest

from bquad.embeddings import Measure, initial_variance, kernel_mean
from bquad.gp import NuggetPolicy, ZERO_NUGGET
from bquad.kernels import KernelSpec, kernel_eval
from bquad.quadrature import (BQPosterior, Dataset, bq_infer, bq_weights,
                              empty_dataset, normalized_weights,
                              rkhs_norm_translates, worst_case_error)

P = Measure(dim=1)
TINY = NuggetPolicy(fixed_a=0.0, fixed_b=1e-12, dynamic_multipliers=(0.0,))

ALL_SPECS = [
    KernelSpec("se", lengthscales=(0.4,)),
    KernelSpec("matern", nu=0.5, lengthscales=(0.5,)),
    KernelSpec("matern", nu=1.5, lengthscales=(0.3,)),
    KernelSpec("matern", nu=2.5, lengthscales=(0.6,)),
    KernelSpec("brownian"),
]


def test_single_node_weight():
    spec = KernelSpec("se", lengthscales=(0.5,))
    w, lam = bq_weights(spec, P, [[0.4]], ZERO_NUGGET)
    want = kernel_mean(spec, P, [0.4]) / kernel_eval(spec, [0.4], [0.4])
    assert w[0] == pytest.approx(want, rel=1e-12)
    assert lam == 0.0


def test_brownian_two_node_weights():
    w, _ = bq_weights(KernelSpec("brownian"), P, [[0.5], [1.0]], ZERO_NUGGET)
    assert np.allclose(w, [0.5, 0.25], atol=1e-12)


def test_trapezoid_equivalence():
    """Brownian kernel with nodes ending at 1: the posterior mean is the
    trapezoid rule (for f(0)=0) and the variance is sum(gap^3)/12."""
    spec = KernelSpec("brownian")
    X = np.array([[0.25], [0.5], [0.75], [1.0]])
    f = X[:, 0] ** 2  # any integrand with f(0) = 0
    post = bq_infer(spec, P, Dataset(X, f), ZERO_NUGGET)
    xs = np.concatenate([[0.0], X[:, 0]])
    fs = np.concatenate([[0.0], f])
    trap = float(np.trapezoid(fs, xs))
    assert post.mu == pytest.approx(trap, abs=1e-10)
    assert post.sigma2 == pytest.approx(4 * 0.25 ** 3 / 12.0, abs=1e-12)


def test_trapezoid_uneven_gaps():
    spec = KernelSpec("brownian")
    X = np.array([[0.1], [0.4], [1.0]])
    f = np.sin(X[:, 0])
    post = bq_infer(spec, P, Dataset(X, f), ZERO_NUGGET)
    xs = np.concatenate([[0.0], X[:, 0]])
    fs = np.concatenate([[0.0], f])
    assert post.mu == pytest.approx(float(np.trapezoid(fs, xs)), abs=1e-10)
    gaps = np.diff(xs)
    assert post.sigma2 == pytest.approx(float(np.sum(gaps ** 3)) / 12.0,
                                        abs=1e-12)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: f"{s.family}{s.nu or ''}")
def test_translate_exactness(spec):
    """f = k(., x_i) is integrated exactly: mu = k_P(x_i)."""
    rng = np.random.default_rng(17)
    X = np.sort(rng.uniform(0.05, 0.95, size=8)).reshape(-1, 1)
    for i in range(8):
        f = np.array([kernel_eval(spec, x, X[i]) for x in X])
        post = bq_infer(spec, P, Dataset(X, f), TINY)
        assert post.mu == pytest.approx(kernel_mean(spec, P, X[i]), abs=1e-8)


def test_zero_data_zero_mean():
    post = bq_infer(KernelSpec("se"), P, Dataset([[0.5]], [0.0]), ZERO_NUGGET)
    assert post.mu == 0.0


def test_constant_prior_mean_shifts():
    spec = KernelSpec("se", lengthscales=(0.4,))
    X = np.array([[0.2], [0.7]])
    f = np.array([3.0, 3.0])
    post = bq_infer(spec, P, Dataset(X, f), ZERO_NUGGET, prior_mean=3.0)
    assert post.mu == pytest.approx(3.0, abs=1e-12)


def test_worst_case_error_zero_weights():
    spec = KernelSpec("matern", nu=1.5, lengthscales=(0.3,))
    X = np.array([[0.3], [0.6]])
    assert worst_case_error(spec, P, [0.0, 0.0], X) == pytest.approx(
        np.sqrt(initial_variance(spec, P)), rel=1e-12)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: f"{s.family}{s.nu or ''}")
def test_wce_equals_posterior_sd_at_bq_weights(spec):
    rng = np.random.default_rng(23)
    X = np.sort(rng.uniform(0.05, 0.95, size=6)).reshape(-1, 1)
    w, _ = bq_weights(spec, P, X, ZERO_NUGGET)
    post = bq_infer(spec, P, Dataset(X, np.zeros(6)), ZERO_NUGGET)
    assert worst_case_error(spec, P, w, X) == pytest.approx(
        np.sqrt(post.sigma2), abs=1e-8)


def test_wce_minimized_at_bq_weights():
    spec = KernelSpec("se", lengthscales=(0.5,))
    rng = np.random.default_rng(29)
    X = np.sort(rng.uniform(size=5)).reshape(-1, 1)
    w, _ = bq_weights(spec, P, X, ZERO_NUGGET)
    base = worst_case_error(spec, P, w, X)
    for _ in range(100):
        d = rng.normal(size=5)
        d *= 1e-2 / np.linalg.norm(d)
        assert worst_case_error(spec, P, w + d, X) > base


def test_uniform_weight_bound():
    rng = np.random.default_rng(31)
    spec = KernelSpec("matern", nu=2.5, lengthscales=(0.4,))
    for _ in range(10):
        n = rng.integers(2, 9)
        X = np.sort(rng.uniform(size=n)).reshape(-1, 1)
        post = bq_infer(spec, P, Dataset(X, np.zeros(n)), ZERO_NUGGET)
        u = np.full(n, 1.0 / n)
        assert worst_case_error(spec, P, u, X) ** 2 >= post.sigma2 - 1e-12


def test_variance_monotone_under_nesting():
    rng = np.random.default_rng(37)
    spec = KernelSpec("se", lengthscales=(0.3,))
    for _ in range(50):
        n = rng.integers(2, 8)
        X = rng.uniform(size=(n + 3, 1))
        if len(np.unique(X)) < n + 3:
            continue
        small = bq_infer(spec, P, Dataset(X[:n], np.zeros(n)), ZERO_NUGGET)
        big = bq_infer(spec, P, Dataset(X, np.zeros(n + 3)), ZERO_NUGGET)
        assert big.sigma2 <= small.sigma2 + 1e-10


def test_error_bound_rkhs_members():
    """|I(f) - mu| <= ||f||_H * sqrt(Sigma) for kernel-translate combos."""
    rng = np.random.default_rng(41)
    spec = KernelSpec("matern", nu=1.5, lengthscales=(0.4,))
    for _ in range(20):
        Z = np.sort(rng.uniform(size=4)).reshape(-1, 1)
        c = rng.normal(size=4)
        X = np.sort(rng.uniform(size=6)).reshape(-1, 1)
        f_X = np.array([sum(cj * kernel_eval(spec, x, z)
                            for cj, z in zip(c, Z)) for x in X])
        I_f = float(c @ [kernel_mean(spec, P, z) for z in Z])
        post = bq_infer(spec, P, Dataset(X, f_X), ZERO_NUGGET)
        norm = rkhs_norm_translates(spec, c, Z)
        assert abs(I_f - post.mu) <= norm * np.sqrt(post.sigma2) + 1e-8


def test_normalized_weights_sum_to_one():
    rng = np.random.default_rng(43)
    for spec in ALL_SPECS:
        X = np.sort(rng.uniform(0.05, 0.95, size=5)).reshape(-1, 1)
        w1 = normalized_weights(spec, P, X)
        assert np.sum(w1) == pytest.approx(1.0, abs=1e-10)


def test_normalized_weights_single_node():
    w1 = normalized_weights(KernelSpec("se"), P, [[0.4]])
    assert w1[0] == pytest.approx(1.0, abs=1e-12)


def test_normalized_weights_tiny_lengthscale_near_uniform():
    spec = KernelSpec("se", lengthscales=(1e-3,))
    X = np.linspace(0.1, 0.9, 5).reshape(-1, 1)
    w1 = normalized_weights(spec, P, X)
    assert np.allclose(w1, 0.2, atol=1e-3)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset([[0.1], [0.2]], [1.0])
    d = empty_dataset()
    assert d.N == 0 and d.dim == 1
    d2 = Dataset([[0.3]], [1.0]).append([0.6], 2.0)
    assert d2.N == 2 and d2.f_X[-1] == 2.0


def test_weight_length_mismatch():
    with pytest.raises(ValueError):
        worst_case_error(KernelSpec("se"), P, [0.1], [[0.1], [0.2]])
