import numpy as np
import pytest

from mollifem.errors import ValidationError
from mollifem.experiment import (
    ErrorEstimate,
    NoiseModel,
    analytic_error,
    analytic_noreg_error,
    damped_sine,
    derive_seed,
    gaussian_vector,
    mc_error,
)
from mollifem.kernel import H, K, mollified_norms
from mollifem.mesh_fe import Family, basis_l2_norms, build_basis, reconstruct, sample
from mollifem.quadrature import GridSpec, l2_distance


def zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def test_damped_sine_vanishes_at_both_ends():
    assert damped_sine(0.0) == 0.0
    assert damped_sine(1.0) == 0.0
    assert damped_sine(0.5) == pytest.approx(0.25 * np.sin(2.0) ** 2)


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(sigma=-0.1, seed=1)
    with pytest.raises(ValueError):
        NoiseModel(sigma=0.1, seed=-1)


def test_gaussian_vector_is_deterministic():
    model = NoiseModel(sigma=1.0, seed=42)
    np.testing.assert_array_equal(gaussian_vector(model, 50, 3), gaussian_vector(model, 50, 3))
    assert not np.array_equal(gaussian_vector(model, 50, 3), gaussian_vector(model, 50, 4))


def test_gaussian_vector_moments():
    z = gaussian_vector(NoiseModel(sigma=1.0, seed=9), 1_000_000, 0)
    assert abs(z.mean()) < 0.005
    assert abs(z.var() - 1.0) < 0.01


def test_draws_are_uncorrelated():
    model = NoiseModel(sigma=1.0, seed=11)
    a, b = gaussian_vector(model, 10_000, 0), gaussian_vector(model, 10_000, 1)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


def test_derive_seed():
    assert derive_seed(42, 0, 1) == derive_seed(42, 0, 1)
    assert len({derive_seed(42, li, ni) for li in range(5) for ni in range(3)}) == 15
    assert derive_seed(42, 0, 1) != derive_seed(43, 0, 1)


def test_error_estimate_properties():
    estimate = ErrorEstimate(mean_sq=0.04, std_error=0.004, draws=100)
    assert estimate.error == pytest.approx(0.2)
    assert estimate.error_std_error == pytest.approx(0.01)
    assert ErrorEstimate(0.0, 0.0, 1).error_std_error == 0.0


def test_noise_free_error_is_the_bias():
    basis = build_basis(Family.P1, 11)
    grid = GridSpec(m=1000)
    estimate = mc_error(damped_sine, basis, None, 0.0, NoiseModel(0.0, seed=1), 25, grid)
    nodal = sample(damped_sine, basis.design)
    bias = l2_distance(lambda x: reconstruct(basis, nodal, x), damped_sine, grid)
    assert estimate.mean_sq == pytest.approx(bias ** 2, rel=1e-12)
    assert estimate.std_error == 0.0
    assert estimate.draws == 25


def test_pure_noise_matches_sum_of_basis_norms():
    basis = build_basis(Family.P1, 11)
    expected = 9 * (2 * 0.1 / 3) + 2 * (0.1 / 3)
    assert float(np.sum(basis_l2_norms(basis) ** 2)) == pytest.approx(expected)
    estimate = mc_error(zero, basis, None, 0.0, NoiseModel(1.0, seed=5), 2000, GridSpec(m=1000))
    assert abs(estimate.mean_sq - expected) <= 3 * estimate.std_error


def test_zero_bandwidth_ignores_the_kernel():
    basis = build_basis(Family.P2, 11)
    model = NoiseModel(0.3, seed=8)
    grid = GridSpec(m=1000)
    with_kernel = mc_error(damped_sine, basis, H, 0.0, model, 40, grid)
    without = mc_error(damped_sine, basis, None, 0.0, model, 40, grid)
    assert with_kernel == without


def test_result_does_not_depend_on_workers():
    basis = build_basis(Family.P1, 101)
    model = NoiseModel(0.05, seed=3)
    grid = GridSpec()  # several blocks of draws
    serial = mc_error(damped_sine, basis, K, 0.02, model, 100, grid, workers=1)
    threaded = mc_error(damped_sine, basis, K, 0.02, model, 100, grid, workers=3)
    assert serial == threaded


def test_regularisation_arguments_are_checked():
    basis = build_basis(Family.P1, 11)
    model = NoiseModel(0.1, seed=1)
    with pytest.raises(ValidationError):
        mc_error(damped_sine, basis, None, 0.1, model, 10, GridSpec(m=100))
    with pytest.raises(ValidationError):
        mc_error(damped_sine, basis, K, -0.1, model, 10, GridSpec(m=100))
    with pytest.raises(ValidationError):
        mc_error(damped_sine, basis, K, 0.1, model, 0, GridSpec(m=100))


def test_analytic_noreg_error_limits():
    basis = build_basis(Family.P2, 21)
    grid = GridSpec(m=2000)
    nodal = sample(damped_sine, basis.design)
    bias = l2_distance(lambda x: reconstruct(basis, nodal, x), damped_sine, grid)
    assert analytic_noreg_error(damped_sine, basis, 0.0, grid) == pytest.approx(bias)
    noise_only = 0.2 * np.sqrt(np.sum(basis_l2_norms(basis) ** 2))
    assert analytic_noreg_error(zero, basis, 0.2, grid) == pytest.approx(noise_only)


def test_monte_carlo_agrees_with_bias_variance_identity():
    basis = build_basis(Family.P1, 101)
    grid = GridSpec(m=10_000)
    estimate = mc_error(damped_sine, basis, None, 0.0, NoiseModel(0.01, seed=17), 1000, grid)
    target = analytic_noreg_error(damped_sine, basis, 0.01, grid) ** 2
    assert abs(estimate.mean_sq - target) <= 3 * estimate.std_error


@pytest.mark.parametrize("case", range(10))
def test_bias_variance_identity_on_random_cases(case):
    rng = np.random.default_rng(1000 + case)
    family = Family.P1 if case % 2 == 0 else Family.P2
    n = int(rng.choice([11, 21, 51]))
    sigma = float(10 ** rng.uniform(-3, 0))
    basis = build_basis(family, n)
    grid = GridSpec(m=20_000)
    estimate = mc_error(damped_sine, basis, None, 0.0, NoiseModel(sigma, seed=case), 400, grid)
    target = analytic_noreg_error(damped_sine, basis, sigma, grid) ** 2
    assert abs(estimate.mean_sq - target) <= 3 * estimate.std_error


def test_analytic_error_with_zero_bandwidth_is_the_plain_error():
    basis = build_basis(Family.P1, 21)
    grid = GridSpec(m=2000)
    assert analytic_error(damped_sine, basis, K, 0.0, 0.1, grid) == \
        analytic_noreg_error(damped_sine, basis, 0.1, grid)


@pytest.mark.parametrize("kernel,beta", [(H, 0.05), (K, 0.6)])
def test_monte_carlo_agrees_with_mollified_identity(kernel, beta):
    basis = build_basis(Family.P1, 11)
    grid = GridSpec(m=2000)
    sigma = 0.1
    estimate = mc_error(damped_sine, basis, kernel, beta, NoiseModel(sigma, seed=21), 1000, grid)
    target = analytic_error(damped_sine, basis, kernel, beta, sigma, grid) ** 2
    assert abs(estimate.mean_sq - target) <= 3 * estimate.std_error


@pytest.mark.parametrize("kernel", [K, H])
@pytest.mark.parametrize("family,counts", [(Family.P1, (11, 101)), (Family.P2, (21, 201))])
def test_noise_floor_survives_bandwidths_below_the_mesh(kernel, family, counts):
    sigma = 0.2
    for n in counts:
        basis = build_basis(family, n)
        norms = mollified_norms(basis, kernel, basis.h ** 2, 0.0, 1.0)
        assert sigma * np.sqrt(np.sum(norms ** 2)) >= 0.5 * sigma
