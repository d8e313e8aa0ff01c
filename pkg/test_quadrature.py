import numpy as np
import pytest

from mollifem.errors import InvalidGrid
from mollifem.experiment import damped_sine
from mollifem.mesh_fe import Family, build_basis, reconstruct, sample
from mollifem.quadrature import STUDY_M, GridSpec, l2_distance, simpson, simpson_values, trapezoid


def test_simpson_is_exact_for_cubics():
    assert simpson(lambda x: x ** 3, GridSpec(m=2)) == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("m", [2, 10, 1000])
def test_simpson_of_constant(m):
    assert simpson(lambda x: 1.0, GridSpec(m=m)) == pytest.approx(1.0, abs=1e-14)


def test_simpson_converges_at_fourth_order():
    exact = 0.5 - np.sin(8.0) / 16.0
    ms = np.array([8, 16, 32, 64])
    errors = [abs(simpson(lambda x: np.sin(4 * x) ** 2, GridSpec(m=m)) - exact) for m in ms]
    slope = np.polyfit(np.log10(ms), np.log10(errors), 1)[0]
    assert -slope == pytest.approx(4.0, abs=0.3)


def test_simpson_is_linear_and_monotone():
    spec = GridSpec(m=100)
    f, g = np.cos, lambda x: x ** 2
    assert simpson(lambda x: 2 * f(x) + 3 * g(x), spec) == pytest.approx(2 * simpson(f, spec) + 3 * simpson(g, spec))
    assert simpson(lambda x: np.abs(np.sin(20 * x)), spec) >= 0.0


@pytest.mark.parametrize("m,a,b", [(3, 0.0, 1.0), (0, 0.0, 1.0), (4, 1.0, 1.0), (4, 1.0, 0.0)])
def test_invalid_grids(m, a, b):
    with pytest.raises(InvalidGrid):
        GridSpec(m=m, a=a, b=b)


def test_grid_defaults():
    spec = GridSpec()
    assert spec.m == STUDY_M == 100_000
    assert len(spec.points()) == STUDY_M + 1
    assert spec.step == pytest.approx(1e-5)


def test_simpson_values_along_axis():
    spec = GridSpec(m=10)
    x = spec.points()
    values = np.stack([x, x ** 2, np.ones_like(x)], axis=1)
    np.testing.assert_allclose(simpson_values(values, spec, axis=0), [0.5, 1 / 3, 1.0])


def test_l2_distance_basics():
    spec = GridSpec(m=100)
    assert l2_distance(np.sin, np.sin, spec) == 0.0
    assert l2_distance(lambda x: 1.0, lambda x: 0.0, spec) == pytest.approx(1.0)


def _p1_interpolant(n):
    basis = build_basis(Family.P1, n)
    nodal = sample(damped_sine, basis.design)
    return lambda x: reconstruct(basis, nodal, x)


def test_l2_distance_matches_trapezoid_oracle():
    interp = _p1_interpolant(101)
    by_simpson = l2_distance(damped_sine, interp, GridSpec())
    by_trapezoid = np.sqrt(trapezoid(lambda x: (damped_sine(x) - interp(x)) ** 2, 0.0, 1.0, 1_000_001))
    assert by_simpson == pytest.approx(by_trapezoid, abs=1e-8)


def test_study_grid_is_converged():
    interp = _p1_interpolant(101)

    def sq(x):
        return (interp(x) - damped_sine(x)) ** 2

    coarse = simpson(sq, GridSpec())
    fine = simpson(sq, GridSpec(m=2 * STUDY_M))
    assert abs(coarse - fine) / fine < 1e-10
