"""Self-checks behind ``main.py verify``.

Each check returns a short detail string on success and raises
VerificationFailure (or any other exception) on failure.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .config import default_lambda_grid
from .errors import VerificationFailure
from .experiment import NoiseModel, analytic_noreg_error, damped_sine, gaussian_vector, mc_error
from .kernel import BUILTIN_KERNELS, H, K, Kernel, convolve_basis, convolve_oracle, detect_order, mollify, mollified_norms
from .mesh_fe import Family, FEBasis, basis_l2_norms, build_basis, eval_basis, reconstruct, sample
from .quadrature import GridSpec, l2_distance, simpson, simpson_values, trapezoid
from .rates import fit_rate
from .theory import RegimeParams, beta_star, lambda_max, maximal_gain, predicted_gamma

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.module}.{self.name}: {self.detail}"


CHECKS: Dict[str, Dict[str, Callable[[], str]]] = {}


def check(module: str):
    def register(fn: Callable[[], str]) -> Callable[[], str]:
        CHECKS.setdefault(module, {})[fn.__name__] = fn
        return fn
    return register


def _require(ok: bool, message: str) -> None:
    if not ok:
        raise VerificationFailure(message)


# mesh_fe

@check("mesh_fe")
def partition_of_unity() -> str:
    x = np.random.default_rng(0).uniform(0.0, 1.0, 1000)
    worst = 0.0
    for family, n in ((Family.P1, 11), (Family.P2, 11), (Family.P1, 101), (Family.P2, 101)):
        basis = build_basis(family, n)
        total = sum(eval_basis(basis, i, x) for i in range(basis.n))
        worst = max(worst, float(np.max(np.abs(total - 1.0))))
    _require(worst <= 1e-12, f"max |sum phi_i - 1| = {worst:.3g}")
    return f"max deviation {worst:.2g}"


@check("mesh_fe")
def lagrange_property() -> str:
    for family in Family:
        for n in (11, 101):
            basis = build_basis(family, n)
            table = np.array([eval_basis(basis, i, basis.design.nodes) for i in range(n)])
            _require(np.allclose(table, np.eye(n), rtol=0.0, atol=1e-14), f"{family.value} n={n}")
    return "phi_i(x_j) = delta_ij"


@check("mesh_fe")
def polynomial_reproduction() -> str:
    x = np.linspace(0.0, 1.0, 1001)
    for family, degree in ((Family.P1, 1), (Family.P2, 2)):
        basis = build_basis(family, 21)
        for k in range(degree + 1):
            p = np.polynomial.Polynomial(np.arange(1.0, k + 2.0))
            err = np.max(np.abs(reconstruct(basis, sample(p, basis.design), x) - p(x)))
            _require(err <= 1e-10, f"{family.value} degree {k}: {err:.3g}")
    return "degree <= 1 (P1), <= 2 (P2)"


@check("mesh_fe")
def basis_support() -> str:
    x = np.linspace(0.0, 1.0, 2001)
    for family in Family:
        basis = build_basis(family, 21)
        for i in range(basis.n):
            outside = np.abs(x - basis.design.nodes[i]) >= 2 * basis.h
            _require(np.all(eval_basis(basis, i, x[outside]) == 0.0), f"{family.value} i={i}")
    return "phi_i vanishes at distance >= 2h"


@check("mesh_fe")
def approximation_order() -> str:
    grid = GridSpec()
    slopes = []
    for family in Family:
        points = []
        for n in (11, 101, 1001):
            basis = build_basis(family, n)
            nodal = sample(damped_sine, basis.design)
            points.append((n, l2_distance(lambda x: reconstruct(basis, nodal, x), damped_sine, grid)))
        gamma = fit_rate(points).gamma
        s_a = build_basis(family, 11).s_a
        _require(abs(gamma - s_a) <= 0.15, f"{family.value} slope {gamma:.3f}, expected {s_a}")
        slopes.append(f"{family.value} {gamma:.3f}")
    return ", ".join(slopes)


@check("mesh_fe")
def basis_norm_scaling() -> str:
    ratios = []
    for n in (11, 101, 1001):
        basis = build_basis(Family.P1, n)
        ratios.extend(basis_l2_norms(basis) / np.sqrt(basis.h))
    _require(min(ratios) >= np.sqrt(1 / 3) - 1e-12 and max(ratios) <= np.sqrt(2 / 3) + 1e-12,
             f"norm / sqrt(h) in [{min(ratios):.4f}, {max(ratios):.4f}]")
    return f"norm / sqrt(h) in [{min(ratios):.4f}, {max(ratios):.4f}]"


# kernel

@check("kernel")
def kernel_orders() -> str:
    _require(detect_order(K) == 1 and detect_order(H) == 2, "orders of K and H")
    return "K -> 1, H -> 2"


@check("kernel")
def convolution_mass() -> str:
    for name, kernel in BUILTIN_KERNELS.items():
        for family in Family:
            basis = build_basis(family, 11)
            for i in (0, 1, 5, 10):
                psi = convolve_basis(kernel, 0.05, basis, i)
                phi_mass = simpson(lambda x: eval_basis(basis, i, x), GridSpec(m=2000))
                _require(abs(psi.integral() - phi_mass) <= 1e-12, f"{name} {family.value} i={i}")
    return "integral preserved"


@check("kernel")
def scaling_identity() -> str:
    for name, kernel in BUILTIN_KERNELS.items():
        base = kernel.shape.l2_norm_squared()
        for beta in (1.0, 0.1, 0.01):
            scaled = kernel.scaled(beta)
            _require(abs(scaled.integral() - 1.0) <= 1e-12, f"{name} mass at beta={beta}")
            _require(abs(scaled.l2_norm_squared() - base / beta) <= 1e-9 * base / beta,
                     f"{name} L2 at beta={beta}")
    return "mass 1, ||K_beta||^2 = ||K||^2 / beta"


STUDY_N_VALUES = (11, 101, 1001)


def study_bandwidths(lambdas: Optional[Sequence[float]] = None,
                     n_values: Sequence[int] = STUDY_N_VALUES) -> Iterator[Tuple[Kernel, FEBasis, float, float]]:
    """(kernel, basis, lambda, beta*) for every regularised study cell."""
    lambdas = default_lambda_grid() if lambdas is None else lambdas
    for kernel in BUILTIN_KERNELS.values():
        for family in Family:
            for n in n_values:
                basis = build_basis(family, n)
                for lam in lambdas:
                    yield kernel, basis, lam, beta_star(basis.h ** lam, basis.h, kernel.s_r)


def oracle_discrepancy(kernel: Kernel, basis: FEBasis, beta: float,
                       indices: Optional[Sequence[int]] = None, per_piece: int = 2) -> float:
    """Sup of |closed form - Simpson oracle| over the breakpoint-aligned samples of K_beta * phi_i."""
    if indices is None:
        mid = basis.n // 2
        indices = sorted({0, 1, mid, mid + 1, basis.n - 1})
    worst = 0.0
    for i in indices:
        psi = convolve_basis(kernel, beta, basis, i)
        x = psi.sample(per_piece=per_piece)
        x = x[(x >= 0.0) & (x <= 1.0)]
        oracle = convolve_oracle(kernel, beta, lambda y, i=i: eval_basis(basis, i, y), x, m=8,
                                 breakpoints=basis.design.nodes)
        worst = max(worst, float(np.max(np.abs(psi(x) - oracle))))
    return worst


@check("kernel")
def closed_form_matches_oracle() -> str:
    worst, where, count = 0.0, "", 0
    for kernel, basis, lam, beta in study_bandwidths():
        gap = oracle_discrepancy(kernel, basis, beta)
        count += 1
        if gap > worst:
            worst, where = gap, f"{kernel.name} {basis.family.value} n={basis.n} lambda={lam:g} beta={beta:.3g}"
    _require(worst <= 1e-8, f"sup discrepancy {worst:.3g} at {where}")
    return f"sup discrepancy {worst:.2g} over {count} study bandwidths"


@check("kernel")
def mollification_order() -> str:
    grid = GridSpec(m=2000)
    x = grid.points()
    fx = damped_sine(x)
    slopes = []
    for name, kernel in BUILTIN_KERNELS.items():
        points = []
        for beta in (0.1, 0.05, 0.025, 0.0125):
            diff = mollify(damped_sine, kernel, beta, x, m=40) - fx
            points.append((1.0 / beta, float(np.sqrt(simpson_values(diff * diff, grid)))))
        gamma = fit_rate(points).gamma
        _require(abs(gamma - kernel.s_r) <= 0.15, f"{name} slope {gamma:.3f}, expected {kernel.s_r}")
        slopes.append(f"{name} {gamma:.3f}")
    return ", ".join(slopes)


@check("kernel")
def narrow_bandwidth_norms() -> str:
    ratios = {}
    for name, kernel in BUILTIN_KERNELS.items():
        for n in (11, 101):
            basis = build_basis(Family.P1, n)
            norms = mollified_norms(basis, kernel, basis.h ** 2)
            ratios[(name, n)] = float(np.min(norms) / np.sqrt(basis.h))
        _require(ratios[(name, 101)] >= 0.5 * ratios[(name, 11)], f"{name}: {ratios}")
    return "min ||K_beta phi_i|| / sqrt(h) bounded below with beta = h^2"


# quadrature

@check("quadrature")
def simpson_exact_for_cubics() -> str:
    value = simpson(lambda x: x ** 3, GridSpec(m=2))
    _require(abs(value - 0.25) <= 1e-15, f"x^3 gave {value!r}")
    return "x^3 -> 0.25"


@check("quadrature")
def simpson_fourth_order() -> str:
    exact = 0.5 - np.sin(8.0) / 16.0
    points = [(m, abs(simpson(lambda x: np.sin(4 * x) ** 2, GridSpec(m=m)) - exact)) for m in (8, 16, 32, 64)]
    gamma = fit_rate(points).gamma
    _require(abs(gamma - 4.0) <= 0.3, f"slope {gamma:.3f}")
    return f"slope {gamma:.3f}"


@check("quadrature")
def study_grid_converged() -> str:
    basis = build_basis(Family.P1, 101)
    nodal = sample(damped_sine, basis.design)

    def sq(x):
        return (reconstruct(basis, nodal, x) - damped_sine(x)) ** 2

    coarse, fine = simpson(sq, GridSpec()), simpson(sq, GridSpec(m=200_000))
    rel = abs(coarse - fine) / fine
    _require(rel < 1e-10, f"relative change {rel:.3g}")
    return f"relative change {rel:.2g}"


@check("quadrature")
def l2_matches_trapezoid() -> str:
    basis = build_basis(Family.P1, 101)
    nodal = sample(damped_sine, basis.design)

    def diff(x):
        return (damped_sine(x) - reconstruct(basis, nodal, x)) ** 2

    by_simpson = l2_distance(damped_sine, lambda x: reconstruct(basis, nodal, x), GridSpec())
    by_trapezoid = float(np.sqrt(trapezoid(diff, 0.0, 1.0, 1_000_001)))
    _require(abs(by_simpson - by_trapezoid) <= 1e-8, f"{by_simpson!r} vs {by_trapezoid!r}")
    return f"{by_simpson:.10g}"


# experiment

@check("experiment")
def gaussian_moments() -> str:
    z = gaussian_vector(NoiseModel(sigma=1.0, seed=7), 1_000_000, 0)
    _require(abs(z.mean()) <= 0.005 and abs(z.var() - 1.0) <= 0.01, f"mean {z.mean():.4f} var {z.var():.4f}")
    return f"mean {z.mean():.4f}, var {z.var():.4f}"


@check("experiment")
def bias_variance_identity() -> str:
    rng = np.random.default_rng(2024)
    grid = GridSpec(m=20_000)
    for case in range(10):
        family = Family.P1 if case % 2 == 0 else Family.P2
        n = int(rng.choice([11, 21, 51]))
        sigma = float(10 ** rng.uniform(-3, 0))
        basis = build_basis(family, n)
        estimate = mc_error(damped_sine, basis, None, 0.0, NoiseModel(sigma, seed=case), 400, grid)
        target = analytic_noreg_error(damped_sine, basis, sigma, grid) ** 2
        _require(abs(estimate.mean_sq - target) <= 3 * estimate.std_error,
                 f"case {case}: {estimate.mean_sq:.6g} vs {target:.6g} (se {estimate.std_error:.3g})")
    return "10 cases within 3 standard errors"


@check("experiment")
def maximal_gain_identity() -> str:
    for s_a, s_r in ((2, 1), (3, 1), (3, 2)):
        noreg, reg = predicted_gamma(RegimeParams(s_a, s_r, 1, float(s_a)))
        _require(abs((noreg - reg.value) - maximal_gain(s_a, s_r)) <= 1e-12, f"s_a={s_a} s_r={s_r}")
    return "gap at lambda = s_a equals (s_a - s_r) / (2 s_r + d)"


@check("experiment")
def lambda_max_values() -> str:
    expected = {(2, 1, 1): 2.5, (3, 2, 2): 3.5, (3, 2, 1): 3.25, (2, 2, 1): 2.0, (3, 1, 1): 4.0}
    for args, value in expected.items():
        _require(abs(lambda_max(*args) - value) <= 1e-12, f"lambda_max{args}")
    return "5 reference values"


@check("experiment")
def plain_rate_monotone_and_capped() -> str:
    lambdas = np.linspace(0.0, 8.0, 161)
    for s_a in (1, 2, 3):
        for s_r in (1, 2):
            for d in (1, 2, 3):
                gammas = np.array([predicted_gamma(RegimeParams(s_a, s_r, d, float(lam)))[0] for lam in lambdas])
                _require(np.all(np.diff(gammas) >= 0.0), f"gamma_noreg decreases for s_a={s_a} d={d}")
                _require(np.all(gammas <= s_a / d + 1e-12) and gammas[-1] == s_a / d,
                         f"gamma_noreg not capped at s_a/d for s_a={s_a} d={d}")
    return "nondecreasing in lambda, capped at s_a/d"


@check("experiment")
def fixed_noise_lower_bound() -> str:
    sigma = 0.3
    worst = np.inf
    for kernel in BUILTIN_KERNELS.values():
        for family, counts in ((Family.P1, (11, 101)), (Family.P2, (21, 201))):
            for n in counts:
                basis = build_basis(family, n)
                norms = mollified_norms(basis, kernel, basis.h ** 2, 0.0, 1.0)
                spread = sigma * float(np.sqrt(np.sum(norms ** 2)))
                _require(spread >= 0.5 * sigma,
                         f"{kernel.name} {family.value} h={basis.h:g}: {spread:.3g} < {0.5 * sigma:g}")
                worst = min(worst, spread / sigma)
    return f"min sqrt(sum ||K_beta phi_i||^2) = {worst:.3f} with beta = h^2"


def run_checks(modules: Optional[Sequence[str]] = None) -> List[CheckResult]:
    results = []
    for module, checks in CHECKS.items():
        if modules and module not in modules:
            continue
        for name, fn in checks.items():
            try:
                detail = fn()
                results.append(CheckResult(module, name, True, detail))
            except Exception as exc:
                logger.debug("check %s.%s failed", module, name, exc_info=True)
                results.append(CheckResult(module, name, False, f"{type(exc).__name__}: {exc}"))
    return results
