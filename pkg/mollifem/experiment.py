"""Noise model and Monte Carlo / analytic reconstruction errors."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from .errors import ValidationError
from .kernel import Kernel, MollifiedOperator, mollified_norms
from .mesh_fe import FEBasis, basis_l2_norms, reconstruct, sample
from .quadrature import GridSpec, l2_distance, simpson_values

logger = logging.getLogger(__name__)

# Keep one (grid x draws) block around 32 MB.
BLOCK_VALUES = 4_000_000


def damped_sine(x):
    """(1 - x)^2 sin^2(4x): vanishes with its first derivative at 0 and at 1."""
    x = np.asarray(x, dtype=float)
    return (1.0 - x) ** 2 * np.sin(4.0 * x) ** 2


TEST_FUNCTIONS: Dict[str, Callable] = {"damped_sine": damped_sine}


@dataclass(frozen=True)
class NoiseModel:
    sigma: float
    seed: int

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class ErrorEstimate:
    mean_sq: float
    std_error: float
    draws: int

    @property
    def error(self) -> float:
        return float(np.sqrt(self.mean_sq))

    @property
    def error_std_error(self) -> float:
        """Standard error of sqrt(mean_sq), by the delta method."""
        if self.mean_sq <= 0:
            return 0.0
        return self.std_error / (2.0 * self.error)


def derive_seed(seed: int, *key: int) -> int:
    """Independent 64-bit seed for the substream addressed by ``key``."""
    state = np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(1, dtype=np.uint64)
    return int(state[0])


def gaussian_vector(model: NoiseModel, n: int, draw_index: int) -> np.ndarray:
    """Standard normal draw number ``draw_index``; independent of every other index."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(model.seed, spawn_key=(draw_index,)))
    return rng.standard_normal(n)


def _check_regularisation(kernel: Optional[Kernel], beta: float) -> None:
    if beta < 0:
        raise ValidationError("beta must be nonnegative")
    if kernel is None and beta != 0:
        raise ValidationError("a positive beta needs a kernel")


def mc_error(f: Callable, basis: FEBasis, kernel: Optional[Kernel], beta: float,
             model: NoiseModel, draws: int, grid: GridSpec, workers: int = 1) -> ErrorEstimate:
    """Monte Carlo estimate of E ||R_beta P_n y_sigma - f||^2.

    Each draw is integrated by Simpson on ``grid``. Squared errors land in
    draw-indexed slots and are reduced in index order, so the result does not
    depend on ``workers``.
    """
    _check_regularisation(kernel, beta)
    if draws < 1:
        raise ValidationError(f"need at least one draw, got {draws}")

    x = grid.points()
    fx = np.asarray(f(x), dtype=float)
    nodal = sample(f, basis.design).values
    operator = MollifiedOperator(basis, kernel, beta, x)

    def squared_errors(start: int, stop: int) -> np.ndarray:
        noise = np.column_stack([gaussian_vector(model, basis.n, k) for k in range(start, stop)])
        z = nodal[:, None] + model.sigma * noise
        residual = operator(z) - fx[:, None]
        return simpson_values(residual * residual, grid, axis=0)

    if model.sigma == 0:
        bias_sq = float(squared_errors(0, 1)[0])
        return ErrorEstimate(mean_sq=bias_sq, std_error=0.0, draws=draws)

    block = max(1, BLOCK_VALUES // len(x))
    starts = list(range(0, draws, block))
    slots = np.empty(draws)

    def fill(start: int) -> None:
        stop = min(start + block, draws)
        slots[start:stop] = squared_errors(start, stop)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, starts))
    else:
        for start in starts:
            fill(start)

    std_error = float(slots.std(ddof=1) / np.sqrt(draws)) if draws > 1 else 0.0
    return ErrorEstimate(mean_sq=float(slots.mean()), std_error=std_error, draws=draws)


def analytic_noreg_error(f: Callable, basis: FEBasis, sigma: float, grid: GridSpec) -> float:
    """sqrt(sigma^2 sum ||phi_i||^2 + ||P_n E_n f - f||^2)."""
    nodal = sample(f, basis.design).values
    variance = sigma ** 2 * float(np.sum(basis_l2_norms(basis) ** 2))
    bias = l2_distance(lambda x: reconstruct(basis, nodal, x), f, grid)
    return float(np.sqrt(variance + bias ** 2))


def analytic_error(f: Callable, basis: FEBasis, kernel: Optional[Kernel], beta: float,
                   sigma: float, grid: GridSpec) -> float:
    """Bias-variance identity at any beta, variance from exact norms over the grid interval."""
    _check_regularisation(kernel, beta)
    if kernel is None or beta == 0:
        return analytic_noreg_error(f, basis, sigma, grid)

    nodal = sample(f, basis.design).values
    norms = mollified_norms(basis, kernel, beta, lo=grid.a, hi=grid.b)
    variance = sigma ** 2 * float(np.sum(norms ** 2))
    x = grid.points()
    residual = MollifiedOperator(basis, kernel, beta, x)(nodal) - np.asarray(f(x), dtype=float)
    bias_sq = float(simpson_values(residual * residual, grid))
    return float(np.sqrt(variance + bias_sq))
