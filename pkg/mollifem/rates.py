"""Log-log rate fits and full lambda sweeps comparing plain and mollified reconstruction."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .config import StudyConfig
from .errors import InvalidRateData
from .experiment import TEST_FUNCTIONS, ErrorEstimate, NoiseModel, derive_seed, mc_error
from .kernel import BUILTIN_KERNELS
from .mesh_fe import build_basis
from .quadrature import GridSpec
from .theory import RegimeParams, Strategy, beta_star, predicted_gamma, recommend_strategy, regime

logger = logging.getLogger(__name__)

STUDY_COLUMNS = ["lambda", "gamma_noreg", "gamma_reg", "gamma_theory_noreg", "gamma_theory_reg",
                 "regime", "residual_noreg", "residual_reg"]


@dataclass(frozen=True)
class RateEstimate:
    gamma: float
    residual: float
    errors: Tuple[Tuple[int, float, float], ...]  # (n, error, std_error)


def fit_rate(points: Sequence[Tuple]) -> RateEstimate:
    """Least-squares gamma in e ~ n^(-gamma) over (n, e) or (n, e, std_error) points.

    The residual is the largest |fit - data| in log10 space.
    """
    if len(points) < 2:
        raise InvalidRateData(f"need at least two points, got {len(points)}")
    n = np.array([float(p[0]) for p in points])
    e = np.array([float(p[1]) for p in points])
    se = [float(p[2]) if len(p) > 2 else 0.0 for p in points]

    if len(np.unique(n)) != len(n):
        raise InvalidRateData("duplicate n values")
    if np.any(n <= 0):
        raise InvalidRateData("n values must be positive")
    if not np.all(np.isfinite(e)) or np.any(e <= 0):
        raise InvalidRateData("errors must be positive and finite")

    log_n, log_e = np.log10(n), np.log10(e)
    if np.all(log_e == log_e[0]):
        slope, intercept = 0.0, float(log_e[0])
    else:
        slope, intercept = np.polyfit(log_n, log_e, 1)
    residual = float(np.max(np.abs(slope * log_n + intercept - log_e)))
    return RateEstimate(
        gamma=-float(slope) + 0.0,
        residual=residual,
        errors=tuple((int(k), float(v), s) for k, v, s in zip(n, e, se)),
    )


@dataclass
class StudyRow:
    lam: float
    noreg: RateEstimate
    reg: Optional[RateEstimate]
    gamma_theory_noreg: float
    gamma_theory_reg: Optional[float]
    lower_bound_only: bool
    regime: Optional[str]             # predicted strategy
    regime_name: Optional[str]
    strategy_observed: Optional[str]  # from the errors at the largest n
    sigmas: List[float] = field(default_factory=list)
    betas: List[float] = field(default_factory=list)

    @property
    def gamma_noreg(self) -> float:
        return self.noreg.gamma

    @property
    def gamma_reg(self) -> Optional[float]:
        return None if self.reg is None else self.reg.gamma

    def record(self) -> Dict[str, object]:
        return {
            "lambda": self.lam,
            "gamma_noreg": self.gamma_noreg,
            "gamma_reg": self.gamma_reg,
            "gamma_theory_noreg": self.gamma_theory_noreg,
            "gamma_theory_reg": self.gamma_theory_reg,
            "regime": self.regime,
            "residual_noreg": self.noreg.residual,
            "residual_reg": None if self.reg is None else self.reg.residual,
        }


@dataclass
class StudyTable:
    config: StudyConfig
    rows: List[StudyRow]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.record() for row in self.rows], columns=STUDY_COLUMNS)


def observed_strategy(noreg: ErrorEstimate, reg: ErrorEstimate) -> str:
    if reg.error < noreg.error:
        return Strategy.REGULARISE.value
    return Strategy.DONT_REGULARISE.value


def run_study(config: StudyConfig) -> StudyTable:
    """One row per lambda: measured and predicted rates with and without mollification.

    Cell (lambda index li, n index ni) draws its noise from the substream
    derive_seed(seed, li, ni); the plain and mollified errors of a cell share
    the same draws.
    """
    f = TEST_FUNCTIONS[config.test_function]
    kernel = BUILTIN_KERNELS[config.kernel] if config.kernel else None
    grid = GridSpec(m=config.simpson_m)
    bases = [build_basis(config.family, n) for n in config.n_values]
    s_a = bases[0].s_a

    rows = []
    for li, lam in enumerate(config.lambda_grid):
        noreg_points, reg_points = [], []
        sigmas, betas = [], []
        last: Tuple[Optional[ErrorEstimate], Optional[ErrorEstimate]] = (None, None)

        for ni, basis in enumerate(bases):
            sigma = basis.h ** lam
            model = NoiseModel(sigma=sigma, seed=derive_seed(config.seed, li, ni))
            noreg = mc_error(f, basis, None, 0.0, model, config.draws, grid, workers=config.workers)
            noreg_points.append((basis.n, noreg.error, noreg.error_std_error))
            sigmas.append(sigma)

            reg = None
            if kernel is not None:
                beta = beta_star(sigma, basis.h, kernel.s_r)
                reg = mc_error(f, basis, kernel, beta, model, config.draws, grid, workers=config.workers)
                reg_points.append((basis.n, reg.error, reg.error_std_error))
                betas.append(beta)
            last = (noreg, reg)

            logger.info("lambda=%g n=%d sigma=%.3g e_noreg=%.6g%s", lam, basis.n, sigma, noreg.error,
                        "" if reg is None else f" beta={betas[-1]:.3g} e_reg={reg.error:.6g}")

        if kernel is None:
            gamma_noreg = min(lam, s_a)
            rows.append(StudyRow(
                lam=lam, noreg=fit_rate(noreg_points), reg=None,
                gamma_theory_noreg=gamma_noreg, gamma_theory_reg=None, lower_bound_only=False,
                regime=None, regime_name=None, strategy_observed=None, sigmas=sigmas,
            ))
            continue

        params = RegimeParams(s_a=s_a, s_r=kernel.s_r, d=1, lam=lam)
        gamma_noreg, gamma_reg = predicted_gamma(params)
        rows.append(StudyRow(
            lam=lam,
            noreg=fit_rate(noreg_points),
            reg=fit_rate(reg_points),
            gamma_theory_noreg=gamma_noreg,
            gamma_theory_reg=gamma_reg.value,
            lower_bound_only=gamma_reg.lower_bound_only,
            regime=recommend_strategy(params).value,
            regime_name=regime(params),
            strategy_observed=observed_strategy(*last),
            sigmas=sigmas,
            betas=betas,
        ))
    return StudyTable(config=config, rows=rows)
