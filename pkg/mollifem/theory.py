"""Closed-form convergence predictions for regularised vs plain reconstruction.

All rates are exponents gamma in e ~ n^(-gamma). With sigma = h^lambda,
s_a the approximation order, s_r the kernel order and d the dimension.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import pandas as pd

TIE_TOL = 1e-12


class Strategy(str, Enum):
    REGULARISE = "Regularise"
    DONT_REGULARISE = "DontRegularise"
    EITHER = "EitherRegularisePreferred"


@dataclass(frozen=True)
class RegimeParams:
    s_a: int
    s_r: int
    d: int = 1
    lam: float = 0.0

    def __post_init__(self):
        if self.s_a <= 0 or self.s_r <= 0 or self.d <= 0:
            raise ValueError("orders and dimension must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")


@dataclass(frozen=True)
class RateBound:
    """Predicted rate; ``exact`` is False where only e <= C n^(-value) is known."""
    value: float
    exact: bool = True

    @property
    def lower_bound_only(self) -> bool:
        return not self.exact


def beta_star(sigma: float, h: float, s_r: int, d: int = 1) -> float:
    """Classical bandwidth sigma^(2/(2 s_r + d)) h^(d/(2 s_r + d)), unit constant."""
    if sigma <= 0 or h <= 0:
        raise ValueError("sigma and h must be positive")
    denom = 2 * s_r + d
    return sigma ** (2.0 / denom) * h ** (d / denom)


def lambda_max(s_a: int, s_r: int, d: int = 1) -> float:
    """Noise exponent above which regularising at beta* only matches h^s_a."""
    return s_a + (d / 2.0) * (s_a / s_r - 1.0)


def predicted_gamma(params: RegimeParams) -> Tuple[float, RateBound]:
    s_a, s_r, d, lam = params.s_a, params.s_r, params.d, params.lam
    gamma_noreg = min(lam, s_a) / d
    if lam <= lambda_max(s_a, s_r, d) + TIE_TOL:
        return gamma_noreg, RateBound((2 * lam + d) / (2 * s_r + d) * s_r / d)
    return gamma_noreg, RateBound(s_a / d, exact=False)


def recommend_strategy(params: RegimeParams) -> Strategy:
    s_a, s_r, lam = params.s_a, params.s_r, params.lam

    if s_a <= s_r:
        return Strategy.REGULARISE if lam < s_a - TIE_TOL else Strategy.EITHER

    lam_m = lambda_max(s_a, s_r, params.d)
    if math.isclose(lam, s_r, abs_tol=TIE_TOL):
        return Strategy.EITHER
    if lam < s_r:
        return Strategy.REGULARISE
    if lam < lam_m - TIE_TOL:
        return Strategy.DONT_REGULARISE
    return Strategy.EITHER


def regime(params: RegimeParams) -> str:
    if params.s_a <= params.s_r:
        return "regularisation-dominant"
    if params.lam <= params.s_a:
        return "noise-dominated"
    if params.lam < lambda_max(params.s_a, params.s_r, params.d):
        return "intermediate"
    return "discretisation-dominated"


def maximal_gain(s_a: int, s_r: int, d: int = 1) -> float:
    """Largest gap gamma_noreg - gamma_reg, reached at lambda = s_a when s_a > s_r."""
    return (s_a - s_r) / (2 * s_r + d)


def maximal_gain_lambda(s_a: int) -> float:
    return float(s_a)


def error_bound(beta: float, sigma: float, h: float, s_a: int, s_r: int, d: int = 1) -> float:
    """Upper-bound profile sigma min(h/beta, 1)^(d/2) + h^s_a + beta^s_r."""
    variance = sigma if beta == 0 else sigma * min(h / beta, 1.0) ** (d / 2.0)
    return variance + h ** s_a + beta ** s_r


def optimal_error_bound(sigma: float, h: float, s_a: int, s_r: int, d: int = 1) -> float:
    """Infimum over beta of the upper-bound profile, up to constants."""
    if sigma <= h ** s_r:
        return sigma + h ** s_a
    denom = 2 * s_r + d
    return sigma ** (2 * s_r / denom) * h ** (d * s_r / denom) + h ** s_a


@dataclass(frozen=True)
class CurveTable:
    s_a: int
    s_r: int
    d: int
    lambdas: Tuple[float, ...]

    def rows(self) -> List[Tuple[float, float, RateBound]]:
        out = []
        for lam in self.lambdas:
            noreg, reg = predicted_gamma(RegimeParams(self.s_a, self.s_r, self.d, lam))
            out.append((lam, noreg, reg))
        return out

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {"lambda": lam, "gamma_theory_noreg": noreg,
                 "gamma_theory_reg": reg.value, "lower_bound_only": reg.lower_bound_only}
                for lam, noreg, reg in self.rows()
            ],
            columns=["lambda", "gamma_theory_noreg", "gamma_theory_reg", "lower_bound_only"],
        )


def theory_curves(s_a: int, s_r: int, d: int, lambdas: Sequence[float]) -> CurveTable:
    return CurveTable(s_a=s_a, s_r=s_r, d=d, lambdas=tuple(float(l) for l in lambdas))
