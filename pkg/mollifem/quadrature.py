"""Composite Simpson integration and L2 distances on an interval."""
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import InvalidGrid

# "10^5 points": m = 10^5 subintervals, m + 1 nodes.
STUDY_M = 100_000


@dataclass(frozen=True)
class GridSpec:
    m: int = STUDY_M
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.m < 2 or self.m % 2:
            raise InvalidGrid(f"Simpson needs an even number of subintervals >= 2, got {self.m}")
        if not self.a < self.b:
            raise InvalidGrid(f"empty interval [{self.a}, {self.b}]")

    @property
    def step(self) -> float:
        return (self.b - self.a) / self.m

    def points(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.m + 1)


def simpson_values(values: np.ndarray, spec: GridSpec, axis: int = 0) -> np.ndarray:
    """Simpson rule applied to samples already taken at ``spec.points()``."""
    return integrate.simpson(values, dx=spec.step, axis=axis)


def simpson(g: Callable, spec: GridSpec) -> float:
    x = spec.points()
    y = np.broadcast_to(np.asarray(g(x), dtype=float), x.shape)
    return float(simpson_values(y, spec))


def l2_distance(g1: Callable, g2: Callable, spec: GridSpec) -> float:
    x = spec.points()
    diff = np.asarray(g1(x), dtype=float) - np.asarray(g2(x), dtype=float)
    diff = np.broadcast_to(diff, x.shape)
    return float(np.sqrt(max(simpson_values(diff * diff, spec), 0.0)))


def trapezoid(g: Callable, a: float, b: float, points: int) -> float:
    """Composite trapezoid rule, used as an independent quadrature oracle."""
    x = np.linspace(a, b, points)
    y = np.broadcast_to(np.asarray(g(x), dtype=float), x.shape)
    return float(integrate.trapezoid(y, x))
