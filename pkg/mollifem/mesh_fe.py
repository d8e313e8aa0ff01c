"""P1/P2 Lagrange finite elements on the unit interval.

Nodes are 0-indexed. For P2, even indices are element vertices and odd
indices are element midpoints.
"""
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np
from scipy.interpolate import PPoly

from .errors import EvenNodeCount, IndexOutOfRange, LengthMismatch, NodeCountTooSmall
from .piecewise import PiecewisePoly


class Family(str, Enum):
    P1 = "P1"
    P2 = "P2"


# Local Lagrange bases as ascending coefficients in s in [0, 1] (s = offset / h):
# rows are powers of s, columns are the element's local nodes.
_LOCAL_SHAPES = {
    Family.P1: np.array([[1.0, 0.0],
                         [-1.0, 1.0]]),
    Family.P2: np.array([[1.0, 0.0, 0.0],
                         [-3.0, 4.0, -1.0],
                         [2.0, -4.0, 2.0]]),
}

_APPROXIMATION_ORDER = {Family.P1: 2, Family.P2: 3}

_SNAP_ULPS = 16


@dataclass(frozen=True)
class Design:
    family: Family
    n: int
    h: float
    nodes: np.ndarray = field(compare=False, repr=False)


@dataclass(frozen=True)
class FEBasis:
    family: Family
    design: Design

    @property
    def s_a(self) -> int:
        return _APPROXIMATION_ORDER[self.family]

    @property
    def degree(self) -> int:
        return 1 if self.family is Family.P1 else 2

    @property
    def n(self) -> int:
        return self.design.n

    @property
    def h(self) -> float:
        return self.design.h

    @property
    def n_elements(self) -> int:
        return (self.n - 1) // self.degree

    def element_nodes(self) -> np.ndarray:
        """(n_elements, degree + 1) global node indices of each element."""
        first = np.arange(self.n_elements) * self.degree
        return first[:, None] + np.arange(self.degree + 1)[None, :]


@dataclass(frozen=True)
class NodalVector:
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


NodalLike = Union[NodalVector, Sequence[float], np.ndarray]


def build_design(family: Family, n: int) -> Design:
    family = Family(family)
    if n < 3:
        raise NodeCountTooSmall(f"need n >= 3 nodes, got {n}")
    if family is Family.P2 and n % 2 == 0:
        raise EvenNodeCount(f"P2 elements need an odd node count, got {n}")

    h = (1.0 if family is Family.P1 else 2.0) / (n - 1)
    nodes = np.arange(n) / (n - 1)
    nodes.setflags(write=False)
    return Design(family=family, n=n, h=h, nodes=nodes)


@lru_cache(maxsize=64)
def build_basis(family: Family, n: int) -> FEBasis:
    family = Family(family)
    return FEBasis(family=family, design=build_design(family, n))


def _check_index(basis: FEBasis, i: int) -> None:
    if not 0 <= i < basis.n:
        raise IndexOutOfRange(f"basis index {i} outside [0, {basis.n})")


def _nodal_values(basis: FEBasis, z: NodalLike) -> np.ndarray:
    values = np.asarray(z, dtype=float)
    if values.shape[0] != basis.n:
        raise LengthMismatch(f"nodal vector has length {values.shape[0]}, basis has {basis.n} nodes")
    return values


def _node_coordinate(basis: FEBasis, x: np.ndarray) -> np.ndarray:
    """x in units of the node spacing, snapped onto nodes within a few ulps."""
    s = x * (basis.n - 1)
    nearest = np.rint(s)
    return np.where(np.abs(s - nearest) <= _SNAP_ULPS * np.finfo(float).eps * (basis.n - 1), nearest, s)


def eval_basis(basis: FEBasis, i: int, x):
    """phi_i(x), zero outside [0, 1]."""
    _check_index(basis, i)
    x_arr = np.asarray(x, dtype=float)
    t = np.abs(_node_coordinate(basis, x_arr) - i) / basis.degree

    if basis.family is Family.P1:
        values = np.where(t <= 1.0, 1.0 - t, 0.0)
    elif i % 2 == 0:
        values = np.where(t <= 1.0, (1.0 - t) * (1.0 - 2.0 * t), 0.0)
    else:
        values = np.where(t <= 0.5, 1.0 - 4.0 * t * t, 0.0)

    values = np.where((x_arr >= 0.0) & (x_arr <= 1.0), values, 0.0)
    if np.ndim(x) == 0:
        return float(values)
    return values


def basis_piecewise(basis: FEBasis, i: int) -> PiecewisePoly:
    """phi_i as an exact PiecewisePoly restricted to [0, 1]."""
    _check_index(basis, i)
    h = basis.h
    x_i = float(basis.design.nodes[i])

    if basis.family is Family.P2 and i % 2 == 1:
        return PiecewisePoly([x_i - h / 2, x_i + h / 2], [[0.0, 4.0 / h, -4.0 / h ** 2]])

    if basis.family is Family.P1:
        left, right = [0.0, 1.0 / h], [1.0, -1.0 / h]
    else:
        left, right = [0.0, -1.0 / h, 2.0 / h ** 2], [1.0, -3.0 / h, 2.0 / h ** 2]

    breakpoints, pieces = [x_i], []
    if i > 0:
        breakpoints.insert(0, x_i - h)
        pieces.append(left)
    if i < basis.n - 1:
        breakpoints.append(x_i + h)
        pieces.append(right)
    return PiecewisePoly(breakpoints, pieces)


def element_coefficients(basis: FEBasis, z: NodalLike) -> np.ndarray:
    """Ascending local coefficients of P_n z per element.

    Shape is (n_elements, degree + 1, *z.shape[1:]), in the local variable
    s = x - left element boundary.
    """
    values = _nodal_values(basis, z)
    local = values[basis.element_nodes()]           # (E, nloc, ...)
    shapes = _LOCAL_SHAPES[basis.family]             # (deg+1, nloc)
    coeffs = np.einsum("pk,ek...->ep...", shapes, local)
    scale = basis.h ** -np.arange(basis.degree + 1)
    return coeffs * scale.reshape((1, -1) + (1,) * (coeffs.ndim - 2))


def nodal_ppoly(basis: FEBasis, z: NodalLike, pad: float = 0.0) -> PPoly:
    """P_n z as a scipy PPoly, optionally with zero pieces of width ``pad``
    on both sides of [0, 1] so that antiderivatives extend correctly."""
    coeffs = element_coefficients(basis, z)
    c = np.moveaxis(coeffs[:, ::-1], 0, 1)             # (deg+1, E, ...)
    edges = np.array(basis.design.nodes[::basis.degree])
    if pad > 0.0:
        zeros = np.zeros(c.shape[:1] + (1,) + c.shape[2:])
        c = np.concatenate([zeros, c, zeros], axis=1)
        edges = np.concatenate([[-pad], edges, [1.0 + pad]])
    return PPoly(c, edges, extrapolate=True)


def reconstruct(basis: FEBasis, z: NodalLike, x):
    """P_n z evaluated at x (scalar or array), zero outside [0, 1]."""
    values = _nodal_values(basis, z)
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))

    position = _node_coordinate(basis, x_arr) / basis.degree
    element = np.clip(np.floor(position).astype(int), 0, basis.n_elements - 1)
    s = position - element
    nodes = basis.element_nodes()[element]          # only the local bases
    powers = s[:, None] ** np.arange(basis.degree + 1)[None, :]
    local_shape = powers @ _LOCAL_SHAPES[basis.family]
    result = np.sum(local_shape * values[nodes], axis=1)
    result = np.where((x_arr >= 0.0) & (x_arr <= 1.0), result, 0.0)

    if np.ndim(x) == 0:
        return float(result[0])
    return result


def reconstruct_grid(basis: FEBasis, z: np.ndarray, x: np.ndarray) -> np.ndarray:
    """P_n z at points x for a stack of nodal vectors z of shape (n, D)."""
    return nodal_ppoly(basis, z)(np.asarray(x, dtype=float))


def sample(f: Callable, design: Design) -> NodalVector:
    try:
        values = np.asarray(f(design.nodes), dtype=float)
    except TypeError:
        # scalar-only callable
        values = None
    if values is None or values.shape != design.nodes.shape:
        values = np.array([f(float(x)) for x in design.nodes], dtype=float)
    return NodalVector(values)


def basis_l2_norms(basis: FEBasis) -> np.ndarray:
    """Exact L2(0, 1) norms of every basis function."""
    return np.array([basis_piecewise(basis, i).l2_norm() for i in range(basis.n)])
