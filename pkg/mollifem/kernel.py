"""Mollifying kernels and the mollified basis K_beta * phi_i.

Convolutions are taken over the unit interval only:
(K_beta * g)(x) = integral over (0, 1) of K_beta(x - y) g(y) dy.
"""
import logging
import threading
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import sparse
from scipy.interpolate import PPoly

from .errors import IndexOutOfRange, LengthMismatch, NotAProbabilityWeight, OrderCapExceeded
from .mesh_fe import FEBasis, NodalLike, basis_piecewise, nodal_ppoly, reconstruct
from .piecewise import PiecewisePoly
from .quadrature import GridSpec, simpson

logger = logging.getLogger(__name__)

ORDER_CAP = 10
MASS_TOL = 1e-12
NONZERO_MOMENT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Kernel:
    name: str
    shape: PiecewisePoly = field(repr=False)
    s_r: int

    @classmethod
    def from_shape(cls, shape: PiecewisePoly, name: str = "custom") -> "Kernel":
        return cls(name=name, shape=shape, s_r=detect_order(shape))

    @classmethod
    def from_pieces(cls, breakpoints: Sequence[float], pieces: Sequence[Sequence[float]],
                    name: str = "custom") -> "Kernel":
        return cls.from_shape(PiecewisePoly(breakpoints, pieces), name=name)

    @property
    def support_bound(self) -> float:
        """M with supp K contained in [-M, M]."""
        lo, hi = self.shape.support
        return max(abs(lo), abs(hi))

    def scaled(self, beta: float) -> PiecewisePoly:
        return self.shape.scaled(beta)

    def truncated_power_terms(self) -> List[Tuple[float, int, float]]:
        """(a, l, J) with K(u) = sum J * (u - a)_+^l / l!.

        J is the jump of the l-th derivative of K at breakpoint a.
        """
        bp = self.shape.breakpoints
        pieces = self.shape.pieces
        terms = []
        for j, a in enumerate(bp):
            right = pieces[j] if j < len(pieces) else np.zeros(1)
            left = pieces[j - 1] if j > 0 else np.zeros(1)
            width_left = bp[j] - bp[j - 1] if j > 0 else 0.0
            for l in range(self.shape.degree + 1):
                from_right = factorial(l) * right[l] if l < len(right) else 0.0
                from_left = P.polyval(width_left, P.polyder(left, l)) if l < len(left) else 0.0
                jump = from_right - from_left
                if jump != 0.0:
                    terms.append((float(a), l, float(jump)))
        return terms


def moment(kernel: Union[Kernel, PiecewisePoly], r: int) -> float:
    if r < 0:
        raise ValueError("moment order must be nonnegative")
    shape = kernel.shape if isinstance(kernel, Kernel) else kernel
    return shape.moment(r)


def detect_order(kernel: Union[Kernel, PiecewisePoly]) -> int:
    """Smallest r >= 1 whose moment does not vanish."""
    mass = moment(kernel, 0)
    if abs(mass - 1.0) > MASS_TOL:
        raise NotAProbabilityWeight(f"kernel mass is {mass:.12g}, expected 1")
    for r in range(1, ORDER_CAP + 1):
        if abs(moment(kernel, r)) > NONZERO_MOMENT_TOL:
            return r
    raise OrderCapExceeded(f"moments 1..{ORDER_CAP} all vanish")


# Indicator of [0, 1]: not centred, order 1.
K = Kernel.from_pieces([0.0, 1.0], [[1.0]], name="K")
# Half the indicator of [-1, 1]: symmetric, order 2.
H = Kernel.from_pieces([-1.0, 1.0], [[0.5]], name="H")

BUILTIN_KERNELS: Dict[str, Kernel] = {"K": K, "H": H}


class MollifiedBasisCache:
    """Memoises K_beta * phi_i per (kernel, beta, basis).

    Population is idempotent: two threads computing the same entry store
    equal values and the first one wins.
    """

    def __init__(self, maxsize: int = 32):
        self.maxsize = maxsize
        self._entries: Dict[tuple, List[Optional[PiecewisePoly]]] = {}
        self._lock = threading.Lock()

    def get(self, kernel: Kernel, beta: float, basis: FEBasis, i: int) -> PiecewisePoly:
        key = (kernel, float(beta), basis)
        slots = self._entries.get(key)
        if slots is None:
            with self._lock:
                if len(self._entries) >= self.maxsize:
                    self._entries.pop(next(iter(self._entries)))
                slots = self._entries.setdefault(key, [None] * basis.n)
        cached = slots[i]
        if cached is None:
            cached = kernel.scaled(beta).convolve(basis_piecewise(basis, i))
            with self._lock:
                if slots[i] is None:
                    slots[i] = cached
                cached = slots[i]
            logger.debug("cached %s*phi_%d (beta=%g, %s n=%d)", kernel.name, i, beta,
                         basis.family.value, basis.n)
        return cached

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()


_cache = MollifiedBasisCache()


def convolve_basis(kernel: Kernel, beta: float, basis: FEBasis, i: int) -> PiecewisePoly:
    """Exact K_beta * phi_i on the real line."""
    if beta <= 0:
        raise ValueError("beta must be positive; beta = 0 is the identity")
    if not 0 <= i < basis.n:
        raise IndexOutOfRange(f"basis index {i} outside [0, {basis.n})")
    return _cache.get(kernel, beta, basis, i)


def convolve_oracle(kernel: Kernel, beta: float, g: Callable, x, m: int = 200,
                    breakpoints: Optional[Sequence[float]] = None):
    """Composite-Simpson (K_beta * g)(x) over (0, 1).

    Integrates K(u) g(x - beta u) in the kernel variable u, split at the
    kernel breakpoints and at any known ``breakpoints`` of g, with ``m``
    subintervals per piece.
    """
    shape = kernel.shape
    known = np.asarray(breakpoints if breakpoints is not None else [], dtype=float)

    def at(x0: float) -> float:
        lo, hi = shape.support
        # y = x0 - beta u must stay in (0, 1)
        lo, hi = max(lo, (x0 - 1.0) / beta), min(hi, x0 / beta)
        if hi <= lo:
            return 0.0
        cuts = np.concatenate([[lo, hi], shape.breakpoints, (x0 - known) / beta])
        cuts = np.unique(cuts[(cuts >= lo) & (cuts <= hi)])
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            k = int(np.clip(np.searchsorted(shape.breakpoints, 0.5 * (a + b), side="right") - 1,
                            0, len(shape.pieces) - 1))
            origin, coeffs = shape.breakpoints[k], shape.pieces[k]

            def integrand(u, origin=origin, coeffs=coeffs):
                return P.polyval(u - origin, coeffs) * g(x0 - beta * u)

            total += simpson(integrand, GridSpec(m=m, a=float(a), b=float(b)))
        return total

    if np.ndim(x) == 0:
        return at(float(x))
    return np.array([at(float(x0)) for x0 in np.asarray(x, dtype=float)])


def mollify(f: Callable, kernel: Kernel, beta: float, x, m: int = 200):
    """K_beta * f on (0, 1) for an arbitrary callable f (beta = 0 gives f)."""
    if beta == 0:
        return f(np.asarray(x, dtype=float))
    return convolve_oracle(kernel, beta, f, x, m=m)


def mollified_reconstruct(basis: FEBasis, z: NodalLike, kernel: Optional[Kernel], beta: float, x):
    """sum_i z_i (K_beta * phi_i)(x); the plain reconstruction when beta = 0."""
    if kernel is None or beta == 0:
        return reconstruct(basis, z, x)
    values = np.asarray(z, dtype=float)
    if values.shape[0] != basis.n:
        raise LengthMismatch(f"nodal vector has length {values.shape[0]}, basis has {basis.n} nodes")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    total = np.zeros_like(x_arr)
    for i in np.flatnonzero(values):
        total += values[i] * convolve_basis(kernel, beta, basis, i)(x_arr)
    if np.ndim(x) == 0:
        return float(total[0])
    return total


def mollified_norms(basis: FEBasis, kernel: Kernel, beta: float,
                    lo: Optional[float] = None, hi: Optional[float] = None) -> np.ndarray:
    """Exact L2 norms of K_beta * phi_i, on the real line unless [lo, hi] is given."""
    return np.array([convolve_basis(kernel, beta, basis, i).l2_norm(lo, hi) for i in range(basis.n)])


# Kernel windows wider than this many element widths use the antiderivative route.
SPARSE_WINDOW = 4.0


def _sorted_points(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    order = np.argsort(x, kind="stable")
    return x[order], order


def mollifier_matrix(basis: FEBasis, kernel: Kernel, beta: float, x: np.ndarray) -> sparse.csr_matrix:
    """Sparse A with A[j, i] = (K_beta * phi_i)(x_j)."""
    x = np.asarray(x, dtype=float)
    xs, order = _sorted_points(x)
    rows, cols, vals = [], [], []
    for i in range(basis.n):
        psi = convolve_basis(kernel, beta, basis, i)
        lo, hi = psi.support
        start, stop = np.searchsorted(xs, lo, side="left"), np.searchsorted(xs, hi, side="right")
        values = psi(xs[start:stop])
        keep = np.flatnonzero(values)
        rows.append(order[start + keep])
        cols.append(np.full(len(keep), i))
        vals.append(values[keep])
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(x), basis.n),
    )


class MollifiedOperator:
    """The linear map z -> (K_beta * P_n z)(x) on a fixed set of points.

    Narrow kernels go through a sparse matrix of exact mollified basis
    values. Wide kernels use the truncated-power expansion
    K_beta * g = sum J beta^(-l-1) G_(l+1)(x - beta a) against repeated
    antiderivatives G of g, whose cost does not grow with beta but whose
    rounding error grows like 1/beta.
    """

    def __init__(self, basis: FEBasis, kernel: Optional[Kernel], beta: float, x):
        if beta < 0:
            raise ValueError("beta must be nonnegative")
        self.basis = basis
        self.kernel = None if beta == 0 else kernel
        self.beta = float(beta) if self.kernel is not None else 0.0
        self.x = np.asarray(x, dtype=float)
        self._matrix = None
        if self.kernel is not None and self.sparse:
            self._matrix = mollifier_matrix(basis, self.kernel, self.beta, self.x)
            logger.debug("sparse mollifier %s beta=%g n=%d nnz=%d", self.kernel.name, self.beta,
                         basis.n, self._matrix.nnz)

    @property
    def sparse(self) -> bool:
        if self.kernel is None:
            return False
        lo, hi = self.kernel.shape.support
        return self.beta * (hi - lo) <= SPARSE_WINDOW * self.basis.h

    def __call__(self, z: np.ndarray) -> np.ndarray:
        """Values at x for nodal vectors z of shape (n,) or (n, D)."""
        z = np.asarray(z, dtype=float)
        if z.shape[0] != self.basis.n:
            raise LengthMismatch(f"nodal vector has length {z.shape[0]}, basis has {self.basis.n} nodes")
        if self.kernel is None:
            return nodal_ppoly(self.basis, z)(self.x)
        if self._matrix is not None:
            return np.asarray(self._matrix @ z)
        return self._truncated_power(z)

    def _truncated_power(self, z: np.ndarray) -> np.ndarray:
        pp = nodal_ppoly(self.basis, z, pad=1.0)
        antiderivatives: Dict[int, PPoly] = {}
        total = np.zeros(self.x.shape + z.shape[1:])
        for a, l, jump in self.kernel.truncated_power_terms():
            if l + 1 not in antiderivatives:
                antiderivatives[l + 1] = pp.antiderivative(l + 1)
            total += jump * self.beta ** (-l - 1) * antiderivatives[l + 1](self.x - self.beta * a)
        return total


def mollified_grid(basis: FEBasis, z: np.ndarray, kernel: Optional[Kernel], beta: float,
                   x: np.ndarray) -> np.ndarray:
    """K_beta * P_n z at points x for a stack of nodal vectors z of shape (n, D)."""
    return MollifiedOperator(basis, kernel, beta, x)(z)
