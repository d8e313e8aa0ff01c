"""Exact piecewise-polynomial functions of one variable.

A PiecewisePoly is zero outside ``[breakpoints[0], breakpoints[-1]]``. Each
piece stores ascending coefficients in the local variable ``s = x - b_k``,
which keeps narrow pieces (tiny bandwidths) well conditioned. Evaluation and
integration go through ``scipy.interpolate.PPoly``; convolution, moments and
L2 norms are done piece by piece with ``numpy.polynomial``.
"""
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.interpolate import PPoly
from sortedcontainers import SortedList

# Breakpoints closer than this (relative) are the same point after rounding.
MERGE_RTOL = 64 * np.finfo(float).eps


def _shift(coeffs: np.ndarray, d: float) -> np.ndarray:
    """Coefficients of s -> p(s + d)."""
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if d == 0.0 or len(coeffs) == 1:
        return coeffs.copy()
    out = np.array([coeffs[-1]])
    for c in coeffs[-2::-1]:
        # Horner step: out * (s + d) + c
        out = P.polyadd(P.polymul(out, [d, 1.0]), [c])
    return np.pad(out, (0, len(coeffs) - len(out)))


def _add_into(acc: List[np.ndarray], k: int, coeffs: np.ndarray) -> None:
    a, b = acc[k], coeffs
    if len(a) < len(b):
        a = np.pad(a, (0, len(b) - len(a)))
    elif len(b) < len(a):
        b = np.pad(b, (0, len(a) - len(b)))
    acc[k] = a + b


def _merge_breakpoints(values: Sequence[float]) -> np.ndarray:
    merged = SortedList()
    for v in values:
        tol = MERGE_RTOL * max(1.0, abs(v))
        i = merged.bisect_left(v)
        if i < len(merged) and merged[i] - v <= tol:
            continue
        if i > 0 and v - merged[i - 1] <= tol:
            continue
        merged.add(v)
    return np.array(merged, dtype=float)


def _nearest(breakpoints: np.ndarray, v: float) -> int:
    i = int(np.searchsorted(breakpoints, v))
    if i == 0:
        return 0
    if i == len(breakpoints):
        return i - 1
    return i if breakpoints[i] - v < v - breakpoints[i - 1] else i - 1


def _piece_convolution(p: np.ndarray, w1: float, q: np.ndarray, w2: float) -> List[Tuple[float, float, np.ndarray]]:
    """Convolve p*1[0,w1] with q*1[0,w2].

    Returns ``(xi0, xi1, coeffs)`` triples, coefficients ascending in xi,
    covering ``[0, w1 + w2]``.
    """
    antiderivs = [P.polyint(P.polymul(p, [0.0] * j + [1.0])) for j in range(len(q))]
    cuts = sorted({0.0, w1, w2, w1 + w2})
    out = []
    for xi0, xi1 in zip(cuts[:-1], cuts[1:]):
        if xi1 <= xi0:
            continue
        mid = 0.5 * (xi0 + xi1)
        lower_moves = mid > w2   # lower limit is xi - w2, else 0
        upper_moves = mid < w1   # upper limit is xi, else w1
        total = np.zeros(1)
        for k, qk in enumerate(q):
            if qk == 0.0:
                continue
            for j in range(k + 1):
                a_j = antiderivs[j]
                upper = a_j if upper_moves else np.array([P.polyval(w1, a_j)])
                lower = _shift(a_j, -w2) if lower_moves else np.zeros(1)
                term = P.polysub(upper, lower)
                term = P.polymul(term, [0.0] * (k - j) + [1.0])
                total = P.polyadd(total, qk * comb(k, j) * (-1) ** j * term)
        out.append((xi0, xi1, total))
    return out


class PiecewisePoly:
    def __init__(self, breakpoints: Sequence[float], pieces: Sequence[Sequence[float]]):
        bp = np.asarray(breakpoints, dtype=float)
        if bp.ndim != 1 or len(bp) < 2:
            raise ValueError("need at least two breakpoints")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if len(pieces) != len(bp) - 1:
            raise ValueError(f"expected {len(bp) - 1} pieces, got {len(pieces)}")

        self.breakpoints = bp
        self.breakpoints.setflags(write=False)
        self.pieces: Tuple[np.ndarray, ...] = tuple(
            np.atleast_1d(np.asarray(c, dtype=float)) for c in pieces
        )

        order = max(len(c) for c in self.pieces)
        c = np.zeros((order, len(self.pieces)))
        for k, coeffs in enumerate(self.pieces):
            c[order - len(coeffs):, k] = coeffs[::-1]
        self._ppoly = PPoly(c, bp, extrapolate=False)

    @property
    def support(self) -> Tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def degree(self) -> int:
        return max(len(c) for c in self.pieces) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        values = np.nan_to_num(self._ppoly(x_arr), nan=0.0)
        if np.ndim(x) == 0:
            return float(values)
        return values

    def __mul__(self, factor: float) -> "PiecewisePoly":
        return PiecewisePoly(self.breakpoints, [factor * c for c in self.pieces])

    __rmul__ = __mul__

    def __repr__(self) -> str:
        lo, hi = self.support
        return f"PiecewisePoly([{lo:g}, {hi:g}], pieces={len(self.pieces)}, degree={self.degree})"

    def integral(self, lo: Optional[float] = None, hi: Optional[float] = None) -> float:
        a, b = self.support
        lo = a if lo is None else max(lo, a)
        hi = b if hi is None else min(hi, b)
        if hi <= lo:
            return 0.0
        return float(self._ppoly.integrate(lo, hi))

    def moment(self, r: int) -> float:
        """Exact integral of x**r times the function."""
        total = 0.0
        for b_k, w, coeffs in zip(self.breakpoints[:-1], self.widths, self.pieces):
            monomial = P.polypow([b_k, 1.0], r)
            anti = P.polyint(P.polymul(coeffs, monomial))
            total += P.polyval(w, anti)
        return float(total)

    def l2_norm_squared(self, lo: Optional[float] = None, hi: Optional[float] = None) -> float:
        total = 0.0
        for b_k, w, coeffs in zip(self.breakpoints[:-1], self.widths, self.pieces):
            s0 = 0.0 if lo is None else min(max(lo - b_k, 0.0), w)
            s1 = w if hi is None else min(max(hi - b_k, 0.0), w)
            if s1 <= s0:
                continue
            anti = P.polyint(P.polymul(coeffs, coeffs))
            total += P.polyval(s1, anti) - P.polyval(s0, anti)
        return float(total)

    def l2_norm(self, lo: Optional[float] = None, hi: Optional[float] = None) -> float:
        return float(np.sqrt(max(self.l2_norm_squared(lo, hi), 0.0)))

    def scaled(self, beta: float) -> "PiecewisePoly":
        """x -> p(x / beta) / beta, the mass-preserving dilation."""
        if beta <= 0:
            raise ValueError("beta must be positive")
        pieces = [c * beta ** -(np.arange(len(c)) + 1.0) for c in self.pieces]
        return PiecewisePoly(self.breakpoints * beta, pieces)

    def restricted(self, lo: float, hi: float) -> "PiecewisePoly":
        """Product with the indicator of [lo, hi]."""
        a, b = self.support
        lo, hi = max(lo, a), min(hi, b)
        if hi <= lo:
            raise ValueError("restriction leaves an empty support")
        inner = self.breakpoints[(self.breakpoints > lo) & (self.breakpoints < hi)]
        bp = np.concatenate([[lo], inner, [hi]])
        pieces = []
        for start in bp[:-1]:
            k = min(int(np.searchsorted(self.breakpoints, start, side="right")) - 1, len(self.pieces) - 1)
            pieces.append(_shift(self.pieces[k], start - self.breakpoints[k]))
        return PiecewisePoly(bp, pieces)

    def convolve(self, other: "PiecewisePoly") -> "PiecewisePoly":
        """Exact convolution on the whole real line.

        Output breakpoints are pairwise sums of the input breakpoints; each
        output piece has degree deg(p) + deg(q) + 1.
        """
        sums = (self.breakpoints[:, None] + other.breakpoints[None, :]).ravel()
        bp = _merge_breakpoints(sums)
        acc: List[np.ndarray] = [np.zeros(1) for _ in range(len(bp) - 1)]

        for a, w1, p in zip(self.breakpoints[:-1], self.widths, self.pieces):
            for c, w2, q in zip(other.breakpoints[:-1], other.widths, other.pieces):
                origin = a + c
                for xi0, xi1, coeffs in _piece_convolution(p, w1, q, w2):
                    k0 = _nearest(bp, origin + xi0)
                    k1 = _nearest(bp, origin + xi1)
                    for k in range(k0, k1):
                        _add_into(acc, k, _shift(coeffs, bp[k] - origin))
        return PiecewisePoly(bp, acc)

    def sample(self, per_piece: int = 10) -> np.ndarray:
        """Breakpoints plus ``per_piece`` interior points of every piece."""
        xs = [self.breakpoints]
        for b_k, w in zip(self.breakpoints[:-1], self.widths):
            xs.append(b_k + w * np.arange(1, per_piece + 1) / (per_piece + 1))
        return np.sort(np.concatenate(xs))
