"""Chebyshev-Gauss-Lobatto collocation in the latitude coordinate mu = cos(colatitude)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.fft import dct


class NonSmoothError(ValueError):
    """Raised when a profile's Chebyshev tail is too large for spectral accuracy."""


def cheb_nodes(n: int) -> np.ndarray:
    """``n`` Gauss-Lobatto nodes on [-1, 1] in increasing order."""
    m = n - 1
    return -np.cos(np.pi * np.arange(n) / m)


def cheb_diff_matrix(n: int) -> np.ndarray:
    """First-derivative matrix on the increasing Lobatto nodes (negative-sum diagonal)."""
    m = n - 1
    j = np.arange(n)
    x = np.cos(np.pi * j / m)
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c = c * (-1.0) ** j
    X = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (X + np.eye(n))
    D = D - np.diag(D.sum(axis=1))
    return D[::-1, ::-1].copy()


def clenshaw_curtis_weights(n: int) -> np.ndarray:
    """Quadrature weights for ``int_{-1}^{1}`` on the Lobatto nodes (symmetric in mu)."""
    m = n - 1
    theta = np.pi * np.arange(n) / m
    w = np.zeros(n)
    v = np.ones(n - 2)
    inner = theta[1:-1]
    if m % 2 == 0:
        w[0] = w[-1] = 1.0 / (m * m - 1)
        for k in range(1, m // 2):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k * k - 1)
        v -= np.cos(m * inner) / (m * m - 1)
    else:
        w[0] = w[-1] = 1.0 / (m * m)
        for k in range(1, (m - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k * k - 1)
    w[1:-1] = 2.0 * v / m
    return w


@dataclass(frozen=True, eq=False)
class CollocationGrid:
    """Lobatto nodes in mu with derivative matrix, round Laplacian and quadrature for dV0 = dmu dtheta.

    ``n`` is the number of nodes; polynomials up to degree ``n - 1`` are
    represented exactly and Clenshaw-Curtis integrates them exactly.
    """

    n: int = 128

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("need at least 8 nodes")

    @cached_property
    def mu(self) -> np.ndarray:
        return cheb_nodes(self.n)

    @cached_property
    def w(self) -> np.ndarray:
        """``1 - mu^2``, exactly zero at the poles."""
        w = 1.0 - self.mu ** 2
        w[0] = w[-1] = 0.0
        return w

    @cached_property
    def D(self) -> np.ndarray:
        return cheb_diff_matrix(self.n)

    @cached_property
    def D2(self) -> np.ndarray:
        return self.D @ self.D

    @cached_property
    def lap0(self) -> np.ndarray:
        """Axisymmetric round Laplacian ``phi -> (w phi')'`` as a matrix."""
        # weights^T lap0 = 0 up to rounding (Clenshaw-Curtis is exact for the
        # derivative of the flux), which gives discrete conservation of mass
        return self.D @ (self.w[:, None] * self.D)

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights for ``int . dV0`` (includes the 2 pi from theta)."""
        return 2.0 * np.pi * clenshaw_curtis_weights(self.n)

    @property
    def exactness_degree(self) -> int:
        return self.n - 1

    # spectral helpers ------------------------------------------------------
    #
    # Analysis-side derivatives act on Chebyshev coefficients chopped at the
    # rounding plateau.  Differentiating the raw interpolant amplifies rounding
    # noise by roughly n^2 per derivative, which would make nested operators
    # (four or six derivatives) depend on the node count; the chopped series
    # gives resolution-independent values for resolved data.  The dense
    # matrices ``D`` and ``lap0`` remain for the implicit time steppers.

    chop_tol: ClassVar[float] = 1e-14

    def chopped_coeffs(self, v: np.ndarray, tol: float | None = None) -> np.ndarray:
        a = self.cheb_coeffs(v)
        tol = self.chop_tol if tol is None else tol
        big = np.nonzero(np.abs(a) > tol * np.abs(a).max())[0]
        if big.size:
            a[big[-1] + 1:] = 0.0
        return a

    def values_from_coeffs(self, a: np.ndarray) -> np.ndarray:
        b = np.zeros(self.n)
        b[: len(a)] = a[: self.n]
        b[0] *= 2.0
        b[-1] *= 2.0
        return (dct(b, type=1) / 2.0)[::-1]

    def chop(self, v: np.ndarray, tol: float | None = None) -> np.ndarray:
        """Nodal values of the interpolant with its tail below ``tol`` (relative) removed."""
        return self.values_from_coeffs(self.chopped_coeffs(v, tol))

    def bandwidth(self, v: np.ndarray, tol: float, floor: float = 0.0) -> int:
        """Number of leading Chebyshev modes up to the last one above ``tol * max(max|a_k|, floor)``."""
        a = np.abs(self.cheb_coeffs(v))
        big = np.nonzero(a > tol * max(float(a.max()), floor))[0]
        return int(big[-1]) + 1 if big.size else 1

    def truncate(self, v: np.ndarray, keep: int) -> np.ndarray:
        """Nodal values of the interpolant restricted to its first ``keep`` modes."""
        return self.values_from_coeffs(self.cheb_coeffs(v)[:keep])

    def d(self, v: np.ndarray) -> np.ndarray:
        """``d/dmu`` of the nodal profile."""
        return self.values_from_coeffs(C.chebder(self.chopped_coeffs(v)))

    def lap_round(self, v: np.ndarray) -> np.ndarray:
        """``(w v')'``; constants map to exactly zero."""
        return self.d(self.w * self.d(v))

    def integrate(self, v: np.ndarray) -> float:
        return float(self.weights @ v)

    def cheb_coeffs(self, v: np.ndarray) -> np.ndarray:
        """Chebyshev coefficients of the interpolant (via a type-I DCT)."""
        m = self.n - 1
        a = dct(np.asarray(v, dtype=float)[::-1], type=1) / m
        a[0] /= 2.0
        a[-1] /= 2.0
        return a

    def interpolate(self, v: np.ndarray, x) -> np.ndarray:
        return C.chebval(np.asarray(x, dtype=float), self.chopped_coeffs(v))

    tail_floor: ClassVar[float] = 1e-6

    def tail_ratio(self, v: np.ndarray, fraction: float = 0.1, scale: float | None = None) -> float:
        """Largest coefficient among the top ``fraction`` of modes relative to ``scale``.

        ``scale`` defaults to the largest coefficient, but never less than
        ``tail_floor``, so a profile that is zero up to rounding (the round
        fixed point) is not judged against its own noise: with the default
        threshold 1e-8 the floor lets through tails of 1e-14 in absolute size.  Pass a reference
        magnitude for fields that may legitimately vanish relative to others.
        """
        a = np.abs(self.cheb_coeffs(v))
        if scale is None:
            scale = max(float(a.max()), self.tail_floor)
        if scale == 0.0:
            return 0.0
        k = max(1, int(np.ceil(fraction * a.size)))
        return float(a[-k:].max() / scale)

    def check_smooth(self, v: np.ndarray, threshold: float = 1e-8, what: str = "profile",
                     scale: float | None = None) -> None:
        if not np.all(np.isfinite(v)):
            raise NonSmoothError(f"{what} has non-finite values")
        r = self.tail_ratio(v, scale=scale)
        if r > threshold:
            raise NonSmoothError(
                f"{what} is under-resolved: Chebyshev tail ratio {r:.3e} exceeds {threshold:.1e}; "
                "increase the node count or smooth the data"
            )

    def legendre_profile(self, coeffs) -> np.ndarray:
        """``sum_k coeffs[k] P_k(mu)`` on the nodes."""
        return np.polynomial.legendre.legval(self.mu, np.asarray(coeffs, dtype=float))


_GRIDS: dict[int, CollocationGrid] = {}


def get_grid(n: int = 128) -> CollocationGrid:
    """Shared grid instance per node count (grids are immutable)."""
    g = _GRIDS.get(n)
    if g is None:
        g = _GRIDS[n] = CollocationGrid(n)
    return g
