"""Circle-invariant Kähler metrics on the Riemann sphere and their pointwise geometry.

A metric is stored through its conformal factor over the round metric of
curvature one, ``g = exp(2u) (dmu^2 / (1 - mu^2) + (1 - mu^2) dtheta^2)``, with
every field sampled at the Lobatto nodes of a :class:`~wentropy.grid.CollocationGrid`.
Primes below mean ``d/dmu``, ``w = 1 - mu^2`` and ``E = exp(-2u)``.

Symmetric 2-tensors are stored in the orthonormal frame ``e1`` (unit latitude
direction), ``e2 = J e1``.  Only three profiles are kept: the J-invariant
coefficient ``lam`` and the pole-regular anti-invariant profiles ``d`` and ``r``
with ``b11 = lam + w d``, ``b22 = lam - w d``, ``b12 = w r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np

from .grid import CollocationGrid, NonSmoothError, get_grid

#: Exact constant ``c`` in ``<alpha Rm, alpha> = c K a^2`` for ``alpha = a omega``
#: on a curve; recorded from :func:`wentropy.jets.checks.check_dim1_pairing_constant`.
PAIRING_CONSTANT = Fraction(2)

DEGENERACY_FLOOR = 1e-10


class DegenerateMetricError(ValueError):
    """The conformal density fell below the degeneration floor."""


class NotJInvariantError(ValueError):
    """A tensor expected to be a (1,1)-form has a non-negligible anti-invariant part."""


def _vals(x) -> np.ndarray:
    return x.values if isinstance(x, ScalarProfile) else np.asarray(x, dtype=float)


# --------------------------------------------------------------------------
# data types
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScalarProfile:
    """An axisymmetric scalar field sampled at the collocation nodes."""

    grid: CollocationGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"profile has shape {v.shape}, grid has {self.grid.n} nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: CollocationGrid, fn: Callable[[np.ndarray], np.ndarray]):
        return cls(grid, fn(grid.mu))

    @classmethod
    def constant(cls, grid: CollocationGrid, c: float):
        return cls(grid, np.full(grid.n, float(c)))

    @classmethod
    def legendre(cls, grid: CollocationGrid, coeffs):
        return cls(grid, grid.legendre_profile(coeffs))

    def check_smooth(self, threshold: float = 1e-8, what: str = "profile") -> "ScalarProfile":
        self.grid.check_smooth(self.values, threshold, what)
        return self

    def derivative(self) -> np.ndarray:
        return self.grid.d(self.values)

    def at(self, x) -> np.ndarray:
        return self.grid.interpolate(self.values, x)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


class AxisymmetricMetric:
    """General circle-invariant metric ``a dmu^2 / w + b w dtheta^2`` (``a, b > 0``).

    Pullbacks by latitude reparametrisations leave the conformal class of the
    round metric, so they are represented here rather than as a KahlerState.
    """

    def __init__(self, grid: CollocationGrid, a, b):
        self.grid = grid
        self.a = np.asarray(_vals(a), dtype=float)
        self.b = np.asarray(_vals(b), dtype=float)
        if min(self.a.min(), self.b.min()) < DEGENERACY_FLOOR:
            raise DegenerateMetricError("metric coefficients must stay above the degeneration floor")

    @cached_property
    def volume_density(self) -> np.ndarray:
        """``dV_g / dV_0``."""
        return np.sqrt(self.a * self.b)

    @cached_property
    def area(self) -> float:
        return self.grid.integrate(self.volume_density)

    @cached_property
    def K(self) -> np.ndarray:
        g = self.grid
        s = self.volume_density
        return -g.d(g.d(self.b * g.w) / s) / (2.0 * s)

    def laplacian_values(self, phi) -> np.ndarray:
        g = self.grid
        s = self.volume_density
        return g.d(np.sqrt(self.b / self.a) * g.w * g.d(_vals(phi))) / s

    def grad_sq_values(self, phi) -> np.ndarray:
        dp = self.grid.d(_vals(phi))
        return self.grid.w * dp * dp / self.a

    def grad_dot_values(self, phi, psi) -> np.ndarray:
        g = self.grid
        return g.w * g.d(_vals(phi)) * g.d(_vals(psi)) / self.a


class KahlerState(AxisymmetricMetric):
    """Kähler metric ``exp(2u) g_round`` for a smooth axisymmetric conformal factor ``u``."""

    def __init__(self, u, grid: CollocationGrid | None = None, check: bool = True,
                 smooth_threshold: float = 1e-8):
        if isinstance(u, ScalarProfile):
            grid = u.grid
            u = u.values
        grid = get_grid() if grid is None else grid
        u = np.array(u, dtype=float)
        u.setflags(write=False)
        if not np.all(np.isfinite(u)):
            raise ValueError("conformal factor must be finite")
        density = np.exp(2.0 * u)
        if density.min() < DEGENERACY_FLOOR:
            raise DegenerateMetricError(
                f"min exp(2u) = {density.min():.3e} is below {DEGENERACY_FLOOR:.0e}")
        if check:
            grid.check_smooth(u, smooth_threshold, "conformal factor u")
        self.grid = grid
        self.u = u
        self.a = density
        self.b = density

    @classmethod
    def round(cls, grid: CollocationGrid | None = None) -> "KahlerState":
        grid = get_grid() if grid is None else grid
        return cls(np.zeros(grid.n), grid)

    @classmethod
    def from_legendre(cls, coeffs, grid: CollocationGrid | None = None) -> "KahlerState":
        grid = get_grid() if grid is None else grid
        return cls(grid.legendre_profile(coeffs), grid)

    @property
    def u_profile(self) -> ScalarProfile:
        return ScalarProfile(self.grid, self.u)

    @cached_property
    def density(self) -> np.ndarray:
        return self.a

    @cached_property
    def E(self) -> np.ndarray:
        return np.exp(-2.0 * self.u)

    @cached_property
    def du(self) -> np.ndarray:
        return self.grid.d(self.u)

    @cached_property
    def volume_density(self) -> np.ndarray:
        return self.a

    @cached_property
    def K(self) -> np.ndarray:
        return self.E * (1.0 - self.grid.lap_round(self.u))

    @property
    def scal(self) -> np.ndarray:
        return 2.0 * self.K

    @cached_property
    def frame_twist(self) -> np.ndarray:
        """``u' w - mu``; the geodesic curvature of latitude circles is ``exp(-u) (u' w - mu) / sqrt(w)``."""
        return self.du * self.grid.w - self.grid.mu

    def laplacian_values(self, phi) -> np.ndarray:
        return self.E * self.grid.lap_round(_vals(phi))

    def grad_sq_values(self, phi) -> np.ndarray:
        dp = self.grid.d(_vals(phi))
        return self.E * self.grid.w * dp * dp

    def grad_dot_values(self, phi, psi) -> np.ndarray:
        g = self.grid
        return self.E * g.w * g.d(_vals(phi)) * g.d(_vals(psi))


@dataclass(frozen=True, eq=False)
class InvariantSymmetric2Tensor:
    """Circle-invariant symmetric 2-tensor in the frame (e1, e2 = J e1).

    ``lam`` is the J-invariant coefficient; ``d`` and ``r`` are the anti-invariant
    diagonal and off-diagonal profiles with the pole weight ``w`` divided out.
    """

    grid: CollocationGrid
    lam: np.ndarray
    d: np.ndarray
    r: np.ndarray

    @classmethod
    def zero(cls, grid: CollocationGrid):
        z = np.zeros(grid.n)
        return cls(grid, z, z, z)

    @classmethod
    def scalar(cls, grid: CollocationGrid, lam):
        z = np.zeros(grid.n)
        return cls(grid, np.asarray(_vals(lam), dtype=float), z, z)

    @property
    def b11(self) -> np.ndarray:
        return self.lam + self.grid.w * self.d

    @property
    def b22(self) -> np.ndarray:
        return self.lam - self.grid.w * self.d

    @property
    def b12(self) -> np.ndarray:
        return self.grid.w * self.r

    @property
    def trace(self) -> np.ndarray:
        return 2.0 * self.lam

    @property
    def anti_diag(self) -> np.ndarray:
        """Weighted anti-invariant diagonal entry ``w d`` (so the anti part is diag(wd, -wd))."""
        return self.grid.w * self.d

    def invariant_part(self) -> "InvariantSymmetric2Tensor":
        return InvariantSymmetric2Tensor.scalar(self.grid, self.lam)

    def anti_part(self) -> "InvariantSymmetric2Tensor":
        return InvariantSymmetric2Tensor(self.grid, np.zeros(self.grid.n), self.d, self.r)

    def norm_sq(self) -> np.ndarray:
        return self.b11 ** 2 + 2.0 * self.b12 ** 2 + self.b22 ** 2

    def invariant_norm_sq(self) -> np.ndarray:
        return 2.0 * self.lam ** 2

    def anti_norm_sq(self) -> np.ndarray:
        w = self.grid.w
        return 2.0 * w * w * (self.d ** 2 + self.r ** 2)

    def endomorphism(self) -> np.ndarray:
        """Pointwise 2x2 matrices of the associated endomorphism (orthonormal frame)."""
        out = np.empty((self.grid.n, 2, 2))
        out[:, 0, 0] = self.b11
        out[:, 0, 1] = out[:, 1, 0] = self.b12
        out[:, 1, 1] = self.b22
        return out

    def endomorphism_norm_sq(self) -> np.ndarray:
        """``Tr(B B^T)`` computed on the matrices directly."""
        m = self.endomorphism()
        return np.einsum("nij,nij->n", m, m)

    def trace_of_square(self) -> np.ndarray:
        m = self.endomorphism()
        return np.einsum("nij,nji->n", m, m)

    def pairing(self, other: "InvariantSymmetric2Tensor") -> np.ndarray:
        """Pointwise ``Tr(B C^T)``."""
        w = self.grid.w
        return 2.0 * self.lam * other.lam + 2.0 * w * w * (self.d * other.d + self.r * other.r)

    def __add__(self, other):
        return InvariantSymmetric2Tensor(self.grid, self.lam + other.lam, self.d + other.d, self.r + other.r)

    def scaled(self, s) -> "InvariantSymmetric2Tensor":
        s = _vals(s)
        return InvariantSymmetric2Tensor(self.grid, s * self.lam, s * self.d, s * self.r)


@dataclass(frozen=True, eq=False)
class WeightedMeasure:
    """Positive measure ``density * dV0``."""

    grid: CollocationGrid
    density: np.ndarray

    def __post_init__(self):
        d = np.asarray(_vals(self.density), dtype=float)
        if not np.all(np.isfinite(d)) or d.min() <= 0.0:
            raise ValueError("measure density must be finite and positive")
        object.__setattr__(self, "density", d)

    @classmethod
    def from_log_density(cls, grid: CollocationGrid, q) -> "WeightedMeasure":
        return cls(grid, np.exp(_vals(q)))

    @classmethod
    def of_state(cls, state: AxisymmetricMetric, f=None) -> "WeightedMeasure":
        """``exp(-f) dV_g`` (``f = 0`` gives the Riemannian volume)."""
        dens = state.volume_density if f is None else np.exp(-_vals(f)) * state.volume_density
        return cls(state.grid, dens)

    @property
    def log_density(self) -> np.ndarray:
        return np.log(self.density)

    @property
    def mass(self) -> float:
        return self.grid.integrate(self.density)


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def gauss_curvature(state: AxisymmetricMetric) -> ScalarProfile:
    """Gauss curvature ``K`` (scalar curvature is ``2K``)."""
    if isinstance(state, KahlerState):
        state.grid.check_smooth(state.u, what="conformal factor u")
    return ScalarProfile(state.grid, state.K)


def scalar_curvature(state: AxisymmetricMetric) -> ScalarProfile:
    return ScalarProfile(state.grid, 2.0 * state.K)


def laplacian(state: AxisymmetricMetric, phi) -> ScalarProfile:
    """``div grad phi``; non-positive at an interior maximum."""
    return ScalarProfile(state.grid, state.laplacian_values(phi))


def gradient_norm_sq(state: AxisymmetricMetric, phi) -> ScalarProfile:
    return ScalarProfile(state.grid, state.grad_sq_values(phi))


def gradient_dot(state: AxisymmetricMetric, phi, psi) -> ScalarProfile:
    return ScalarProfile(state.grid, state.grad_dot_values(phi, psi))


def _hessian_parts(state: KahlerState, phi: np.ndarray):
    g = state.grid
    dp = g.d(phi)
    lam = 0.5 * state.E * g.lap_round(phi)
    d = 0.5 * state.E * (g.d(dp) - 2.0 * state.du * dp)
    return lam, d


def hessian(state: KahlerState, phi, check: bool = True) -> InvariantSymmetric2Tensor:
    """Frame components of ``nabla d phi``.

    With ``b11 = E (lap0 phi + mu phi' - u' w phi')`` and ``b22 = E (u' w - mu) phi'``
    the traceless part is ``diag(w d, -w d)`` where ``d = E (phi'' - 2 u' phi') / 2``
    is smooth up to the poles; ``b12`` vanishes for axisymmetric ``phi``.
    """
    phi = _vals(phi)
    lam, d = _hessian_parts(state, phi)
    if check:
        scale = max(np.abs(lam).max(), np.abs(d).max(), 1.0)
        state.grid.check_smooth(d, threshold=1e-7, what="anti-invariant Hessian profile", scale=scale)
    return InvariantSymmetric2Tensor(state.grid, lam, d, np.zeros(state.grid.n))


def hessian_frame_components(state: KahlerState, phi):
    """Direct (b11, b22) from the Christoffel symbols in (mu, theta), without the split."""
    g = state.grid
    phi = _vals(phi)
    dp = g.d(phi)
    b11 = state.E * (g.lap_round(phi) + g.mu * dp - state.du * g.w * dp)
    b22 = state.E * state.frame_twist * dp
    return b11, b22


def hessian_split(state: KahlerState, phi, check: bool = True):
    """``(lam, anti)`` with J-invariant part ``lam g`` (``lam = lap phi / 2``) and traceless anti part."""
    h = hessian(state, phi, check)
    return ScalarProfile(state.grid, h.lam), h.anti_part()


def curvature_pairing(state: KahlerState, alpha: InvariantSymmetric2Tensor,
                      constant=PAIRING_CONSTANT, tol: float = 1e-9) -> ScalarProfile:
    """``<alpha Rm, alpha> = c K a^2`` for a (1,1)-form ``alpha = a omega``."""
    scale = max(np.abs(alpha.lam).max(), 1.0)
    if np.abs(alpha.anti_diag).max() > tol * scale or np.abs(alpha.b12).max() > tol * scale:
        raise NotJInvariantError("curvature pairing needs a J-invariant (1,1)-form")
    return ScalarProfile(state.grid, float(constant) * state.K * alpha.lam ** 2)


def tensor_covariant_norm_sq(state: KahlerState, b: InvariantSymmetric2Tensor,
                             check: bool = True) -> ScalarProfile:
    """``|nabla b|^2``.

    Along meridians the frame is parallel; along latitudes it rotates at the
    geodesic curvature ``k`` of the parallels, which turns the traceless part at
    rate ``2k``.  Hence ``|nabla b|^2 = 2 |lam_s|^2 + 2 (p_s^2 + q_s^2) + 8 k^2 (p^2 + q^2)``
    with ``p = w d``, ``q = w r`` and ``X_s = exp(-u) sqrt(w) X'``.
    """
    g = state.grid
    w = g.w
    if check:
        scale = max(np.abs(b.lam).max(), np.abs(b.d).max(), np.abs(b.r).max(), 1.0)
        g.check_smooth(b.d, threshold=1e-7, what="anti-invariant diagonal profile", scale=scale)
        g.check_smooth(b.r, threshold=1e-7, what="anti-invariant off-diagonal profile", scale=scale)
    dl = g.d(b.lam)
    dp = g.d(w * b.d)
    dq = g.d(w * b.r)
    tw = state.frame_twist
    val = (2.0 * state.E * w * (dl * dl + dp * dp + dq * dq)
           + 8.0 * state.E * tw * tw * w * (b.d ** 2 + b.r ** 2))
    return ScalarProfile(g, val)


def weighted_integral(state: AxisymmetricMetric, phi, weight=None) -> float:
    """``int phi exp(-f) dV_g`` when ``weight`` is a profile ``f``; ``int phi Omega`` for a measure."""
    phi = _vals(phi)
    if isinstance(weight, WeightedMeasure):
        return state.grid.integrate(phi * weight.density)
    dens = state.volume_density
    if weight is not None:
        dens = dens * np.exp(-_vals(weight))
    return state.grid.integrate(phi * dens)


def reparametrize(state: KahlerState, f, reparam) -> tuple[AxisymmetricMetric, ScalarProfile]:
    """Pull ``(g, f)`` back by the circle-equivariant map ``mu -> m(mu)``.

    ``reparam`` is a callable on node arrays or an array of node values.  The
    pulled-back metric is ``exp(2 u(m)) (m'^2 dmu^2 / (1 - m^2) + (1 - m^2) dtheta^2)``,
    so ``a = exp(2u(m)) m'^2 / q`` and ``b = exp(2u(m)) q`` with ``q = (1 - m^2) / w``
    (``q = m'`` at the poles).
    """
    g = state.grid
    mu = g.mu
    m = np.asarray(reparam(mu) if callable(reparam) else reparam, dtype=float)
    if m.shape != mu.shape:
        raise ValueError("reparametrisation must be sampled on the grid")
    if abs(m[0] + 1.0) > 1e-12 or abs(m[-1] - 1.0) > 1e-12:
        raise ValueError("reparametrisation must fix both poles")
    if np.any(np.diff(m) <= 0.0):
        raise ValueError("reparametrisation must be strictly increasing")
    dm = g.d(m)
    if dm.min() <= 0.0:
        raise ValueError("reparametrisation derivative must stay positive")
    inner = slice(1, -1)
    q = np.empty_like(m)
    q[inner] = (1.0 - m[inner] ** 2) / g.w[inner]
    q[0], q[-1] = dm[0], dm[-1]
    u_m = g.interpolate(state.u, m)
    conf = np.exp(2.0 * u_m)
    metric = AxisymmetricMetric(g, conf * dm * dm / q, conf * q)
    f_m = g.interpolate(_vals(f), m)
    return metric, ScalarProfile(g, f_m)
