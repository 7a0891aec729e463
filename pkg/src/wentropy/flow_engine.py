"""Normalized Kähler-Ricci flow on the round sphere and the backward conjugate heat equation.

The metric flow ``dg/dt = -Ric(g) + g`` reduces to ``du/dt = (1 - K) / 2`` for the
conformal factor.  It is integrated in the variable ``v = exp(2u)``, for which

    dv/dt = v - 1 + lap0(log v) / 2,

by the trapezoidal rule with Newton inner solves.  Quadrature of ``lap0`` of
anything vanishes, so the scheme conserves the area ``int v dV0`` exactly once it
equals ``4 pi``; the initial factor is shifted by a constant to make that so.

The conjugate heat equation for ``w = exp(-f)`` becomes, for the density
``rho = exp(-f) v`` with respect to ``dV0``, the conservation law

    d rho / dt = -lap0(exp(-2u) rho) / 2,

which is well posed backward in time and is integrated backward by the
trapezoidal rule; its mass is conserved exactly by the same quadrature argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import lu_factor, lu_solve

from .grid import CollocationGrid, get_grid
from .profile_geometry import KahlerState, ScalarProfile, WeightedMeasure

FOUR_PI = 4.0 * np.pi


class FlowError(RuntimeError):
    """Newton divergence, curvature blow-up, metric degeneration or loss of positivity."""


@dataclass(frozen=True)
class FlowControls:
    dt: float | None = None
    newton_tol: float = 1e-13
    newton_maxiter: int = 25
    curvature_limit: float = 1e6
    monitor: bool = True
    normalize_area: bool = True


@dataclass(frozen=True, eq=False)
class FlowTrajectory:
    """Time-stamped conformal factors ``u[i]`` and (once completed) potentials ``f[i]``."""

    grid: CollocationGrid
    times: np.ndarray
    u: np.ndarray
    f: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def complete(self) -> bool:
        return self.f is not None

    def state(self, i: int, check: bool = False) -> KahlerState:
        return KahlerState(self.u[i], self.grid, check=check)

    def f_profile(self, i: int) -> ScalarProfile:
        self._need_f()
        return ScalarProfile(self.grid, self.f[i])

    def _need_f(self):
        if self.f is None:
            raise ValueError("trajectory has no potential yet; run solve_conjugate_heat_backward")

    @cached_property
    def density(self) -> np.ndarray:
        """``exp(2u)`` per snapshot."""
        return np.exp(2.0 * self.u)

    @cached_property
    def areas(self) -> np.ndarray:
        return self.density @ self.grid.weights

    @cached_property
    def masses(self) -> np.ndarray:
        self._need_f()
        return (np.exp(-self.f) * self.density) @ self.grid.weights

    @property
    def omega(self) -> WeightedMeasure:
        """The fixed measure ``exp(-f_0) dV_{g_0}``."""
        self._need_f()
        return WeightedMeasure(self.grid, np.exp(-self.f[0]) * self.density[0])

    def area_drift(self) -> float:
        return float(np.abs(self.areas - FOUR_PI).max() / FOUR_PI)

    def mass_drift(self) -> float:
        m = self.masses
        return float(np.abs(m - m[-1]).max() / abs(m[-1]))

    @cached_property
    def _u_spline(self):
        return CubicSpline(self.times, self.u, axis=0)

    def u_at(self, t: float) -> np.ndarray:
        """Cubic interpolation in time of the conformal factor."""
        if t < self.times[0] - 1e-14 or t > self.times[-1] + 1e-14:
            raise ValueError(f"time {t} outside [{self.times[0]}, {self.times[-1]}]")
        return self._u_spline(t)

    def index_of(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"time {t} is not a stored snapshot")
        return i

    def with_f(self, f: np.ndarray, **meta) -> "FlowTrajectory":
        return replace(self, f=np.asarray(f, dtype=float), meta={**self.meta, **meta})

    def resampled(self, stride: int) -> "FlowTrajectory":
        """Every ``stride``-th snapshot (used for cheaper diagnostics)."""
        sl = slice(None, None, stride)
        return replace(self, times=self.times[sl], u=self.u[sl],
                       f=None if self.f is None else self.f[sl])


@dataclass(frozen=True, eq=False)
class Reparametrization:
    """Per-snapshot monotone maps ``mu -> Psi_t(mu)`` sampled at the nodes."""

    grid: CollocationGrid
    times: np.ndarray
    maps: np.ndarray

    def map(self, i: int) -> np.ndarray:
        return self.maps[i]

    def max_displacement(self) -> float:
        return float(np.abs(self.maps - self.grid.mu[None, :]).max())


# --------------------------------------------------------------------------
# metric flow
# --------------------------------------------------------------------------

def area_normalized_u(u: np.ndarray, grid: CollocationGrid) -> np.ndarray:
    """Shift ``u`` by the constant that makes the area exactly ``4 pi``."""
    area = grid.integrate(np.exp(2.0 * u))
    return u + 0.5 * np.log(FOUR_PI / area)


# Crank-Nicolson does not damp the stiffest collocation modes, so rounding
# noise in the top Chebyshev coefficients would accumulate over thousands of
# steps (to ~1e-11 at 256 nodes) and pollute every later fourth derivative.
# Both time loops therefore project each step onto the resolved modes plus a
# margin.  The cutoff only ever grows, and the margin makes every newly kept
# mode negligibly small, so the projection behaves as a fixed linear map and
# introduces no step-to-step jumps that time differences would amplify.
STEP_CHOP_TOL = 1e-13
STEP_CHOP_MARGIN = 8


class _Projector:
    def __init__(self, grid: CollocationGrid, tol: float = STEP_CHOP_TOL, margin: int = STEP_CHOP_MARGIN):
        self.grid = grid
        self.tol = tol
        self.margin = margin
        self.keep = 1

    def __call__(self, v: np.ndarray) -> np.ndarray:
        self.keep = min(self.grid.n, max(self.keep, self.grid.bandwidth(v, self.tol) + self.margin))
        return self.grid.truncate(v, self.keep)


def _krf_rhs(v, grid: CollocationGrid):
    """``dv/dt`` for ``v = exp(2u)``: ``v - 1 + lap0(log v) / 2`` with the spectral Laplacian.

    The dense collocation Laplacian loses about ``n^4`` ulps, which at 256 nodes
    is a curvature error near 1e-7; it is used only in the Newton Jacobian.
    """
    return v - 1.0 + 0.5 * grid.lap_round(np.log(v))


def _krf_steps(v0: np.ndarray, grid: CollocationGrid, dt: float, steps: int, ctl: FlowControls,
               store: bool = True):
    L = grid.lap0
    n = grid.n
    eye = np.eye(n)
    proj = _Projector(grid)
    v = proj(v0)
    out = [v.copy()] if store else None
    newton_its = []
    for step in range(steps):
        fv = _krf_rhs(v, grid)
        rhs_const = v + 0.5 * dt * fv
        x = v.copy()
        for it in range(ctl.newton_maxiter):
            g = x - 0.5 * dt * _krf_rhs(x, grid) - rhs_const
            J = (1.0 - 0.5 * dt) * eye - 0.25 * dt * L * (1.0 / x)[None, :]
            dx = np.linalg.solve(J, g)
            x = x - dx
            if x.min() < 1e-10:
                raise FlowError(f"metric degenerated during Newton solve at step {step}")
            if np.abs(dx).max() <= ctl.newton_tol * max(1.0, np.abs(x).max()):
                break
        else:
            raise FlowError(f"Newton did not converge at step {step} (last update {np.abs(dx).max():.2e})")
        newton_its.append(it + 1)
        v = proj(x)
        K = (1.0 - 0.5 * grid.lap_round(np.log(v))) / v
        if np.abs(K).max() > ctl.curvature_limit:
            raise FlowError(f"curvature blow-up at step {step}: max|K| = {np.abs(K).max():.3e}")
        if store:
            out.append(v.copy())
    return (np.array(out) if store else v), newton_its


def convergence_order(initial: KahlerState, T: float, base_steps: int = 40,
                      ctl: FlowControls = FlowControls()) -> float:
    """Observed order from three step sizes ``T/s, T/2s, T/4s`` (Richardson ratio of final states)."""
    u0 = area_normalized_u(initial.u, initial.grid) if ctl.normalize_area else initial.u
    v0 = np.exp(2.0 * u0)
    finals = []
    for s in (base_steps, 2 * base_steps, 4 * base_steps):
        v, _ = _krf_steps(v0, initial.grid, T / s, s, ctl, store=False)
        finals.append(0.5 * np.log(v))
    e1 = np.abs(finals[0] - finals[1]).max()
    e2 = np.abs(finals[1] - finals[2]).max()
    if e2 == 0.0:
        return float("inf")
    return float(np.log2(e1 / e2))


def evolve_krf(initial: KahlerState, T: float = 1.0, controls: FlowControls = FlowControls(),
               steps: int | None = None) -> FlowTrajectory:
    """Integrate the normalized flow from ``initial`` over ``[0, T]`` and store every step."""
    if not 0.0 < T <= 5.0:
        raise ValueError("T must lie in (0, 5]")
    grid = initial.grid
    if steps is None:
        dt = controls.dt if controls.dt is not None else T / 2000.0
        steps = int(round(T / dt))
    dt = T / steps
    u0 = np.asarray(initial.u, dtype=float)
    shift = 0.0
    if controls.normalize_area:
        un = area_normalized_u(u0, grid)
        shift = float(un[0] - u0[0])
        u0 = un
    v, its = _krf_steps(np.exp(2.0 * u0), grid, dt, steps, controls)
    times = np.linspace(0.0, T, steps + 1)
    meta = {"scheme": "trapezoidal+Newton", "dt": dt, "steps": steps, "T": T, "nodes": grid.n,
            "area_shift": shift, "newton_iterations_max": int(max(its) if its else 0)}
    if controls.monitor:
        meta["observed_order"] = convergence_order(initial, T, ctl=controls)
    return FlowTrajectory(grid, times, 0.5 * np.log(v), None, meta)


# --------------------------------------------------------------------------
# backward conjugate heat equation
# --------------------------------------------------------------------------

def default_terminal_potential(traj: FlowTrajectory, epsilon: float = 0.1) -> np.ndarray:
    """``f_T = log(dV_T / dV0) + epsilon P2(mu)``."""
    mu = traj.grid.mu
    return 2.0 * traj.u[-1] + epsilon * 0.5 * (3.0 * mu ** 2 - 1.0)


def _backward_step(rho_next, E_n, E_next, dt, L, eye):
    c = 0.25 * dt
    A = eye - c * L * E_n[None, :]
    rhs = rho_next + c * (L @ (E_next * rho_next))
    return np.linalg.solve(A, rhs)


def solve_conjugate_heat_backward(traj: FlowTrajectory, f_T=None, epsilon: float = 0.1,
                                  max_halvings: int = 6) -> FlowTrajectory:
    """Solve ``2 dw/dt = -lap w + (Scal - 2) w`` for ``w = exp(-f)`` from ``t = T`` down to 0."""
    grid = traj.grid
    if f_T is None:
        f_T = default_terminal_potential(traj, epsilon)
    f_T = np.asarray(f_T.values if isinstance(f_T, ScalarProfile) else f_T, dtype=float)
    grid.check_smooth(f_T, what="terminal potential f_T")
    L = grid.lap0
    eye = np.eye(grid.n)
    M = traj.n_steps
    E = np.exp(-2.0 * traj.u)
    rho = np.empty_like(traj.u)
    proj = _Projector(grid)
    rho[M] = proj(np.exp(-f_T) * traj.density[M])
    halvings = 0
    for n in range(M - 1, -1, -1):
        t0, t1 = traj.times[n], traj.times[n + 1]
        r = _backward_step(rho[n + 1], E[n], E[n + 1], t1 - t0, L, eye)
        if r.min() <= 0.0:
            r = _substep_backward(traj, rho[n + 1], t0, t1, L, eye, max_halvings)
            halvings += 1
        rho[n] = proj(r)
    f = 2.0 * traj.u - np.log(rho)
    return traj.with_f(f, f_T_epsilon=epsilon, backward_scheme="trapezoidal (conservative density)",
                       positivity_halvings=halvings)


def _substep_backward(traj, rho_next, t0, t1, L, eye, max_halvings):
    for level in range(1, max_halvings + 1):
        k = 2 ** level
        ts = np.linspace(t0, t1, k + 1)
        Es = [np.exp(-2.0 * traj.u_at(t)) for t in ts]
        r = rho_next
        ok = True
        for j in range(k, 0, -1):
            r = _backward_step(r, Es[j - 1], Es[j], ts[j] - ts[j - 1], L, eye)
            if r.min() <= 0.0:
                ok = False
                break
        if ok:
            return r
    raise FlowError(f"exp(-f) lost positivity on [{t0}, {t1}] after {max_halvings} halvings")


def forward_conjugate_density(traj: FlowTrajectory, i0: int, i1: int, chop_tol: float = 1e-12,
                              margin: int = 0) -> np.ndarray:
    """Re-integrate the stored density forward from snapshot ``i0`` to ``i1`` with the same scheme.

    The backward problem is ill posed forward in time: mode ``k`` grows like
    ``exp(k (k + 1) t / 2)``, and the Crank-Nicolson matrix is nearly singular
    for modes with ``k (k + 1) E dt / 4`` close to one.  Each step therefore
    keeps only the Chebyshev modes up to the starting bandwidth (coefficients
    above ``chop_tol`` relative) plus ``margin``; only short windows (a few
    hundred steps) are meaningful.
    """
    grid = traj.grid
    L = grid.lap0
    eye = np.eye(grid.n)
    E = np.exp(-2.0 * traj.u)
    rho = np.exp(-traj.f[i0]) * traj.density[i0]
    a = np.abs(grid.cheb_coeffs(rho))
    keep = int(np.nonzero(a > chop_tol * a.max())[0][-1]) + 1 + margin
    for n in range(i0, i1):
        c = 0.25 * (traj.times[n + 1] - traj.times[n])
        A = eye + c * L * E[n + 1][None, :]
        rhs = rho - c * (L @ (E[n] * rho))
        rho = np.linalg.solve(A, rhs)
        rho = grid.values_from_coeffs(grid.cheb_coeffs(rho)[:keep])
    return rho


def nonlinear_potential_residual(traj: FlowTrajectory) -> np.ndarray:
    """Per-interior-snapshot relative residual of ``2 df/dt = -lap f + |grad f|^2 - Scal + 2``.

    Time derivative by central differences on the stored potentials.
    """
    traj._need_f()
    out = []
    for i in range(1, traj.n_steps):
        s = traj.state(i)
        f = traj.f[i]
        lhs = (traj.f[i + 1] - traj.f[i - 1]) / (traj.times[i + 1] - traj.times[i - 1])
        rhs = 0.5 * (-s.laplacian_values(f) + s.grad_sq_values(f) - 2.0 * s.K + 2.0)
        scale = max(np.abs(lhs).max(), np.abs(rhs).max())
        out.append(np.abs(lhs - rhs).max() / scale if scale > 1e-12 else np.abs(lhs - rhs).max())
    return np.array(out)


# --------------------------------------------------------------------------
# gauge transport
# --------------------------------------------------------------------------

def gauge_flow(traj: FlowTrajectory) -> Reparametrization:
    """Node trajectories of ``2 dPsi/dt = -grad f o Psi`` (Heun's method, spectral interpolation)."""
    traj._need_f()
    grid = traj.grid
    from numpy.polynomial import chebyshev as C

    coeffs = []
    for i in range(len(traj.times)):
        s = traj.state(i)
        field_i = -0.5 * s.E * grid.w * grid.d(traj.f[i])
        coeffs.append(grid.chopped_coeffs(field_i))
    x = grid.mu.copy()
    maps = [x.copy()]
    for n in range(traj.n_steps):
        dt = traj.times[n + 1] - traj.times[n]
        k1 = C.chebval(x, coeffs[n])
        xp = x + dt * k1
        k2 = C.chebval(xp, coeffs[n + 1])
        x = x + 0.5 * dt * (k1 + k2)
        x[0], x[-1] = -1.0, 1.0
        if np.any(np.diff(x) <= 0.0):
            raise FlowError(f"gauge map lost monotonicity at step {n}")
        maps.append(x.copy())
    return Reparametrization(grid, traj.times.copy(), np.array(maps))


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

def perturbed_initial_state(epsilon: float = 0.05, grid: CollocationGrid | None = None,
                            legendre=None) -> KahlerState:
    """``u0 = epsilon P2(mu)`` (or a given Legendre series), before area normalisation."""
    grid = get_grid() if grid is None else grid
    coeffs = [0.0, 0.0, epsilon] if legendre is None else list(legendre)
    return KahlerState.from_legendre(coeffs, grid)


def run_flow(initial: KahlerState, T: float = 1.0, dt: float | None = None, f_T=None,
             epsilon: float = 0.1, monitor: bool = True) -> FlowTrajectory:
    """Metric flow followed by the backward solve."""
    traj = evolve_krf(initial, T, FlowControls(dt=dt, monitor=monitor))
    return solve_conjugate_heat_backward(traj, f_T, epsilon)
