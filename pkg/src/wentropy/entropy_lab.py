"""Perelman's W-functional and its first and second time derivatives along the flow.

On a curve (complex dimension one) every quantity reduces to profiles in mu:

* ``alpha* = a I`` with ``a = 1 - K - lap f / 2`` so ``|alpha*|^2 = 2 a^2``;
* ``A`` is the traceless part of the Hessian endomorphism, ``diag(s, -s)`` in the
  frame (e1, J e1), so ``|A|^2 = 2 s^2``;
* ``<alpha Rm, alpha> = c K a^2`` with the exact constant ``c`` supplied by the
  jet oracle (:data:`wentropy.profile_geometry.PAIRING_CONSTANT`).

All integrals use the weight ``exp(-f) dV_g`` of the flow gauge.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .flow_engine import FlowTrajectory
from .profile_geometry import (
    PAIRING_CONSTANT,
    AxisymmetricMetric,
    InvariantSymmetric2Tensor,
    KahlerState,
    ScalarProfile,
    _vals,
    curvature_pairing,
    hessian,
    tensor_covariant_norm_sq,
)

N_COMPLEX = 1


# --------------------------------------------------------------------------
# W and H on a single slice
# --------------------------------------------------------------------------

def w_functional_forms(state: AxisymmetricMetric, f) -> dict[str, float]:
    """The gradient, Laplacian and Harnack forms of W (equal by integration by parts)."""
    f = _vals(f)
    g = state.grid
    weight = np.exp(-f) * state.volume_density
    grad_sq = state.grad_sq_values(f)
    lap = state.laplacian_values(f)
    scal = 2.0 * state.K
    rest = scal + 2.0 * f - 2.0 * N_COMPLEX
    return {
        "gradient": g.integrate((grad_sq + rest) * weight),
        "laplacian": g.integrate((lap + rest) * weight),
        "harnack": g.integrate((2.0 * lap - grad_sq + rest) * weight),
        "scale": g.integrate((grad_sq + np.abs(lap) + np.abs(rest)) * weight),
    }


class InconsistentFormsError(ArithmeticError):
    """The three forms of W disagree beyond tolerance (under-resolved data)."""


def w_functional(state: AxisymmetricMetric, f, tol: float = 1e-9) -> float:
    """``int (|grad f|^2 + Scal + 2f - 2n) exp(-f) dV``, cross-checked against its other two forms."""
    forms = w_functional_forms(state, f)
    ref = forms["gradient"]
    spread = max(abs(forms["laplacian"] - ref), abs(forms["harnack"] - ref))
    if spread > tol * max(abs(ref), forms["scale"], 1e-300):
        raise InconsistentFormsError(f"forms of W disagree by {spread:.3e} (value {ref:.6e})")
    return ref


def h_field(state: AxisymmetricMetric, f) -> ScalarProfile:
    """``H`` with ``2H = 2 lap f - |grad f|^2 + Scal + 2f - 2n``."""
    f = _vals(f)
    two_h = (2.0 * state.laplacian_values(f) - state.grad_sq_values(f) + 2.0 * state.K
             + 2.0 * f - 2.0 * N_COMPLEX)
    return ScalarProfile(state.grid, 0.5 * two_h)


class SliceFields:
    """Every pointwise quantity of the variation formulas for one ``(g, f)``."""

    def __init__(self, state: KahlerState, f, pairing_constant=PAIRING_CONSTANT):
        self.state = state
        self.grid = state.grid
        self.f = _vals(f)
        self.pairing_constant = pairing_constant

    # basic fields
    @cached_property
    def weight(self) -> np.ndarray:
        return np.exp(-self.f) * self.state.density

    @cached_property
    def lap_f(self) -> np.ndarray:
        return self.state.laplacian_values(self.f)

    @cached_property
    def grad_f_sq(self) -> np.ndarray:
        return self.state.grad_sq_values(self.f)

    @property
    def K(self) -> np.ndarray:
        return self.state.K

    @cached_property
    def H(self) -> np.ndarray:
        return h_field(self.state, self.f).values

    @cached_property
    def hess_f(self) -> InvariantSymmetric2Tensor:
        return hessian(self.state, self.f, check=False)

    # alpha and A
    @cached_property
    def a(self) -> np.ndarray:
        """Coefficient of ``alpha* = a I``."""
        return 1.0 - self.K - 0.5 * self.lap_f

    @cached_property
    def alpha(self) -> InvariantSymmetric2Tensor:
        return InvariantSymmetric2Tensor.scalar(self.grid, self.a)

    @cached_property
    def A(self) -> InvariantSymmetric2Tensor:
        return self.hess_f.anti_part()

    @cached_property
    def s(self) -> np.ndarray:
        """Frame component of ``A = diag(s, -s)``."""
        return self.A.anti_diag

    @cached_property
    def alpha_sq(self) -> np.ndarray:
        return self.alpha.endomorphism_norm_sq()

    @cached_property
    def A_sq(self) -> np.ndarray:
        return self.A.endomorphism_norm_sq()

    # derivatives of H
    @cached_property
    def lap_H(self) -> np.ndarray:
        return self.state.laplacian_values(self.H)

    @cached_property
    def grad_H_sq(self) -> np.ndarray:
        return self.state.grad_sq_values(self.H)

    @cached_property
    def grad_H_dot_f(self) -> np.ndarray:
        return self.state.grad_dot_values(self.H, self.f)

    @cached_property
    def hess_H(self) -> InvariantSymmetric2Tensor:
        return hessian(self.state, self.H, check=False)

    @cached_property
    def H2(self) -> np.ndarray:
        """``H_2`` from the closed form ``2 H_2 = 2 lap H - 2 grad H . grad f - |alpha|^2 - |A|^2 + 2H``."""
        return 0.5 * (2.0 * self.lap_H - 2.0 * self.grad_H_dot_f - self.alpha_sq - self.A_sq
                      + 2.0 * self.H)

    # second-variation integrands
    @cached_property
    def curvature_term(self) -> np.ndarray:
        """``<alpha Rm, alpha>``."""
        return curvature_pairing(self.state, self.alpha, self.pairing_constant).values

    @cached_property
    def grad_alpha_sq(self) -> np.ndarray:
        return tensor_covariant_norm_sq(self.state, self.alpha, check=False).values

    @cached_property
    def grad_A_sq(self) -> np.ndarray:
        return tensor_covariant_norm_sq(self.state, self.A, check=False).values

    def integrate(self, x) -> float:
        return self.grid.integrate(_vals(x) * self.weight)

    def w_value(self) -> float:
        return w_functional(self.state, self.f)

    def first_variation(self) -> float:
        return self.integrate(self.alpha_sq + self.A_sq)

    def second_variation_terms(self) -> dict[str, float]:
        return {
            "alpha_sq": self.integrate(self.alpha_sq),
            "A_sq": self.integrate(self.A_sq),
            "curvature": self.integrate(2.0 * self.curvature_term),
            "grad_H": self.integrate(2.0 * self.grad_H_sq),
            "grad_alpha": self.integrate(self.grad_alpha_sq),
            "grad_A": self.integrate(self.grad_A_sq),
            "A_curvature": self.integrate(2.0 * self.K * self.A_sq),
        }

    def second_variation(self, form: str = "corrected") -> float:
        return combine_second_variation(self.second_variation_terms(), form)


def slice_fields(traj: FlowTrajectory, i: int, pairing_constant=PAIRING_CONSTANT) -> SliceFields:
    traj._need_f()
    return SliceFields(traj.state(i), traj.f[i], pairing_constant)


def h2_field(traj: FlowTrajectory, t: float) -> ScalarProfile:
    """``H_2`` at the stored snapshot nearest to ``t`` (closed form, no time derivative)."""
    if t < traj.times[0] - 1e-12 or t > traj.times[-1] + 1e-12:
        raise ValueError(f"time {t} outside the trajectory [{traj.times[0]}, {traj.times[-1]}]")
    i = int(np.argmin(np.abs(traj.times - t)))
    return ScalarProfile(traj.grid, slice_fields(traj, i).H2)


def h2_by_time_differences(traj: FlowTrajectory, i: int) -> np.ndarray:
    """``H_2 = (lap H - 2 dH/dt + 2H) / 2`` with ``dH/dt`` from fourth-order central differences."""
    if i < 2 or i > traj.n_steps - 2:
        raise ValueError("need two snapshots on each side for the time difference")
    Hs = [slice_fields(traj, j).H for j in range(i - 2, i + 3)]
    dt = traj.dt
    dH = (-Hs[4] + 8.0 * Hs[3] - 8.0 * Hs[1] + Hs[0]) / (12.0 * dt)
    sf = slice_fields(traj, i)
    return 0.5 * (sf.lap_H - 2.0 * dH + 2.0 * sf.H)


# --------------------------------------------------------------------------
# finite-difference oracle
# --------------------------------------------------------------------------

def fd_derivative(times, values, order: int = 4, step: int = 1):
    """Central time derivative on a uniform grid.

    ``step`` is the stencil spacing in samples (``h = step * dt``).  ``order = 2``
    returns plain central differences; ``order = 4`` adds one Richardson level,
    ``(4 D_h - D_2h) / 3``.  Returns ``(interior_indices, derivative)``; values
    may carry trailing axes.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < 5 or len(times) != len(values):
        raise ValueError("need at least five equally spaced samples")
    dts = np.diff(times)
    if np.abs(dts - dts[0]).max() > 1e-9 * abs(dts[0]):
        raise ValueError("time grid must be uniform")
    h = step * dts[0]
    reach = step if order == 2 else 2 * step
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    idx = np.arange(reach, len(times) - reach)
    if idx.size == 0:
        raise ValueError("series too short for the requested stencil")
    d1 = (values[idx + step] - values[idx - step]) / (2.0 * h)
    if order == 2:
        return idx, d1
    d2 = (values[idx + 2 * step] - values[idx - 2 * step]) / (4.0 * h)
    return idx, (4.0 * d1 - d2) / 3.0


# --------------------------------------------------------------------------
# variation reports
# --------------------------------------------------------------------------

DECOMPOSITION_KEYS = ("alpha_sq", "A_sq", "curvature", "grad_H", "grad_alpha", "grad_A", "A_curvature")
SECOND_VARIATION_FORMS = ("printed", "corrected")


def combine_second_variation(terms, form: str = "corrected"):
    """Assemble ``d^2 W / dt^2`` from the integrated terms.

    ``"printed"`` is ``int 2<alpha Rm, alpha> + 2|grad H|^2 - |grad alpha*|^2 - |grad A|^2``.
    ``"corrected"`` also subtracts ``int 2 K |A|^2``: the rough Laplacian of ``A``
    carries the curvature term ``2 (Ric* A + A Ric*)`` on a curve (the general
    form is :func:`wentropy.jets.checks.anti_curvature_term`), and the extra
    ``K |A|^2`` it feeds into the evolution of ``|A|^2`` ends up here.
    """
    if form not in SECOND_VARIATION_FORMS:
        raise ValueError(f"unknown form {form!r}; choose from {SECOND_VARIATION_FORMS}")
    out = terms["curvature"] + terms["grad_H"] - terms["grad_alpha"] - terms["grad_A"]
    if form == "corrected":
        out = out - terms["A_curvature"]
    return out


@dataclass
class VariationReport:
    times: np.ndarray
    W: np.ndarray
    Wdot_formula: np.ndarray
    Wdot_fd: np.ndarray
    Wddot_formula: np.ndarray | None = None
    Wddot_fd: np.ndarray | None = None
    decomposition: dict = field(default_factory=dict)
    fd_step: int = 4
    fd_order: int = 4
    interior_fraction: float = 0.8
    first_tolerance: float = 1e-5
    second_tolerance: float = 1e-3
    form: str = "corrected"
    Wddot_alternative: np.ndarray | None = None

    # residuals -----------------------------------------------------------
    def interior_mask(self) -> np.ndarray:
        t0, t1 = self.times[0], self.times[-1]
        margin = 0.5 * (1.0 - self.interior_fraction) * (t1 - t0)
        return (self.times >= t0 + margin - 1e-12) & (self.times <= t1 - margin + 1e-12)

    @staticmethod
    def _relative(a, b):
        out = np.full(a.shape, np.nan)
        ok = np.isfinite(b)
        out[ok] = np.abs(a[ok] - b[ok]) / np.maximum(np.abs(b[ok]), 1e-12)
        return out

    @property
    def first_residual(self) -> np.ndarray:
        return self._relative(self.Wdot_formula, self.Wdot_fd)

    @property
    def second_residual(self) -> np.ndarray:
        return self._relative(self.Wddot_formula, self.Wddot_fd)

    def _max_interior(self, r) -> float:
        m = self.interior_mask() & np.isfinite(r)
        return float(r[m].max()) if m.any() else float("nan")

    def max_first_residual(self) -> float:
        return self._max_interior(self.first_residual)

    def max_second_residual(self) -> float:
        if self.Wddot_formula is None:
            return float("nan")
        return self._max_interior(self.second_residual)

    def max_alternative_residual(self) -> float:
        if self.Wddot_alternative is None:
            return float("nan")
        return self._max_interior(self._relative(self.Wddot_alternative, self.Wddot_fd))

    @property
    def monotone(self) -> bool:
        return bool(np.all(self.Wdot_formula >= 0.0))

    def convexity_observation(self) -> str:
        if self.Wddot_formula is None:
            return "not computed"
        x = self.Wddot_formula[self.interior_mask()]
        if np.all(x >= 0):
            return "non-negative"
        if np.all(x <= 0):
            return "non-positive"
        return "mixed sign"

    def squared_norm_entries_nonnegative(self) -> bool:
        keys = [k for k in ("alpha_sq", "A_sq", "grad_H", "grad_alpha", "grad_A") if k in self.decomposition]
        return all(bool(np.all(self.decomposition[k] >= 0.0)) for k in keys)

    # serialisation -------------------------------------------------------
    def columns(self) -> dict[str, np.ndarray]:
        cols = {"t": self.times, "W": self.W, "Wdot_formula": self.Wdot_formula,
                "Wdot_fd": self.Wdot_fd, "Wdot_residual": self.first_residual}
        if self.Wddot_formula is not None:
            cols.update({"Wddot_formula": self.Wddot_formula, "Wddot_fd": self.Wddot_fd,
                         "Wddot_residual": self.second_residual})
            if self.Wddot_alternative is not None:
                cols["Wddot_alternative"] = self.Wddot_alternative
        for k in DECOMPOSITION_KEYS:
            if k in self.decomposition:
                cols["int_" + k] = self.decomposition[k]
        return cols

    def to_csv(self) -> str:
        from .io import format_float

        cols = self.columns()
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(list(cols))
        for row in zip(*cols.values()):
            wr.writerow([format_float(x) for x in row])
        return buf.getvalue()

    def summary(self) -> dict:
        out = {
            "max_first_residual": self.max_first_residual(),
            "first_tolerance": self.first_tolerance,
            "monotone": self.monotone,
            "fd_step_samples": self.fd_step,
            "fd_order": self.fd_order,
            "interior_fraction": self.interior_fraction,
        }
        if self.Wddot_formula is not None:
            out.update({
                "max_second_residual": self.max_second_residual(),
                "second_variation_form": self.form,
                "max_alternative_residual": self.max_alternative_residual(),
                "second_tolerance": self.second_tolerance,
                "convexity_observation": self.convexity_observation(),
                "squared_norms_nonnegative": self.squared_norm_entries_nonnegative(),
            })
        return out

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    @property
    def passed(self) -> bool:
        ok = self.max_first_residual() <= self.first_tolerance and self.monotone
        if self.Wddot_formula is not None:
            ok = ok and self.max_second_residual() <= self.second_tolerance
            ok = ok and self.squared_norm_entries_nonnegative()
        return bool(ok)


def _fd_series(times, values, step, order):
    idx, d = fd_derivative(times, values, order=order, step=step)
    out = np.full(len(times), np.nan)
    out[idx] = d
    return out


def _variation_data(traj: FlowTrajectory, second: bool, pairing_constant):
    traj._need_f()
    M = len(traj.times)
    W = np.empty(M)
    Wdot = np.empty(M)
    decomp = {k: np.empty(M) for k in DECOMPOSITION_KEYS} if second else {}
    for i in range(M):
        sf = slice_fields(traj, i, pairing_constant)
        W[i] = sf.w_value()
        if second:
            terms = sf.second_variation_terms()
            for k in DECOMPOSITION_KEYS:
                decomp[k][i] = terms[k]
            Wdot[i] = terms["alpha_sq"] + terms["A_sq"]
        else:
            Wdot[i] = sf.first_variation()
    return W, Wdot, decomp


def first_variation_report(traj: FlowTrajectory, fd_step: int = 4, fd_order: int = 4) -> VariationReport:
    """``dW/dt`` from the integral formula against central differences of ``W``."""
    W, Wdot, _ = _variation_data(traj, False, PAIRING_CONSTANT)
    fd = _fd_series(traj.times, W, fd_step, fd_order)
    return VariationReport(traj.times.copy(), W, Wdot, fd, fd_step=fd_step, fd_order=fd_order)


def second_variation_report(traj: FlowTrajectory, fd_step: int = 4, fd_order: int = 4,
                            pairing_constant=PAIRING_CONSTANT, form: str = "corrected") -> VariationReport:
    """First and second derivatives of W; the second is checked against differences of the first formula.

    ``form`` selects which closed formula fills ``Wddot_formula``; the other one
    is kept in ``Wddot_alternative`` so both can be compared.
    """
    W, Wdot, decomp = _variation_data(traj, True, pairing_constant)
    Wddot = combine_second_variation(decomp, form)
    other = "printed" if form == "corrected" else "corrected"
    fd1 = _fd_series(traj.times, W, fd_step, fd_order)
    fd2 = _fd_series(traj.times, Wdot, fd_step, fd_order)
    return VariationReport(traj.times.copy(), W, Wdot, fd1, Wddot, fd2, decomp,
                           fd_step=fd_step, fd_order=fd_order, form=form,
                           Wddot_alternative=combine_second_variation(decomp, other))


# --------------------------------------------------------------------------
# invariance under equivariant reparametrisations
# --------------------------------------------------------------------------

def random_reparametrization(seed: int, grid, amplitude: float = 0.3) -> np.ndarray:
    """Node values of ``m(mu) = mu + amplitude (1 - mu^2) p(mu)`` with a random cubic ``p``.

    ``p`` has Legendre coefficients in [-1, 1] rescaled so that ``|((1 - mu^2) p)'| <= 1/2``
    on the nodes; ``m`` then fixes the poles and ``m' >= 1 - amplitude / 2 > 0``.
    """
    rng = np.random.default_rng(seed)
    p = grid.legendre_profile(rng.uniform(-1.0, 1.0, 4))
    bump = grid.w * p
    slope = np.abs(grid.d(bump)).max()
    return grid.mu + amplitude * bump / (2.0 * slope)


def w_integrand_size(state: AxisymmetricMetric, f) -> float:
    """``int (|grad f|^2 + |Scal| + 2|f| + 2n) exp(-f) dV``: a scale for W that does not cancel.

    W itself vanishes on the round soliton, so changes in W are measured against this.
    """
    f = _vals(f)
    g = state.grid
    weight = np.exp(-f) * state.volume_density
    return g.integrate((state.grad_sq_values(f) + 2.0 * np.abs(state.K) + 2.0 * np.abs(f)
                        + 2.0 * N_COMPLEX) * weight)


def w_reparametrization_residual(state: KahlerState, f, seeds=range(5), amplitude: float = 0.3) -> float:
    """Largest change of W under pullback by random equivariant maps, relative to :func:`w_integrand_size`."""
    from .profile_geometry import reparametrize

    ref = w_functional(state, f)
    scale = max(abs(ref), w_integrand_size(state, f))
    worst = 0.0
    for seed in seeds:
        metric, f_m = reparametrize(state, f, random_reparametrization(seed, state.grid, amplitude))
        worst = max(worst, abs(w_functional(metric, f_m) - ref) / scale)
    return worst
