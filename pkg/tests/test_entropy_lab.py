import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wentropy.entropy_lab import (
    DECOMPOSITION_KEYS,
    InconsistentFormsError,
    SliceFields,
    combine_second_variation,
    fd_derivative,
    first_variation_report,
    h2_by_time_differences,
    h2_field,
    random_reparametrization,
    w_functional,
    w_functional_forms,
    w_reparametrization_residual,
)
from wentropy.flow_engine import perturbed_initial_state, run_flow
from wentropy.grid import get_grid
from wentropy.profile_geometry import KahlerState


@pytest.mark.parametrize("c", [-0.5, 0.0, 0.3, 2.0])
def test_w_of_round_sphere_with_constant_potential(c):
    # W = int (Scal + 2c - 2) exp(-c) dV = 8 pi c exp(-c)
    s = KahlerState.round(get_grid(32))
    assert abs(w_functional(s, np.full(32, c)) - 8 * np.pi * c * np.exp(-c)) < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-0.2, 0.2), min_size=3, max_size=3), st.lists(st.floats(-0.5, 0.5), min_size=3, max_size=3))
def test_forms_of_w_agree(cu, cf):
    g = get_grid(64)
    s = KahlerState.from_legendre([0, 0] + cu, g)
    forms = w_functional_forms(s, g.legendre_profile(cf))
    assert abs(forms["laplacian"] - forms["gradient"]) <= 1e-11 * forms["scale"]
    assert abs(forms["harnack"] - forms["gradient"]) <= 1e-11 * forms["scale"]


def test_under_resolved_potential_detected():
    g = get_grid(24)
    s = KahlerState.round(g)
    with pytest.raises(InconsistentFormsError):
        w_functional(s, 0.5 * np.cos(40 * np.arccos(g.mu)) + 0.3 * np.sin(23 * g.mu))


@pytest.mark.parametrize("order,degree", [(2, 2), (4, 4)])
def test_fd_derivative_exact_on_polynomials(order, degree):
    t = np.linspace(0, 1, 41)
    p = np.polynomial.Polynomial(np.arange(1, degree + 2, dtype=float))
    idx, d = fd_derivative(t, p(t), order=order, step=2)
    assert np.abs(d - p.deriv()(t[idx])).max() < 1e-9


def test_fd_derivative_rejects_bad_grids():
    with pytest.raises(ValueError):
        fd_derivative([0, 0.1, 0.3, 0.4, 0.5], np.zeros(5))
    with pytest.raises(ValueError):
        fd_derivative(np.linspace(0, 1, 5), np.zeros(5), order=3)


def test_h2_closed_form_matches_time_differences(perturbed):
    for i in (400, 1000, 1600):
        closed = h2_field(perturbed, perturbed.times[i]).values
        fd = h2_by_time_differences(perturbed, i)
        assert np.abs(closed - fd).max() / np.abs(closed).max() < 1e-5


def test_h2_field_outside_window():
    traj = run_flow(perturbed_initial_state(0.05, get_grid(32)), 0.05, 1e-2, monitor=False)
    with pytest.raises(ValueError):
        h2_field(traj, 0.2)


def test_first_variation_on_coarse_run():
    traj = run_flow(perturbed_initial_state(0.05, get_grid(48)), 0.3, 1e-3, monitor=False)
    rep = first_variation_report(traj)
    assert rep.monotone
    assert rep.max_first_residual() < 1e-4


def test_second_variation_forms_differ_by_curvature_term():
    terms = {k: float(i + 1) for i, k in enumerate(DECOMPOSITION_KEYS)}
    printed = combine_second_variation(terms, "printed")
    assert printed == terms["curvature"] + terms["grad_H"] - terms["grad_alpha"] - terms["grad_A"]
    assert combine_second_variation(terms, "corrected") == printed - terms["A_curvature"]
    with pytest.raises(ValueError):
        combine_second_variation(terms, "other")


def test_slice_first_variation_is_sum_of_squares():
    g = get_grid(64)
    s = KahlerState.from_legendre([0, 0, 0.1, -0.05], g)
    sf = SliceFields(s, g.legendre_profile([0.2, 0.1, 0.3]))
    assert sf.first_variation() > 0
    assert np.all(sf.alpha_sq >= 0) and np.all(sf.A_sq >= 0)
    # frame forms: alpha* = a I and A = diag(s, -s)
    assert np.abs(sf.alpha_sq - 2 * sf.a ** 2).max() < 1e-14
    assert np.abs(sf.A_sq - 2 * sf.s ** 2).max() < 1e-14


def test_report_serialisation(second_report):
    rep, _ = second_report
    csv_text = rep.to_csv()
    header = csv_text.splitlines()[0].split(",")
    assert header[:4] == ["t", "W", "Wdot_formula", "Wdot_fd"]
    assert "Wddot_alternative" in header and "int_A_curvature" in header
    assert len(csv_text.splitlines()) == len(rep.times) + 1
    summary = json.loads(rep.summary_json())
    assert summary["second_variation_form"] == "corrected"
    assert summary["squared_norms_nonnegative"] is True


def test_w_invariant_under_reparametrization(perturbed):
    s = perturbed.state(500)
    assert w_reparametrization_residual(s, perturbed.f[500]) < 1e-7
    m = random_reparametrization(3, s.grid)
    assert m[0] == -1.0 and m[-1] == 1.0 and np.all(np.diff(m) > 0)
