import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wentropy.grid import get_grid
from wentropy.identity_bench import (
    FLOW_TAGS,
    IdentityResult,
    PolynomialField,
    TrajectoryProbe,
    aggregate_by_tag,
    box_star,
    check_bianchi_perelman,
    check_magic_heat_slice,
    check_ricci_decomposition,
    conjugate_density_field,
    random_slice,
    refinement_verdicts,
    relative_residual,
    results_summary_json,
    results_to_csv,
    run_flow_identities,
)
from wentropy.profile_geometry import KahlerState, WeightedMeasure


def test_relative_residual_switches_to_absolute_below_floor():
    assert relative_residual([1.0, 2.0], [1.0, 2.2]) == pytest.approx(0.2 / 2.2)
    assert relative_residual([1e-12], [3e-12]) == pytest.approx(2e-12)


def test_random_slice_is_reproducible():
    s1, o1 = random_slice(7)
    s2, o2 = random_slice(7)
    assert np.array_equal(s1.u, s2.u) and np.array_equal(o1.density, o2.density)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-0.15, 0.15), min_size=4, max_size=4),
       st.lists(st.floats(-0.15, 0.15), min_size=5, max_size=5))
def test_slice_identities_hold_for_arbitrary_data(cu, cq):
    g = get_grid(64)
    state = KahlerState.from_legendre([0, 0] + cu, g)
    omega = WeightedMeasure.from_log_density(g, g.legendre_profile([cq[0], 0] + cq[1:]))
    assert check_bianchi_perelman(state, omega).passed
    assert all(r.passed for r in check_ricci_decomposition(state, omega))
    assert all(r.passed for r in check_magic_heat_slice(state, omega))


def test_probe_time_derivative_exact_for_linear_data(perturbed):
    probe = TrajectoryProbe(perturbed)
    field = PolynomialField([np.ones(probe.grid.n), 2.0 * probe.grid.mu])
    d = probe.time_derivative(lambda p, j: field.value(p, j), 1000)
    assert np.abs(d - field.dot(probe, 1000)).max() < 1e-10
    with pytest.raises(ValueError):
        probe.time_derivative(lambda p, j: field.value(p, j), 3)


def test_conjugate_density_solves_adjoint_heat_equation(perturbed):
    probe = TrajectoryProbe(perturbed)
    rho = conjugate_density_field()
    for i in (300, 1000, 1700):
        scale = np.abs(probe.grid.lap_round(np.exp(-probe.f[i]))).max()
        assert np.abs(box_star(probe, rho, i)).max() < 1e-6 * scale


def test_flow_suite_covers_every_tag_once(flow_identities):
    assert [r.tag for r in flow_identities] == list(FLOW_TAGS)


def test_flow_suite_values(flow_identities):
    by = {r.tag: r for r in flow_identities}
    failing = [r.tag for r in flow_identities if not r.passed]
    assert failing == ["heat-of-norms"]
    # frozen: the printed heat equation for |alpha|^2 + |A|^2 misses 4 K |A|^2
    assert 0.03 < by["heat-of-norms"].residual < 0.07
    assert by["heat-of-norms-corrected"].residual < 1e-6


def test_round_fixed_point_identities_at_rounding(round_run):
    results = run_flow_identities(round_run[0])
    assert all(r.at_floor() for r in results), [(r.tag, r.absolute) for r in results if not r.at_floor()]


def test_refinement_verdicts():
    mk = lambda tag, r: IdentityResult(tag, "c", r, 1.0)
    coarse = [mk("ev-H", 4e-7), mk("time-lap", 2e-9), mk("ev-scal", 2e-7)]
    fine = [mk("ev-H", 1e-7), mk("time-lap", 3e-9), mk("ev-scal", 1e-7)]
    v = refinement_verdicts(coarse, fine)
    assert v["ev-H"]["status"] == "refines"
    assert v["time-lap"]["status"] == "at noise floor"
    assert v["ev-scal"]["status"] == "stalls"


def test_aggregation_and_serialisation():
    rs = [IdentityResult("a", "seed 0", 1e-9, 1e-8), IdentityResult("a", "seed 1", 3e-8, 1e-8),
          IdentityResult("b", "x", 0.0, 1e-8)]
    agg = aggregate_by_tag(rs)
    assert [r.tag for r in agg] == ["a", "b"]
    assert agg[0].residual == 3e-8 and "seed 1" in agg[0].context and not agg[0].passed
    csv_text = results_to_csv(rs)
    assert csv_text.splitlines()[0] == "identity,context,residual,absolute_residual,tolerance,pass"
    assert csv_text.splitlines()[2].startswith("a,seed 1,2.9999999999999997e-08")
    summary = json.loads(results_summary_json(rs))
    assert summary["all_pass"] is False and len(summary["failures"]) == 1 and len(summary["rows"]) == 2
