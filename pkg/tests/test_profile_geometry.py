import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wentropy.entropy_lab import random_reparametrization
from wentropy.grid import NonSmoothError, get_grid
from wentropy.profile_geometry import (
    AxisymmetricMetric,
    DegenerateMetricError,
    InvariantSymmetric2Tensor,
    KahlerState,
    NotJInvariantError,
    ScalarProfile,
    WeightedMeasure,
    curvature_pairing,
    gauss_curvature,
    hessian,
    hessian_frame_components,
    reparametrize,
    tensor_covariant_norm_sq,
    weighted_integral,
)

coeffs = st.lists(st.floats(-0.3, 0.3), min_size=4, max_size=4)


def state_from(c, n=64):
    return KahlerState.from_legendre([0.0, 0.0] + list(c), get_grid(n))


def test_round_sphere():
    s = KahlerState.round(get_grid(32))
    assert np.abs(s.K - 1.0).max() < 1e-13
    assert abs(s.area - 4 * np.pi) < 1e-13


@pytest.mark.parametrize("c", [-0.4, 0.1, 0.7])
def test_curvature_of_linear_factor_closed_form(c):
    # lap0(c mu) = -2 c mu, so K = exp(-2 c mu) (1 + 2 c mu)
    g = get_grid(48)
    s = KahlerState(c * g.mu, g)
    assert np.abs(s.K - np.exp(-2 * c * g.mu) * (1 + 2 * c * g.mu)).max() < 1e-12


def test_constant_factor_scales_curvature():
    g = get_grid(32)
    s = KahlerState(np.full(g.n, 0.3), g)
    assert np.abs(gauss_curvature(s).values - np.exp(-0.6)).max() < 1e-13


@settings(max_examples=25, deadline=None)
@given(coeffs)
def test_gauss_bonnet(c):
    s = state_from(c)
    assert abs(s.grid.integrate(s.K * s.volume_density) - 4 * np.pi) < 1e-10


@settings(max_examples=20, deadline=None)
@given(coeffs)
def test_green_identity_and_conformal_dirichlet_energy(c):
    s = state_from(c)
    g = s.grid
    phi = g.legendre_profile([0.1, 0.5, -0.3, 0.2])
    psi = g.legendre_profile([0.0, -0.2, 0.4, 0.0, 0.3])
    lhs = weighted_integral(s, phi * s.laplacian_values(psi))
    rhs = -weighted_integral(s, s.grad_dot_values(phi, psi))
    assert abs(lhs - rhs) < 1e-11
    round_energy = g.integrate(g.w * g.d(phi) ** 2)
    assert abs(weighted_integral(s, s.grad_sq_values(phi)) - round_energy) < 1e-11


def test_hessian_trace_and_frame_components():
    s = state_from([0.1, -0.05, 0.08, 0.02])
    g = s.grid
    phi = g.legendre_profile([0.0, 0.3, 0.2, -0.1])
    h = hessian(s, phi)
    b11, b22 = hessian_frame_components(s, phi)
    assert np.abs(h.trace - s.laplacian_values(phi)).max() < 1e-11
    assert np.abs(h.b11 - b11).max() < 1e-11
    assert np.abs(h.b22 - b22).max() < 1e-11
    assert np.abs(h.b12).max() == 0.0


def test_covariant_norm_of_scalar_tensor():
    # nabla (lam g) = d lam (x) g, so |nabla (lam g)|^2 = 2 |grad lam|^2
    s = state_from([0.1, 0.05, -0.05, 0.0])
    g = s.grid
    lam = g.legendre_profile([0.2, 0.1, 0.3])
    val = tensor_covariant_norm_sq(s, InvariantSymmetric2Tensor.scalar(g, lam)).values
    assert np.abs(val - 2 * s.grad_sq_values(lam)).max() < 1e-12


def test_covariant_norm_of_parallel_tensor_vanishes():
    s = KahlerState.round(get_grid(32))
    val = tensor_covariant_norm_sq(s, InvariantSymmetric2Tensor.scalar(s.grid, np.ones(32))).values
    assert np.abs(val).max() < 1e-13


def test_curvature_pairing_rejects_anti_invariant_input():
    s = state_from([0.1, 0.0, 0.0, 0.0])
    g = s.grid
    h = hessian(s, g.legendre_profile([0, 0, 1]))
    with pytest.raises(NotJInvariantError):
        curvature_pairing(s, h)
    alpha = InvariantSymmetric2Tensor.scalar(g, 0.5 * np.ones(g.n))
    assert np.abs(curvature_pairing(s, alpha).values - 2 * s.K * 0.25).max() < 1e-15


@settings(max_examples=10, deadline=None)
@given(coeffs, st.integers(0, 1000))
def test_pullback_preserves_area_and_curvature(c, seed):
    s = state_from(c)
    g = s.grid
    m = random_reparametrization(seed, g)
    metric, _ = reparametrize(s, np.zeros(g.n), m)
    assert abs(metric.area - s.area) < 1e-10
    assert np.abs(metric.K - g.interpolate(s.K, m)).max() < 1e-8 * (1 + np.abs(s.K).max())


def test_reparametrization_must_fix_poles():
    s = KahlerState.round(get_grid(32))
    with pytest.raises(ValueError, match="poles"):
        reparametrize(s, np.zeros(32), 0.5 * s.grid.mu)


def test_degenerate_and_rough_inputs_rejected():
    g = get_grid(32)
    with pytest.raises(DegenerateMetricError):
        KahlerState(np.full(g.n, -20.0), g)
    with pytest.raises(DegenerateMetricError):
        AxisymmetricMetric(g, np.zeros(g.n), np.ones(g.n))
    with pytest.raises(NonSmoothError):
        KahlerState(np.abs(g.mu), g)
    with pytest.raises(ValueError):
        ScalarProfile(g, np.ones(5))


def test_weighted_measure_mass():
    g = get_grid(32)
    om = WeightedMeasure.from_log_density(g, np.zeros(g.n))
    assert abs(om.mass - 4 * np.pi) < 1e-13
    s = KahlerState.round(g)
    assert abs(weighted_integral(s, np.ones(g.n), om) - 4 * np.pi) < 1e-13
