import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.models.config import QuadratureSpec, StabilitySettings
from src.models.stability import GroupElement, Perturbation
from src.services.profile_service import profile_eval
from src.services.spectral_service import kernel_model_field, sector_bottom
from src.services.stability_service import (
    DilationGenerator,
    ProfileField,
    StabilityLab,
    TranslationGenerator,
    act,
    half_space_dirichlet,
    kernel_perturbation,
    lift,
    orbit_norms,
    random_perturbation,
    sector_perturbation,
    transverse_moments,
)
from src.utils.exceptions import DomainError, ProjectionError

LIFT_RULE = QuadratureSpec(scheme="gauss-legendre", node_count=128)
EPS = [0.1, 0.05, 0.02, 0.01]

scales = st.floats(min_value=0.2, max_value=5.0)
shifts = st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=2, max_size=2)


@pytest.fixture(scope="module")
def lab(spherical_profile, spherical_ball, stability_settings):
    return StabilityLab(spherical_profile, spherical_ball, stability_settings)


@pytest.fixture(scope="module")
def random_l2(spherical_ball):
    return random_perturbation(spherical_ball, 2, seed=1, nodes=800)


def _points(seed, count=40):
    rng = np.random.default_rng(seed)
    points = rng.normal(scale=2.0, size=(count, 3))
    points[:, 0] = np.abs(points[:, 0])
    return points


# group action

@given(scales, shifts, scales, shifts)
def test_compose_matches_nested_action(spherical_profile, a1, z1, a2, z2):
    g1, g2 = GroupElement(a1, z1), GroupElement(a2, z2)
    base = ProfileField(spherical_profile)
    points = _points(0)
    nested_value, nested_gradient = act(g1, act(g2, base))(points)
    value, gradient = act(g1.compose(g2), base)(points)
    np.testing.assert_allclose(nested_value, value, rtol=1e-10)
    np.testing.assert_allclose(nested_gradient, gradient, rtol=1e-9, atol=1e-14)


@given(scales, shifts)
def test_inverse_undoes_the_action(spherical_profile, a, z):
    g = GroupElement(a, z)
    base = ProfileField(spherical_profile)
    points = _points(1)
    value, _ = act(g.inverse(), act(g, base))(points)
    np.testing.assert_allclose(value, base(points)[0], rtol=1e-10)
    identity = g.compose(g.inverse())
    assert identity.scale == pytest.approx(1.0)
    np.testing.assert_allclose(identity.shift, 0.0, atol=1e-12)


def test_group_element_rejects_nonpositive_scale():
    with pytest.raises(DomainError):
        GroupElement(0.0, np.zeros(2))


def test_shift_dimension_is_checked(spherical_profile):
    with pytest.raises(DomainError):
        act(GroupElement(1.0, np.zeros(3)), ProfileField(spherical_profile))


def test_acted_gradient_matches_finite_differences(spherical_profile):
    field_ = act(GroupElement(1.3, [0.4, -0.2]), ProfileField(spherical_profile))
    point = np.array([0.7, 0.3, -0.5])
    _, gradient = field_(point)
    h = 1e-6
    for i in range(3):
        step = np.zeros(3)
        step[i] = h
        numeric = (field_(point + step)[0] - field_(point - step)[0]) / (2.0 * h)
        assert gradient[i] == pytest.approx(numeric, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("scale", [0.5, 1.0, 2.5])
def test_orbit_norms_are_invariant(spherical_profile, quad, scale):
    norms = orbit_norms(spherical_profile, GroupElement(scale, [0.7, -1.1]), quad)
    assert norms["bulk"] == pytest.approx(1.0, rel=1e-9)
    assert norms["boundary"] == pytest.approx(spherical_profile.T, rel=1e-9)
    assert norms["dirichlet"] == pytest.approx(spherical_profile.phi ** 2, rel=1e-9)


def test_dilation_generator_is_the_scale_derivative(spherical_profile):
    base = ProfileField(spherical_profile)
    points = _points(2)
    h = 1e-6
    plus = act(GroupElement(np.exp(h), np.zeros(2)), base)(points)[0]
    minus = act(GroupElement(np.exp(-h), np.zeros(2)), base)(points)[0]
    generator, _ = DilationGenerator(spherical_profile)(points)
    np.testing.assert_allclose((plus - minus) / (2.0 * h), generator, rtol=1e-6, atol=1e-10)


# lab fields

def test_profile_quotient_is_one(lab):
    w = lab.state_of(ProfileField(lab.profile)).w
    np.testing.assert_allclose(w.values, 0.0, atol=1e-12)
    np.testing.assert_allclose(w.boundary, 0.0, atol=1e-12)
    assert lab.deficit(lab.state_of(ProfileField(lab.profile))) == pytest.approx(0.0, abs=1e-12)


def test_dilation_quotient_matches_kernel_field(lab):
    zeta = lab.quotient(DilationGenerator(lab.profile))
    reference = kernel_model_field(lab.grid, lab.profile)
    np.testing.assert_allclose(zeta.values, reference.values, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(zeta.boundary, reference.boundary, rtol=1e-10, atol=1e-12)


def test_kernel_direction_is_tangent_to_the_orbit(lab, spherical_ball):
    phi = lab.direction(kernel_perturbation(spherical_ball, nodes=800))
    zeta = lab.quotient(DilationGenerator(lab.profile))
    lam, sigma = lab.profile.lam, lab.profile.sigma
    c = lab.grid.n_form(phi, lam, sigma, zeta) / lab.grid.n_form(zeta, lam, sigma)
    residual = phi - c * zeta
    assert lab.grid.n_form(residual, lam, sigma) / lab.grid.n_form(phi, lam, sigma) < 1e-10
    assert abs(lab.hessian_form(phi)) / lab.n_norm(phi) < 1e-8


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_higher_sectors_satisfy_linear_constraints(lab, spherical_ball, ell):
    phi = lab.direction(random_perturbation(spherical_ball, ell, seed=ell, nodes=800))
    defect = lab.constraint_defect(phi)
    assert np.max(np.abs(defect)) / np.sqrt(lab.n_norm(phi)) < 1e-10


def test_random_perturbation_is_reproducible(spherical_ball):
    first = random_perturbation(spherical_ball, 2, seed=5, nodes=300)
    second = random_perturbation(spherical_ball, 2, seed=5, nodes=300)
    other = random_perturbation(spherical_ball, 2, seed=6, nodes=300)
    np.testing.assert_array_equal(first.radial.values, second.radial.values)
    assert not np.allclose(first.radial.values, other.radial.values)
    assert first.identifier == "random-l2-seed5"


def test_perturbation_rejects_negative_sector(random_l2):
    with pytest.raises(DomainError):
        Perturbation(ell=-1, radial=random_l2.radial)


# constraints and deficit

def test_projection_at_zero_amplitude_is_trivial(lab, random_l2):
    state = lab.project_to_constraints(lab.direction(random_l2), 0.0)
    np.testing.assert_allclose(state.w.values, 0.0, atol=1e-15)
    assert state.correction == (0.0, 0.0)
    assert state.defect_before == pytest.approx(0.0, abs=1e-14)


def test_projection_restores_both_constraints(lab, random_l2):
    state = lab.project_to_constraints(lab.direction(random_l2), 0.05)
    assert np.max(np.abs(lab.constraint_values(state.w))) < 1e-12
    assert state.correction_size > 0.0
    assert state.defect_before > 1e-6
    assert state.newton_trace[-1] <= state.newton_trace[0]


def test_projection_rejects_nonpositive_competitor(lab, random_l2):
    with pytest.raises(ProjectionError):
        lab.project_to_constraints(lab.direction(random_l2), 10.0)


def test_deficit_is_nonnegative_after_projection(lab, random_l2):
    psi = lab.direction(random_l2)
    for eps in EPS:
        assert lab.deficit(lab.project_to_constraints(psi, eps)) >= 0.0


def test_orbit_points_have_zero_deficit_and_distance(lab):
    g = GroupElement(1.1, np.zeros(2))
    state = lab.state_of(act(g, ProfileField(lab.profile)))
    assert np.max(np.abs(lab.constraint_values(state.w))) < 1e-8
    assert abs(lab.deficit(state)) < 1e-8
    nearest = lab.nearest_point(state)
    assert nearest.g.scale == pytest.approx(1.1, rel=1e-6)
    assert nearest.distance < 1e-8


def test_nearest_point_is_tangent(lab, random_l2):
    state = lab.project_to_constraints(lab.direction(random_l2), 0.05)
    nearest = lab.nearest_point(state)
    assert nearest.distance > 0.0
    assert nearest.tangency["dilation"] < 1e-7
    assert nearest.tangency["translations"] < 1e-12


@pytest.mark.parametrize("n", [3, 4, 5, 7])
def test_transverse_moments(n):
    mean_w, mean_w2 = transverse_moments(n)
    assert abs(mean_w) < 1e-14
    assert mean_w2 == pytest.approx(1.0 / (n - 1), rel=1e-12)


def test_translation_generator_is_the_tangential_derivative(spherical_profile):
    x = np.array([[0.7, 0.4, 0.0], [1.3, 2.0, 0.0], [0.0, 0.5, 0.0]])
    value, gradient = TranslationGenerator(spherical_profile)(x)
    assert gradient.shape == x.shape
    _, profile_gradient = profile_eval(spherical_profile, x)
    np.testing.assert_allclose(value, profile_gradient[:, 1], rtol=1e-12)


# lift to the half-space

def test_lift_transports_the_dirichlet_energy(lab, spherical_profile, spherical_ball, random_l2):
    lifted = half_space_dirichlet(spherical_profile, lift(spherical_profile, spherical_ball, random_l2).meridian,
                                  LIFT_RULE)
    assert lifted == pytest.approx(lab.n_norm(lab.direction(random_l2)), rel=1e-5)


def test_lift_value_is_profile_times_direction(spherical_profile, spherical_ball, random_l2):
    lifted = lift(spherical_profile, spherical_ball, random_l2)
    points = _points(3, 10)
    value, _ = lifted(points)
    base, _ = profile_eval(spherical_profile, points)
    assert value.shape == base.shape
    assert np.all(np.isfinite(value))


# sweeps

def test_sweep_slopes_on_a_random_direction(lab, random_l2):
    report = lab.stability_sweep(random_l2)
    diagnostics = report.diagnostics
    assert diagnostics["defect_slope"] == pytest.approx(2.0, abs=0.1)
    assert diagnostics["correction_slope"] == pytest.approx(2.0, abs=0.1)
    assert diagnostics["max_tangency_residual"] < 1e-7
    assert min(point.deficit for point in report.sweep) >= 0.0
    assert report.q_half == pytest.approx(0.5 * report.q_ratio)
    assert report.gap is None and report.gap_half is None


def test_kernel_direction_deficit_is_higher_order(lab, spherical_ball):
    report = lab.stability_sweep(kernel_perturbation(spherical_ball, nodes=800), EPS, gap=1.0)
    distances = [point.distance / point.eps for point in report.sweep]
    assert report.diagnostics["deficit_slope"] > 2.5
    assert distances[-1] < distances[0]
    assert report.gap_half == 0.5


def test_sweep_needs_decreasing_amplitudes(lab, random_l2):
    with pytest.raises(DomainError):
        lab.stability_sweep(random_l2, [0.01, 0.02, 0.05, 0.1])


@pytest.mark.slow
def test_sector_sweep_matches_spectral_bottom(spherical_profile, spherical_ball, spectral_settings):
    bottom = sector_bottom(spherical_ball, spherical_profile, 2, settings=spectral_settings)
    lab = StabilityLab(spherical_profile, spherical_ball, StabilitySettings(radial_nodes=128, angular_nodes=64))
    report = lab.stability_sweep(sector_perturbation(bottom), gap=bottom.value)
    assert report.fitted_coefficient == pytest.approx(report.q_ratio, rel=1e-2)
    assert report.fitted_coefficient == pytest.approx(bottom.value, rel=1e-2)
    assert report.fitted_coefficient >= 0.99 * report.gap_half
    assert report.diagnostics["max_tangency_residual"] < 1e-7
