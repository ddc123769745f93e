import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.models.geometry import Branch, ModelPoint
from src.services.geometry_service import (
    ModelChart,
    conformal_factor,
    cot_kappa,
    geodesic_distance,
    locate_center,
    north_pole,
    s_kappa,
    s_kappa_prime,
    stereo_inverse,
    stereo_inverse_coords,
)
from src.utils.exceptions import DomainError, GeometryError

kappas = st.floats(0.05, 3.0).flatmap(lambda k: st.sampled_from([k, -k]))


@pytest.mark.parametrize("kappa", [2.0, -2.0])
def test_s_kappa_matches_closed_form(kappa):
    root = np.sqrt(abs(kappa))
    r = np.array([1e-7, 0.999e-4 / root, 1.001e-4 / root, 0.3, 1.0])
    exact = (np.sin(root * r) if kappa > 0 else np.sinh(root * r)) / root
    np.testing.assert_allclose(s_kappa(kappa, r), exact, rtol=1e-14)


@given(kappa=kappas, r=st.floats(0.0, 2.0))
def test_s_kappa_pythagorean_identity(kappa, r):
    s, c = s_kappa(kappa, r), s_kappa_prime(kappa, r)
    assert c * c + kappa * s * s == pytest.approx(1.0, abs=1e-9)


@given(kappa=kappas, r=st.floats(1e-6, 1.5))
def test_cot_kappa_is_log_derivative(kappa, r):
    if kappa > 0:
        r = min(r, 0.9 * np.pi / np.sqrt(kappa))
    assert cot_kappa(kappa, r) == pytest.approx(s_kappa_prime(kappa, r) / s_kappa(kappa, r), rel=1e-10)


def test_flat_curvature_is_excluded():
    with pytest.raises(DomainError):
        s_kappa(0.0, 1.0)
    with pytest.raises(DomainError):
        cot_kappa(0.0, 1.0)


@given(y=st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
def test_spherical_projection_lands_on_the_sphere(y):
    point = stereo_inverse(Branch.SPHERICAL, y)
    assert np.linalg.norm(point.coords) == pytest.approx(1.0, abs=1e-12)


@given(direction=st.lists(st.floats(-1.0, 1.0), min_size=3, max_size=3), radius=st.floats(1.01, 100.0))
def test_hyperbolic_projection_lands_on_the_upper_sheet(direction, radius):
    direction = np.array(direction)
    if np.linalg.norm(direction) < 1e-3:
        direction = np.array([1.0, 0.0, 0.0])
    y = radius * direction / np.linalg.norm(direction)
    point = stereo_inverse(Branch.HYPERBOLIC, y)
    assert point.coords[-1] >= 1.0


def test_hyperbolic_projection_needs_outside_unit_ball():
    with pytest.raises(DomainError):
        stereo_inverse(Branch.HYPERBOLIC, [0.5, 0.0, 0.0])
    with pytest.raises(DomainError):
        conformal_factor(Branch.HYPERBOLIC, [0.0, 1.0, 0.0])


def test_model_point_off_quadric():
    with pytest.raises(GeometryError):
        ModelPoint(Branch.SPHERICAL, np.array([1.0, 1.0, 0.0]))


@pytest.mark.parametrize("branch, y", [(Branch.SPHERICAL, [0.3, -0.7, 1.2]), (Branch.HYPERBOLIC, [1.5, 0.4, -0.2])])
def test_conformal_factor_is_the_pullback_density(branch, y):
    y = np.array(y)
    h = 1e-6
    for i in range(3):
        step = np.zeros(3)
        step[i] = h
        d = (stereo_inverse_coords(branch, y + step) - stereo_inverse_coords(branch, y - step)) / (2 * h)
        if branch is Branch.SPHERICAL:
            length2 = d @ d
        else:
            length2 = d[:-1] @ d[:-1] - d[-1] ** 2
        assert length2 == pytest.approx(conformal_factor(branch, y), rel=1e-7)


def test_spherical_distance_north_to_south():
    south = stereo_inverse(Branch.SPHERICAL, [0.0, 0.0, 0.0])
    distance = geodesic_distance(Branch.SPHERICAL, 4.0, north_pole(Branch.SPHERICAL, 3), south)
    assert distance == pytest.approx(2.0 * np.pi, rel=1e-14)


@pytest.mark.parametrize("branch, y1, y2", [
    (Branch.SPHERICAL, [0.2, 1.0], [-3.0, 0.5]),
    (Branch.HYPERBOLIC, [2.0, 0.0], [0.0, -1.5]),
])
def test_distance_is_symmetric(branch, y1, y2):
    p, q = stereo_inverse(branch, y1), stereo_inverse(branch, y2)
    assert geodesic_distance(branch, 1.0, p, q) == pytest.approx(geodesic_distance(branch, 1.0, q, p), rel=1e-14)
    assert geodesic_distance(branch, 1.0, p, p) == 0.0


def test_distance_rejects_mixed_branches():
    p = stereo_inverse(Branch.SPHERICAL, [2.0, 0.0])
    q = stereo_inverse(Branch.HYPERBOLIC, [2.0, 0.0])
    with pytest.raises(GeometryError):
        geodesic_distance(Branch.SPHERICAL, 1.0, p, q)


@pytest.mark.parametrize("branch, t", [
    (Branch.SPHERICAL, -2.0), (Branch.SPHERICAL, 0.0), (Branch.SPHERICAL, 0.7), (Branch.SPHERICAL, 3.0),
    (Branch.HYPERBOLIC, -1.5), (Branch.HYPERBOLIC, -4.0),
])
def test_center_height_closed_form(branch, t):
    assert locate_center(branch, 3, t) == pytest.approx(np.sqrt(branch.eta + t * t), rel=1e-10)


def test_spherical_ball_closed_forms(spherical_ball):
    ball = spherical_ball
    t = ball.shift
    root_alpha = np.sqrt(ball.alpha)
    assert ball.beta == pytest.approx(-t / root_alpha, rel=1e-9, abs=1e-12)
    assert ball.radius == pytest.approx(root_alpha * np.arccos(-t / np.sqrt(1.0 + t * t)), rel=1e-9)
    assert ball.center_height == pytest.approx(np.sqrt(1.0 + t * t), rel=1e-10)


def test_hyperbolic_ball_closed_forms(hyperbolic_ball):
    ball = hyperbolic_ball
    t = ball.shift
    root_alpha = np.sqrt(ball.alpha)
    assert ball.beta == pytest.approx(-t / root_alpha, rel=1e-9)
    assert ball.radius == pytest.approx(root_alpha * np.arccosh(abs(t) / np.sqrt(t * t - 1.0)), rel=1e-9)
    assert ball.kappa * ball.alpha == pytest.approx(-1.0)


def test_chart_round_trip(profile_and_ball):
    _, ball = profile_and_ball
    chart = ModelChart(ball)
    rng = np.random.default_rng(3)
    r = rng.uniform(0.1, 0.9, 200) * ball.radius
    u = rng.uniform(-0.9, 0.9, 200)
    x1, rho, _ = chart.to_half_space(r, u)
    assert np.all(x1 > 0.0)
    r_back, u_back = chart.from_half_space(x1, rho)
    np.testing.assert_allclose(r_back, r, rtol=1e-9)
    np.testing.assert_allclose(u_back, u, atol=1e-9)


def test_chart_maps_the_sphere_to_the_boundary(profile_and_ball):
    _, ball = profile_and_ball
    x1, _, _ = ModelChart(ball).to_half_space(np.full(7, ball.radius), np.linspace(-0.9, 0.9, 7))
    np.testing.assert_allclose(x1, 0.0, atol=1e-9 * max(1.0, ball.center_height))


def test_chart_jacobian_matches_differences(profile_and_ball):
    _, ball = profile_and_ball
    chart = ModelChart(ball)
    r, u, h = 0.4 * ball.radius, 0.3, 1e-6
    _, _, jacobian = chart.to_half_space(r, u)
    plus_r = np.array(chart.to_half_space(r + h * ball.radius, u)[:2])
    minus_r = np.array(chart.to_half_space(r - h * ball.radius, u)[:2])
    plus_u = np.array(chart.to_half_space(r, u + h)[:2])
    minus_u = np.array(chart.to_half_space(r, u - h)[:2])
    np.testing.assert_allclose(jacobian[:, 0], (plus_r - minus_r) / (2 * h * ball.radius), rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(jacobian[:, 1], (plus_u - minus_u) / (2 * h), rtol=1e-6, atol=1e-8)
