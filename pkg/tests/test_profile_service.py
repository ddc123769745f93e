import numpy as np
import pytest

from src.models.config import ProfileSettings
from src.models.geometry import Branch
from src.models.profile import Exponents
from src.services.geometry_service import model_ball_from_profile
from src.services.profile_service import (
    boundary_integral,
    bulk_integral,
    dirichlet_integral,
    escobar_energy,
    escobar_threshold,
    multipliers,
    normalize,
    phi_value,
    profile_eval,
    profile_from_shift,
    sobolev_constant,
    solve_profile,
    sphere_area,
    trace_constraint,
    trace_scan,
)
from src.utils.exceptions import DegenerateBridgeError, DomainError, IntegralError

ESCOBAR_AMPLITUDE_3 = (6.0 / np.pi) ** (1.0 / 6.0)


def test_sphere_areas():
    assert sphere_area(1) == pytest.approx(2.0 * np.pi, rel=1e-14)
    assert sphere_area(2) == pytest.approx(4.0 * np.pi, rel=1e-14)
    assert sphere_area(3) == pytest.approx(2.0 * np.pi ** 2, rel=1e-14)


def test_exponents():
    exps = Exponents(3)
    assert exps.bulk == 6.0
    assert exps.trace == 4.0
    assert exps.decay == 0.5
    with pytest.raises(DomainError):
        Exponents(2)


def test_centered_bubble_integrals(quad):
    assert bulk_integral(3, Branch.SPHERICAL, 0.0, 6.0, quad) == pytest.approx(np.pi ** 2 / 8.0, rel=1e-12)
    assert boundary_integral(3, Branch.SPHERICAL, 0.0, quad) == pytest.approx(np.pi, rel=1e-12)
    assert dirichlet_integral(3, Branch.SPHERICAL, 0.0, 1.0, quad) == pytest.approx(3.0 * np.pi ** 2 / 8.0, rel=1e-12)


@pytest.mark.parametrize("t", [-0.5, 0.8, 4.0])
def test_normalization(quad, t):
    C = normalize(3, Branch.SPHERICAL, t, quad)
    assert C ** 6 * bulk_integral(3, Branch.SPHERICAL, t, 6.0, quad) == pytest.approx(1.0, rel=1e-12)


def test_divergent_bulk_power(quad):
    with pytest.raises(IntegralError):
        bulk_integral(3, Branch.SPHERICAL, 0.5, 2.0, quad)


@pytest.mark.parametrize("branch, t, n", [
    (Branch.HYPERBOLIC, -0.5, 3),
    (Branch.HYPERBOLIC, -1.0, 3),
    (Branch.SPHERICAL, 0.0, 2),
    (Branch.SPHERICAL, np.nan, 3),
])
def test_shift_domain(quad, branch, t, n):
    with pytest.raises(DomainError):
        bulk_integral(n, branch, t, 6.0, quad)


def test_escobar_closed_forms(quad):
    assert escobar_threshold(3, quad) == pytest.approx(ESCOBAR_AMPLITUDE_3 * np.pi ** 0.25, rel=1e-10)
    assert escobar_energy(3, quad) == pytest.approx(ESCOBAR_AMPLITUDE_3 ** 2 * np.pi, rel=1e-10)
    assert escobar_threshold(3, quad) == pytest.approx(1.483, abs=1e-3)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_sobolev_constant(quad, n):
    assert sobolev_constant(n, quad) == pytest.approx(0.25 * n * (n - 2) * sphere_area(n) ** (2.0 / n), rel=1e-10)


def test_escobar_energy_between_half_and_full_sobolev(quad):
    full = sobolev_constant(3, quad)
    assert 2.0 ** (-2.0 / 3.0) * full < escobar_energy(3, quad) < full


@pytest.mark.parametrize("branch, t", [(Branch.SPHERICAL, 1.3), (Branch.SPHERICAL, -0.4), (Branch.HYPERBOLIC, -2.5)])
def test_multipliers_match_curvature_and_sign(quad, branch, t):
    C = normalize(3, branch, t, quad)
    lam, sigma = multipliers(3, branch, t, C)
    alpha = C ** 4.0 / 4.0
    assert lam == pytest.approx(0.75 * branch.eta / alpha, rel=1e-9)
    assert np.sign(sigma) == np.sign(t)


def test_profile_invariants_pass(spherical_profile, hyperbolic_profile):
    for profile in (spherical_profile, hyperbolic_profile):
        failing = [name for name, entry in profile.diagnostics.items() if not entry["pass"]]
        assert failing == []


def test_energy_identity(profile_and_ball):
    profile, _ = profile_and_ball
    identity = profile.lam - profile.sigma * profile.T ** profile.exponents.trace
    assert profile.phi ** 2 == pytest.approx(identity, rel=1e-8)


def test_trace_and_phi_operations_agree_with_profile(profile_and_ball, quad):
    profile, _ = profile_and_ball
    assert trace_constraint(profile.n, profile.branch, profile.t, quad) == pytest.approx(profile.T, rel=1e-14)
    assert phi_value(profile, quad) == pytest.approx(profile.phi, rel=1e-14)


def test_trace_constraint_on_spherical_branch(quad, threshold3):
    levels = [trace_constraint(3, Branch.SPHERICAL, t, quad) for t in (-5.0, -1.0, 0.0, 1.0, 5.0)]
    assert all(a > b for a, b in zip(levels, levels[1:]))
    assert trace_constraint(3, Branch.SPHERICAL, -50.0, quad) == pytest.approx(threshold3, rel=1e-2)


def test_solved_trace_level(quad, threshold3, spherical_profile, hyperbolic_profile):
    assert spherical_profile.T == pytest.approx(0.5 * threshold3, rel=1e-10)
    assert hyperbolic_profile.T == pytest.approx(2.0 * threshold3, rel=1e-10)
    assert spherical_profile.branch is Branch.SPHERICAL
    assert hyperbolic_profile.branch is Branch.HYPERBOLIC
    assert hyperbolic_profile.t < -1.0


def test_degenerate_trace_level(quad, threshold3):
    with pytest.raises(DegenerateBridgeError):
        solve_profile(3, threshold3, quad)


def test_non_positive_trace_level(quad):
    with pytest.raises(DomainError):
        solve_profile(3, -1.0, quad)


@pytest.mark.parametrize("branch", [Branch.SPHERICAL, Branch.HYPERBOLIC])
def test_trace_scan_is_monotone(quad, branch):
    assert trace_scan(3, branch, quad, ProfileSettings())["monotone"]


def test_profile_eval_gradient(spherical_profile):
    x = np.array([0.7, -0.2, 0.4])
    value, gradient = profile_eval(spherical_profile, x)
    h = 1e-6
    for i in range(3):
        step = np.zeros(3)
        step[i] = h
        numeric = (profile_eval(spherical_profile, x + step)[0] - profile_eval(spherical_profile, x - step)[0]) / (2 * h)
        assert gradient[i] == pytest.approx(numeric, rel=1e-6, abs=1e-9)
    assert value > 0.0


def test_profile_eval_outside_half_space(spherical_profile):
    with pytest.raises(DomainError):
        profile_eval(spherical_profile, np.array([-0.1, 0.0, 0.0]))


def test_profile_from_shift_round_trip(quad, spherical_profile):
    rebuilt = profile_from_shift(3, Branch.SPHERICAL, spherical_profile.t, quad)
    assert rebuilt.T == pytest.approx(spherical_profile.T, rel=1e-12)
    ball = model_ball_from_profile(rebuilt)
    assert ball.radius > 0.0


@pytest.mark.slow
@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("ratio", [0.3, 0.5, 0.8, 1.5, 3.0])
def test_invariant_battery(quad, n, ratio):
    profile = solve_profile(n, ratio * escobar_threshold(n, quad), quad)
    assert all(entry["pass"] for entry in profile.diagnostics.values())
