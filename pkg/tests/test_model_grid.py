import numpy as np
import pytest

from src.services.geometry_service import s_kappa, s_kappa_prime
from src.services.model_grid import ModelGrid
from src.services.profile_service import bulk_integral, profile_eval


@pytest.fixture(scope="module")
def grids(spherical_ball, hyperbolic_ball):
    return {"spherical": ModelGrid(spherical_ball), "hyperbolic": ModelGrid(hyperbolic_ball)}


def _pair(profile_and_ball, grids):
    profile, ball = profile_and_ball
    return profile, ball, grids[ball.branch.value]


def test_volume_and_boundary_area(profile_and_ball, grids):
    profile, _, grid = _pair(profile_and_ball, grids)
    assert grid.integrate(np.ones(grid.shape)) == pytest.approx(1.0, rel=1e-9)
    assert grid.integrate_boundary(np.ones(grid.u.size)) == pytest.approx(profile.T ** profile.exponents.trace, rel=1e-9)


def test_constant_field_energy(profile_and_ball, grids):
    profile, _, grid = _pair(profile_and_ball, grids)
    assert grid.n_form(grid.constant(), profile.lam, profile.sigma) == pytest.approx(profile.phi ** 2, rel=1e-9)


def test_first_eigenfunction_is_in_the_hessian_kernel(profile_and_ball, grids):
    profile, ball, grid = _pair(profile_and_ball, grids)
    field = grid.from_model(lambda r: s_kappa(ball.kappa, r), lambda r: s_kappa_prime(ball.kappa, r),
                            lambda u: u, np.ones_like)
    norm = grid.n_form(field, profile.lam, profile.sigma)
    assert norm > 0.0
    assert abs(grid.q_form(field)) < 1e-10 * norm


def test_half_space_sampling_matches_the_profile(quad, profile_and_ball, grids):
    profile, _, grid = _pair(profile_and_ball, grids)

    def evaluate(x1, rho):
        points = np.zeros(x1.shape + (profile.n,))
        points[..., 0] = np.clip(x1, 0.0, None)
        points[..., 1] = rho
        value, gradient = profile_eval(profile, points)
        return value, gradient[..., 0], gradient[..., 1]

    field = grid.from_half_space(evaluate)
    # U^{2*} dx is the model volume element
    expected = profile.C ** 8 * bulk_integral(3, profile.branch, profile.t, 8.0, quad)
    assert grid.integrate(field.values ** 2) == pytest.approx(expected, rel=1e-9)
    assert np.all(field.values > 0.0)
    assert field.boundary.shape == grid.u.shape


def test_field_arithmetic(grids):
    grid = grids["spherical"]
    one = grid.constant()
    two = one + one
    assert np.all((two - one).values == 1.0)
    assert np.all((3.0 * one).boundary == 3.0)
    assert np.all((one * 0.5).values == 0.5)
