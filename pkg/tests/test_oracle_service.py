import pytest

from src.api.oracle_controller import oracle_pairs
from src.models.geometry import Branch
from src.services.oracle_service import mc_oracle
from src.services.profile_service import boundary_integral, bulk_integral
from src.utils.exceptions import DomainError

SAMPLES = 200_000


@pytest.mark.parametrize("branch, t", [(Branch.SPHERICAL, 0.7), (Branch.SPHERICAL, -1.2), (Branch.HYPERBOLIC, -2.0)])
def test_bulk_estimate_agrees_with_quadrature(quad, branch, t):
    exact = bulk_integral(3, branch, t, 6.0, quad)
    estimate, error = mc_oracle(3, branch, t, 6.0, SAMPLES, seed=11, chunk_size=50_000)
    assert error < 0.05 * exact
    assert abs(estimate - exact) < 5.0 * error


@pytest.mark.parametrize("branch, t", [(Branch.SPHERICAL, 0.7), (Branch.HYPERBOLIC, -1.5)])
def test_boundary_estimate_agrees_with_closed_form(quad, branch, t):
    exact = boundary_integral(3, branch, t, quad)
    estimate, error = mc_oracle(3, branch, t, 4.0, SAMPLES, seed=12, domain="boundary", chunk_size=50_000)
    assert abs(estimate - exact) < 5.0 * error


def test_estimate_is_reproducible():
    first = mc_oracle(4, Branch.SPHERICAL, 0.3, 4.0, 5000, seed=3, chunk_size=1000)
    second = mc_oracle(4, Branch.SPHERICAL, 0.3, 4.0, 5000, seed=3, chunk_size=1000)
    assert first == second
    assert mc_oracle(4, Branch.SPHERICAL, 0.3, 4.0, 5000, seed=4, chunk_size=1000) != first


@pytest.mark.parametrize("kwargs", [
    {"branch": Branch.HYPERBOLIC, "t": -0.5},
    {"branch": Branch.SPHERICAL, "t": 0.0, "domain": "edge"},
    {"branch": Branch.SPHERICAL, "t": 0.0, "samples": 1},
])
def test_oracle_domain_errors(kwargs):
    arguments = {"n": 3, "q": 6.0, "samples": 1000, "seed": 0, **kwargs}
    with pytest.raises(DomainError):
        mc_oracle(**arguments)


def test_oracle_pairs_alternate_branches():
    pairs = oracle_pairs(6, 12345)
    assert [branch for branch, _ in pairs] == [Branch.SPHERICAL, Branch.HYPERBOLIC] * 3
    assert all(-3.0 < t < 3.0 for branch, t in pairs if branch is Branch.SPHERICAL)
    assert all(-4.0 < t < -1.0 for branch, t in pairs if branch is Branch.HYPERBOLIC)
    assert oracle_pairs(6, 12345) == pairs
