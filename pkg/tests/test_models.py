import numpy as np
import pytest

from src.models.geometry import Branch
from src.models.spectral import RadialFunction, Sector, sector_multiplicity
from src.models.stability import GroupElement
from src.utils.exceptions import DomainError, GeometryError, GridError


def test_branch_parse():
    assert Branch.parse("Spherical") is Branch.SPHERICAL
    assert Branch.parse(Branch.HYPERBOLIC) is Branch.HYPERBOLIC
    assert Branch.SPHERICAL.eta == 1 and Branch.HYPERBOLIC.eta == -1
    with pytest.raises(GeometryError):
        Branch.parse("flat")


@pytest.mark.parametrize("n, ell, expected", [(3, 0, 1), (3, 1, 3), (3, 2, 5), (4, 2, 9), (5, 1, 5)])
def test_sector_multiplicity(n, ell, expected):
    assert sector_multiplicity(n, ell) == expected
    assert Sector(n, ell).multiplicity == expected


def test_sector_angular_eigenvalue():
    assert Sector(4, 3).angular_eigenvalue == 15
    with pytest.raises(DomainError):
        Sector(3, -1)


def test_radial_function_checks_the_grid():
    grid = np.linspace(0.1, 1.0, 10)
    with pytest.raises(GridError):
        RadialFunction(grid[::-1], grid, np.ones(10), 0)
    with pytest.raises(GridError):
        RadialFunction(grid, grid[:-1], np.ones(10), 0)
    with pytest.raises(GridError):
        RadialFunction(np.linspace(0.0, 1.0, 10), grid, np.ones(10), 0)
    with pytest.raises(GridError):
        RadialFunction(grid, np.full(10, np.nan), np.ones(10), 0)


def test_radial_function_interpolant_is_hermite():
    grid = np.linspace(0.1, 1.0, 40)
    radial = RadialFunction(grid, grid ** 3, 3.0 * grid ** 2, 0)
    spline = radial.interpolant()
    x = np.linspace(0.15, 0.95, 7)
    np.testing.assert_allclose(spline(x), x ** 3, rtol=1e-4)
    assert radial.scaled(2.0).values[-1] == pytest.approx(2.0)
    assert radial.radius == 1.0


def test_group_element_identity_and_dict():
    g = GroupElement.identity(4)
    assert g.scale == 1.0
    assert g.as_dict() == {"scale": 1.0, "shift": [0.0, 0.0, 0.0]}
    h = GroupElement(2.0, [1.0, -1.0, 0.5])
    composed = h.compose(GroupElement.identity(4))
    assert composed.scale == 2.0
    np.testing.assert_allclose(composed.shift, h.shift)
