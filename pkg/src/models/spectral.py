"""
Types of the reduced Robin eigenvalue problem.
"""

from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from src.models.geometry import ModelBall
from src.utils.exceptions import DomainError, GridError


def sector_multiplicity(n: int, ell: int) -> int:
    """Dimension of the degree-ell spherical harmonics on S^{n-1}."""
    if ell < 0:
        raise DomainError("Sector index must be nonnegative", details={"ell": ell})
    if ell == 0:
        return 1
    # (2l+n-2)(l+n-3)!/(l!(n-2)!)
    return (2 * ell + n - 2) * comb(ell + n - 3, ell) // (n - 2)


@dataclass(frozen=True)
class Sector:
    n: int
    ell: int

    def __post_init__(self):
        if self.ell < 0:
            raise DomainError("Sector index must be nonnegative", details={"ell": self.ell})

    @property
    def angular_eigenvalue(self) -> int:
        return self.ell * (self.ell + self.n - 2)

    @property
    def multiplicity(self) -> int:
        return sector_multiplicity(self.n, self.ell)


@dataclass(frozen=True)
class RadialFunction:
    """Radial profile sampled with its derivative on a grid in (0, R]."""

    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    ell: int

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        derivs = np.asarray(self.derivs, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivs", derivs)
        if grid.ndim != 1 or grid.size < 3 or values.shape != grid.shape or derivs.shape != grid.shape:
            raise GridError("Radial function arrays must be one-dimensional and aligned")
        if grid[0] <= 0.0 or np.any(np.diff(grid) <= 0.0):
            raise GridError("Radial grid must be strictly increasing in (0, R]")
        if grid[0] < 1e-8 * grid[-1]:
            raise GridError("Radial grid starts below the Frobenius offset", details={"start": float(grid[0])})
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(derivs))):
            raise GridError("Radial function has non-finite samples")

    @property
    def radius(self) -> float:
        return float(self.grid[-1])

    def interpolant(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.grid, self.values, self.derivs, extrapolate=True)

    def scaled(self, factor: float) -> "RadialFunction":
        return RadialFunction(self.grid, factor * self.values, factor * self.derivs, self.ell)


@dataclass(frozen=True)
class SectorBottom:
    """Bottom Rayleigh value of one sector with its minimizer and cross-checks."""

    ell: int
    value: float
    constraints: str
    argmin: RadialFunction
    coarse: float
    fine: float
    shooting: Optional[float] = None

    @property
    def shooting_gap(self) -> Optional[float]:
        if self.shooting is None:
            return None
        return abs(self.shooting - self.value)

    def as_dict(self) -> dict:
        return {
            "ell": self.ell,
            "bottom": self.value,
            "constraints": self.constraints,
            "coarse": self.coarse,
            "fine": self.fine,
            "shooting": self.shooting,
            "shooting_gap": self.shooting_gap,
        }


@dataclass(frozen=True)
class SpectralReport:
    ball: ModelBall
    per_sector: List[SectorBottom]
    kernel_residuals: Dict[str, float]
    gap: Optional[float]
    l_max: int
    diagnostics: Dict[str, object] = field(default_factory=dict)

    @property
    def gap_sector(self) -> SectorBottom:
        return min(self.per_sector, key=lambda bottom: bottom.value)

    def as_dict(self) -> dict:
        return {
            "ball": {
                "n": self.ball.n,
                "branch": self.ball.branch.value,
                "alpha": self.ball.alpha,
                "kappa": self.ball.kappa,
                "radius": self.ball.radius,
                "beta": self.ball.beta,
            },
            "per_sector": [bottom.as_dict() for bottom in self.per_sector],
            "kernel_residuals": self.kernel_residuals,
            "gap": self.gap,
            "gap_sector": self.gap_sector.ell,
            "l_max": self.l_max,
            "diagnostics": self.diagnostics,
        }
