"""
Types of the perturbation laboratory.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from src.models.spectral import RadialFunction
from src.utils.exceptions import DomainError


@dataclass(frozen=True)
class GroupElement:
    """Dilation a > 0 and tangential shift z of the half-space action."""

    scale: float
    shift: np.ndarray

    def __post_init__(self):
        shift = np.atleast_1d(np.asarray(self.shift, dtype=float))
        object.__setattr__(self, "shift", shift)
        if not self.scale > 0.0:
            raise DomainError("Group element scale must be positive", details={"scale": self.scale})

    @classmethod
    def identity(cls, n: int) -> "GroupElement":
        return cls(1.0, np.zeros(n - 1))

    def compose(self, other: "GroupElement") -> "GroupElement":
        """Element acting as self after other."""
        return GroupElement(self.scale * other.scale, self.shift + other.shift / self.scale)

    def inverse(self) -> "GroupElement":
        return GroupElement(1.0 / self.scale, -self.scale * self.shift)

    def as_dict(self) -> dict:
        return {"scale": self.scale, "shift": self.shift.tolist()}


@dataclass(frozen=True)
class Perturbation:
    """Zonal test direction f(r) Z_ell(u) about the symmetry axis, with amplitude epsilon."""

    ell: int
    radial: RadialFunction
    amplitude: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.ell < 0:
            raise DomainError("Sector index must be nonnegative", details={"ell": self.ell})

    @property
    def zonal_degree(self) -> int:
        return self.ell

    @property
    def identifier(self) -> str:
        return self.label or f"zonal-l{self.ell}"


@dataclass(frozen=True)
class SweepPoint:
    eps: float
    deficit: float
    distance: float
    ratio: Optional[float]
    correction: float
    defect_before: float
    scale: float

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "deficit": self.deficit,
            "distance": self.distance,
            "ratio": self.ratio,
            "correction": self.correction,
            "defect_before": self.defect_before,
            "scale": self.scale,
        }


@dataclass(frozen=True)
class StabilityReport:
    profile_id: str
    perturbation_id: str
    sweep: List[SweepPoint]
    fitted_coefficient: float
    q_ratio: float
    q_half: float
    gap: Optional[float]
    gap_half: Optional[float]
    diagnostics: Dict[str, object] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "profile": self.profile_id,
            "perturbation": self.perturbation_id,
            "sweep": [point.as_dict() for point in self.sweep],
            "fitted_coefficient": self.fitted_coefficient,
            "q_ratio": self.q_ratio,
            "q_half": self.q_half,
            "gap": self.gap,
            "gap_half": self.gap_half,
            "diagnostics": self.diagnostics,
        }
