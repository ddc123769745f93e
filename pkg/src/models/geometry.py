"""
Model-space types: branch tags, ambient points and the image geodesic ball.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.utils.exceptions import GeometryError, IsometryError


class Branch(Enum):
    """Curvature branch of a bridge profile."""

    SPHERICAL = "spherical"
    HYPERBOLIC = "hyperbolic"

    @property
    def eta(self) -> int:
        return 1 if self is Branch.SPHERICAL else -1

    @classmethod
    def parse(cls, value) -> "Branch":
        if isinstance(value, Branch):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise GeometryError(f"Unknown branch: {value}", details={"branch": str(value)})


@dataclass(frozen=True)
class ModelPoint:
    """Point of the unit sphere or of the upper hyperboloid sheet in ambient coordinates."""

    branch: Branch
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", coords)
        if coords.ndim != 1 or coords.size < 2 or not np.all(np.isfinite(coords)):
            raise GeometryError("Model point needs a finite ambient vector", details={"shape": list(coords.shape)})
        if self.branch is Branch.SPHERICAL:
            defect = abs(float(coords @ coords) - 1.0)
            scale = 1.0
        else:
            defect = abs(float(coords[:-1] @ coords[:-1]) - coords[-1] ** 2 + 1.0)
            scale = max(1.0, coords[-1] ** 2)
            if coords[-1] < 1.0 - 1e-12:
                raise GeometryError("Hyperbolic point below the upper sheet", details={"last": float(coords[-1])})
        if defect > 1e-12 * scale:
            raise GeometryError(
                "Model point off its quadric",
                details={"branch": self.branch.value, "defect": defect}
            )

    @property
    def dimension(self) -> int:
        return self.coords.size - 1


@dataclass(frozen=True)
class ModelBall:
    """
    Geodesic ball of the scaled model space onto which the half-space is mapped.

    The fields beyond the curvature data locate the ball: `shift` is the profile shift t and
    `center_height` the x1 coordinate of the axis point mapped to the center.
    """

    n: int
    branch: Branch
    alpha: float
    kappa: float
    radius: float
    beta: float
    shift: float
    center_height: float

    def __post_init__(self):
        if self.n < 3:
            raise GeometryError("Dimension must be at least 3", details={"n": self.n})
        if self.alpha <= 0.0 or self.radius <= 0.0:
            raise IsometryError("Degenerate model ball", details={"alpha": self.alpha, "radius": self.radius})
        if abs(self.kappa * self.alpha - self.branch.eta) > 1e-12:
            raise IsometryError("Curvature and scale disagree", details={"kappa": self.kappa, "alpha": self.alpha})
        if self.branch is Branch.SPHERICAL and not self.radius < np.pi / np.sqrt(self.kappa):
            raise IsometryError("Spherical ball reaches the cut locus", details={"radius": self.radius})

    @property
    def root_kappa(self) -> float:
        """sqrt(|kappa|)."""
        return float(np.sqrt(abs(self.kappa)))
