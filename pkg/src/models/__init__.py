"""
Domain models for the bridge laboratory.
"""

from src.models.geometry import Branch, ModelBall, ModelPoint
from src.models.profile import BridgeProfile, Exponents
from src.models.config import QuadratureSpec, LabSettings, RunConfig
from src.models.spectral import Sector, RadialFunction, SectorBottom, SpectralReport, sector_multiplicity
from src.models.stability import GroupElement, Perturbation, StabilityReport, SweepPoint

__all__ = [
    "Branch", "ModelBall", "ModelPoint",
    "BridgeProfile", "Exponents",
    "QuadratureSpec", "LabSettings", "RunConfig",
    "Sector", "RadialFunction", "SectorBottom", "SpectralReport", "sector_multiplicity",
    "GroupElement", "Perturbation", "StabilityReport", "SweepPoint",
]
