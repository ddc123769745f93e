"""
Validated configuration models for the bridge laboratory.
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class QuadratureSpec(BaseModel):
    """Half-line quadrature rule: scheme, nodes per piece, inner width and target tolerance."""

    model_config = ConfigDict(frozen=True)

    scheme: Literal["tanh-sinh", "gauss-legendre"] = "tanh-sinh"
    node_count: int = Field(1024, ge=16)  # nodes per half-line piece
    tail_cutoff: float = Field(1.0, gt=0.0)  # width of the inner pieces, in units of max(1, |t|)
    tol: float = Field(1e-14, ge=1e-14)  # error estimate allowed against the integral of |f|


class ProfileSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_scan_limit: float = Field(1e3, gt=1.0)
    hyperbolic_min_offset: float = Field(1e-6, gt=0.0, lt=1.0)  # smallest t + 1 scanned on the hyperbolic branch
    scan_points: int = Field(49, ge=8)
    degenerate_tol: float = Field(1e-6, gt=0.0)  # relative distance to the Escobar threshold
    root_tol: float = Field(1e-10, gt=0.0)
    el_samples: int = Field(50, ge=2)
    el_seed: int = Field(7, ge=0)


class SpectralSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    grid_nodes: int = Field(2000, ge=50)
    l_max: int = Field(10, ge=3)
    positive_floor: float = Field(1e-3, gt=0.0)
    negativity_tol: float = Field(1e-6, gt=0.0)
    grid_tol: float = Field(1e-3, gt=0.0)  # largest accepted coarse/fine change of a sector bottom
    shoot_rtol: float = Field(1e-12, gt=0.0)
    frobenius_offset: float = Field(1e-6, ge=1e-8, lt=1e-2)  # r0 / R
    levels: int = Field(3, ge=1)
    penalty: float = Field(1e3, gt=0.0)


class StabilitySettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    eps_list: List[float] = Field(default_factory=lambda: [1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3])
    radial_nodes: int = Field(96, ge=16)
    angular_nodes: int = Field(48, ge=8)
    newton_tol: float = Field(1e-13, gt=0.0)
    newton_max_iter: int = Field(30, ge=1)
    jacobian_floor: float = Field(1e-6, gt=0.0)
    sector: int = Field(2, ge=0)
    # sector argmin, kernel field s_k Z_1, or a random profile in the sector
    direction: Literal["sector", "kernel", "random"] = "sector"
    random_seed: int = Field(0, ge=0)

    @field_validator("eps_list")
    @classmethod
    def _check_eps_list(cls, value: List[float]) -> List[float]:
        if len(value) < 4:
            raise ValueError("eps_list needs at least 4 amplitudes")
        if any(eps <= 0.0 for eps in value):
            raise ValueError("eps_list amplitudes must be positive")
        if any(a <= b for a, b in zip(value, value[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        return value


class OracleSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    samples: int = Field(10_000_000, ge=1000)
    chunk_size: int = Field(1_000_000, ge=1000)
    seed: int = Field(12345, ge=0)
    pairs: int = Field(6, ge=1)
    tolerance_sigmas: float = Field(3.0, gt=0.0)


class OutputSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    format: Literal["json", "csv"] = "json"


class LabSettings(BaseModel):
    """All numerical knobs of the laboratory."""

    model_config = ConfigDict(frozen=True)

    quadrature: QuadratureSpec = Field(default_factory=QuadratureSpec)
    profile: ProfileSettings = Field(default_factory=ProfileSettings)
    spectral: SpectralSettings = Field(default_factory=SpectralSettings)
    stability: StabilitySettings = Field(default_factory=StabilitySettings)
    oracle: OracleSettings = Field(default_factory=OracleSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)


class RunConfig(BaseModel):
    """Fully resolved configuration of one CLI command."""

    model_config = ConfigDict(frozen=True)

    command: str
    n: int = Field(ge=3)
    T: Optional[float] = Field(None, gt=0.0)
    T_ratio: Optional[float] = Field(None, gt=0.0)
    t: Optional[float] = None
    branch: Optional[Literal["spherical", "hyperbolic"]] = None
    settings: LabSettings = Field(default_factory=LabSettings)
    ratios: Optional[List[float]] = None
    output: Optional[str] = None
    format: Literal["json", "csv"] = "json"

    @model_validator(mode="after")
    def _check_selectors(self) -> "RunConfig":
        selectors = [value is not None for value in (self.T, self.T_ratio, self.t)]
        if self.command in ("profile", "spectrum", "gap", "kernel", "stability"):
            if sum(selectors) != 1:
                raise ValueError("exactly one of T, T_ratio or t must be given")
        elif sum(selectors) > 1:
            raise ValueError("T, T_ratio and t are mutually exclusive")
        if self.t is not None and self.branch is None:
            raise ValueError("branch is required together with t")
        return self

    @property
    def quad(self) -> QuadratureSpec:
        return self.settings.quadrature
