"""
Controller for the spectral commands: sector levels, the spectral gap and the kernel table.
"""

import structlog

from src.api.profile_controller import ball_record, resolve_profile
from src.models.config import RunConfig
from src.models.spectral import Sector
from src.services.spectral_service import default_constraints, kernel_fields, sector_spectrum, spectral_gap
from src.utils.reporting import Artifact, check, envelope, invariant_summary

logger = structlog.get_logger()

KERNEL_TOL = 1e-8
SHOOTING_TOL = 1e-6
UNCONSTRAINED_L1_TOL = 1e-6


def cmd_spectrum(config: RunConfig) -> Artifact:
    """Lowest constrained Rayleigh levels of every sector up to l_max."""
    spectral = config.settings.spectral
    profile, ball, _ = resolve_profile(config)
    logger.info("Computing sector spectra", l_max=spectral.l_max, levels=spectral.levels)
    records = []
    for ell in range(spectral.l_max + 1):
        sector = Sector(profile.n, ell)
        levels = sector_spectrum(ball, profile, ell, spectral.levels, settings=spectral)
        for index, value in enumerate(levels):
            records.append({
                "ell": ell,
                "multiplicity": sector.multiplicity,
                "constraints": default_constraints(ell),
                "level": index,
                "value": value,
            })
    bottoms = [record["value"] for record in records if record["level"] == 0]
    checks = {
        "constrained_floor": check(min(bottoms), -spectral.negativity_tol, lower=True),
    }
    result = {"profile": profile.as_dict(), "ball": ball_record(ball), "levels": records}
    columns = ["ell", "multiplicity", "constraints", "level", "value"]
    rows = [[record[column] for column in columns] for record in records]
    return Artifact(envelope("spectrum", config.model_dump(), result, invariant_summary(checks)), columns, rows)


def cmd_gap(config: RunConfig) -> Artifact:
    """Spectral gap Lambda_T with per-sector bottoms and shooting cross-checks."""
    spectral = config.settings.spectral
    profile, ball, _ = resolve_profile(config)
    logger.info("Computing spectral gap", l_max=spectral.l_max)
    report = spectral_gap(ball, profile, spectral.l_max, spectral)

    checks = {
        "gap_recorded": check(report.gap, spectral.positive_floor, lower=True),
        "unconstrained_l1_bottom": check(abs(report.kernel_residuals["unconstrained_l1_bottom"]),
                                         UNCONSTRAINED_L1_TOL),
        "shoot_mismatch_l1": check(report.kernel_residuals["shoot_mismatch_l1"], KERNEL_TOL),
        "robin_coefficient": check(report.kernel_residuals["robin_coefficient"], KERNEL_TOL),
    }
    for bottom in report.per_sector:
        checks[f"sector_{bottom.ell}_floor"] = check(bottom.value, -spectral.negativity_tol, lower=True)
        if bottom.shooting_gap is not None:
            checks[f"sector_{bottom.ell}_shooting"] = check(bottom.shooting_gap, SHOOTING_TOL)

    result = {"profile": profile.as_dict(), "spectral": report.as_dict()}
    columns = ["ell", "bottom", "constraints", "coarse", "fine", "shooting", "shooting_gap"]
    rows = [[bottom.as_dict()[column] for column in columns] for bottom in report.per_sector]
    return Artifact(envelope("gap", config.model_dump(), result, invariant_summary(checks)), columns, rows)


def cmd_kernel(config: RunConfig) -> Artifact:
    """Residual table of the kernel identification."""
    profile, ball, _ = resolve_profile(config)
    logger.info("Identifying the kernel", n=profile.n, branch=profile.branch.value)
    fields = kernel_fields(profile, ball, config.settings.spectral)
    checks = {name: check(value, KERNEL_TOL) for name, value in fields.residuals.items()}
    slope = fields.diagnostics["frobenius_slope_l1"]
    checks["frobenius_slope_l1"] = check(abs(slope - 1.0), 1e-3)

    result = {"profile": profile.as_dict(), "ball": ball_record(ball), "kernel": fields.as_dict()}
    rows = [[name, value] for name, value in sorted(fields.residuals.items())]
    return Artifact(envelope("kernel", config.model_dump(), result, invariant_summary(checks)),
                    ["residual", "value"], rows)
