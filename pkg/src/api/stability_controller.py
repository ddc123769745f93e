"""
Controller for the stability sweep.
"""

from typing import Any, Dict

import structlog

from src.api.profile_controller import resolve_profile
from src.models.config import QuadratureSpec, RunConfig
from src.models.stability import Perturbation, StabilityReport
from src.services.spectral_service import sector_bottom, spectral_gap
from src.services.stability_service import (
    StabilityLab,
    half_space_dirichlet,
    kernel_perturbation,
    lift,
    random_perturbation,
    sector_perturbation,
)
from src.utils.reporting import Artifact, check, envelope, invariant_summary

logger = structlog.get_logger()

LIMIT_TOL = 1e-2
GAP_MARGIN = 0.99
DEFICIT_FLOOR = -1e-10
TANGENCY_TOL = 1e-7
LIFT_TOL = 1e-5
LINEAR_TOL = 1e-10
CORRECTION_SLOPE_TOL = 0.1
KERNEL_SLOPE = 2.5
# Gauss-Legendre nodes of the lift oracle stay off the symmetry axis.
LIFT_RULE = QuadratureSpec(scheme="gauss-legendre", node_count=128)


def _sweep_checks(report: StabilityReport, perturbation: Perturbation, lift_gap: float) -> Dict[str, Any]:
    diagnostics = report.diagnostics
    norm = diagnostics["n_norm"]
    linear = max(abs(value) for value in diagnostics["linear_defect"]) / norm ** 0.5
    correction_slope = diagnostics["correction_slope"]
    return {
        "deficit_floor": check(min(point.deficit for point in report.sweep), DEFICIT_FLOOR, lower=True),
        "tangency": check(diagnostics["max_tangency_residual"], TANGENCY_TOL),
        "lift_transport": check(lift_gap, LIFT_TOL),
        "linear_constraints": check(linear, LINEAR_TOL if perturbation.ell >= 1 else 1e-6),
        "correction_slope": check(None if correction_slope is None else abs(correction_slope - 2.0),
                                  CORRECTION_SLOPE_TOL),
    }


def cmd_stability(config: RunConfig) -> Artifact:
    """
    Deficit over squared distance along one perturbation direction.

    The direction is the minimizer of a sector (--sector), the transported dilation field, or a
    random smooth profile in the sector; the spectral gap is computed with the spectral settings so
    the report carries Lambda_T and Lambda_T/2.
    """
    spectral, stability = config.settings.spectral, config.settings.stability
    profile, ball, _ = resolve_profile(config)
    logger.info("Running stability sweep", direction=stability.direction, sector=stability.sector,
                eps=stability.eps_list)

    gap_report = spectral_gap(ball, profile, max(spectral.l_max, stability.sector, 3), spectral)
    bottom = None
    if stability.direction == "kernel":
        perturbation = kernel_perturbation(ball, spectral.grid_nodes)
    elif stability.direction == "random":
        perturbation = random_perturbation(ball, stability.sector, stability.random_seed, nodes=spectral.grid_nodes)
    else:
        bottom = sector_bottom(ball, profile, stability.sector, settings=spectral)
        perturbation = sector_perturbation(bottom)

    lab = StabilityLab(profile, ball, stability)
    report = lab.stability_sweep(perturbation, stability.eps_list, gap=gap_report.gap_sector.value)
    norm = report.diagnostics["n_norm"]
    lifted = half_space_dirichlet(profile, lift(profile, ball, perturbation).meridian, LIFT_RULE)
    checks = _sweep_checks(report, perturbation, abs(lifted - norm) / norm)

    fitted = report.fitted_coefficient
    if stability.direction == "kernel":
        checks["kernel_q_ratio"] = check(abs(report.q_ratio), 1e-8)
        checks["kernel_deficit_slope"] = check(report.diagnostics["deficit_slope"], KERNEL_SLOPE, lower=True)
    else:
        checks["limit_matches_q_ratio"] = check(abs(fitted - report.q_ratio) / abs(report.q_ratio), LIMIT_TOL)
        if bottom is not None:
            checks["limit_matches_sector_bottom"] = check(abs(fitted - bottom.value) / abs(bottom.value), LIMIT_TOL)
        if bottom is not None or stability.sector >= 2:
            checks["above_gap_half"] = check(fitted / report.gap_half, GAP_MARGIN, lower=True)
            checks["above_gap"] = check(fitted / report.gap, GAP_MARGIN, lower=True)

    result = {
        "profile": profile.as_dict(),
        "direction": stability.direction,
        "sector_bottom": None if bottom is None else bottom.as_dict(),
        "gap_recorded": gap_report.gap,
        "lifted_dirichlet": lifted,
        "stability": report.as_dict(),
    }
    columns = ["eps", "deficit", "distance", "ratio", "correction", "defect_before", "scale"]
    rows = [[point.as_dict()[column] for column in columns] for point in report.sweep]
    return Artifact(envelope("stability", config.model_dump(), result, invariant_summary(checks)), columns, rows)
