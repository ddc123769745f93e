"""
Controller for the profile commands: a single bridge profile and the Phi(T) curve.
"""

from typing import Any, Dict, List, Tuple

import numpy as np
import structlog

from src.models.config import RunConfig
from src.models.geometry import Branch, ModelBall
from src.models.profile import BridgeProfile
from src.services.geometry_service import model_ball_from_profile
from src.services.profile_service import (
    escobar_energy,
    escobar_threshold,
    profile_from_shift,
    sobolev_constant,
    solve_profile,
)
from src.utils.exceptions import DegenerateBridgeError, ValidationError
from src.utils.reporting import Artifact, check, envelope, invariant_summary

logger = structlog.get_logger()

DEFAULT_RATIOS = [0.2, 0.35, 0.5, 0.65, 0.8, 0.9, 0.95, 1.05, 1.1, 1.25, 1.5, 2.0, 3.0]
CURVE_COLUMNS = ["T", "T_ratio", "t", "branch", "phi_squared", "lambda", "sigma", "kappa", "radius", "beta"]
ENDPOINT_SHIFT = 50.0
ENDPOINT_TOL = 1e-2


def resolve_profile(config: RunConfig) -> Tuple[BridgeProfile, ModelBall, float]:
    """
    Profile selected by --t (with --branch), --T or --T-ratio, its model ball and T_E.
    """
    quad, settings = config.quad, config.settings.profile
    T_E = escobar_threshold(config.n, quad)
    if config.t is not None:
        profile = profile_from_shift(config.n, Branch.parse(config.branch), config.t, quad, settings)
    elif config.T is not None:
        profile = solve_profile(config.n, config.T, quad, settings)
    elif config.T_ratio is not None:
        profile = solve_profile(config.n, config.T_ratio * T_E, quad, settings)
    else:
        raise ValidationError("One of --T, --T-ratio or --t is required", "T")
    return profile, model_ball_from_profile(profile), T_E


def ball_record(ball: ModelBall) -> Dict[str, Any]:
    return {
        "branch": ball.branch.value,
        "alpha": ball.alpha,
        "kappa": ball.kappa,
        "radius": ball.radius,
        "beta": ball.beta,
        "center_height": ball.center_height,
    }


def cmd_profile(config: RunConfig) -> Artifact:
    """
    Bridge profile with its model ball and invariant battery.

    Args:
        config: Resolved run configuration.

    Returns:
        Artifact with the profile, the ball and the threshold classification.
    """
    logger.info("Solving bridge profile", n=config.n, T=config.T, T_ratio=config.T_ratio, t=config.t)
    profile, ball, T_E = resolve_profile(config)
    result = {
        "profile": profile.as_dict(),
        "ball": ball_record(ball),
        "escobar_threshold": T_E,
        "T_ratio": profile.T / T_E,
        "above_threshold": bool(profile.T > T_E),
    }
    invariants = invariant_summary(profile.diagnostics)
    rows = [[key, value] for key, value in sorted({**profile.as_dict(), **ball_record(ball)}.items())]
    return Artifact(envelope("profile", config.model_dump(), result, invariants), ["quantity", "value"], rows)


def _curve_row(profile: BridgeProfile, T_E: float) -> Dict[str, Any]:
    ball = model_ball_from_profile(profile)
    return {
        "T": profile.T,
        "T_ratio": profile.T / T_E,
        "t": profile.t,
        "branch": profile.branch.value,
        "phi_squared": profile.phi ** 2,
        "lambda": profile.lam,
        "sigma": profile.sigma,
        "kappa": ball.kappa,
        "radius": ball.radius,
        "beta": ball.beta,
    }


def _monotonicity(records: List[Dict[str, Any]], column: str) -> str:
    values = np.array([record[column] for record in records], dtype=float)
    steps = np.diff(values)
    if np.all(steps > 0.0):
        return "increasing"
    if np.all(steps < 0.0):
        return "decreasing"
    return "none"


def cmd_curve(config: RunConfig) -> Artifact:
    """
    Phi(T)^2 and the model data along a list of T/T_E ratios, with endpoint calibration.

    The T_E ratio itself is skipped (no bridge exists there).
    """
    quad, settings = config.quad, config.settings.profile
    n = config.n
    T_E = escobar_threshold(n, quad)
    ratios = sorted(config.ratios or DEFAULT_RATIOS)
    logger.info("Tracing Phi(T) curve", n=n, points=len(ratios))

    records, skipped = [], []
    for ratio in ratios:
        try:
            profile = solve_profile(n, ratio * T_E, quad, settings)
        except DegenerateBridgeError:
            skipped.append(ratio)
            continue
        records.append(_curve_row(profile, T_E))
    records.sort(key=lambda record: record["T"])

    sobolev = sobolev_constant(n, quad)
    escobar = escobar_energy(n, quad)
    near_sobolev = profile_from_shift(n, Branch.SPHERICAL, ENDPOINT_SHIFT, quad, settings)
    below = profile_from_shift(n, Branch.SPHERICAL, -ENDPOINT_SHIFT, quad, settings)
    above = profile_from_shift(n, Branch.HYPERBOLIC, -ENDPOINT_SHIFT, quad, settings)
    endpoints = {
        "sobolev_constant": sobolev,
        "escobar_energy": escobar,
        "phi_squared_near_sobolev": near_sobolev.phi ** 2,
        "phi_squared_below_threshold": below.phi ** 2,
        "phi_squared_above_threshold": above.phi ** 2,
    }
    lower = [record for record in records if record["T"] < T_E]
    upper = [record for record in records if record["T"] > T_E]
    checks = {
        "sobolev_endpoint": check(abs(near_sobolev.phi ** 2 - sobolev) / sobolev, ENDPOINT_TOL),
        "escobar_from_below": check(abs(below.phi ** 2 - escobar) / escobar, ENDPOINT_TOL),
        "escobar_from_above": check(abs(above.phi ** 2 - escobar) / escobar, ENDPOINT_TOL),
    }
    if lower and upper:
        endpoints["bracket_spread"] = abs(upper[0]["phi_squared"] - lower[-1]["phi_squared"]) / escobar

    result = {
        "escobar_threshold": T_E,
        "rows": records,
        "skipped_ratios": skipped,
        "endpoints": endpoints,
        "monotone": {column: _monotonicity(records, column) for column in CURVE_COLUMNS
                     if column != "branch"} if len(records) > 1 else {},
    }
    rows = [[record[column] for column in CURVE_COLUMNS] for record in records]
    document = envelope("curve", config.model_dump(), result, invariant_summary(checks))
    return Artifact(document, CURVE_COLUMNS, rows)
