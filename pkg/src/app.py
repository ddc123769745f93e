"""
Command-line entry point of the bridge laboratory.
"""

import argparse
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional

import structlog
from dotenv import load_dotenv
from pydantic import ValidationError as PydanticValidationError

from src import __version__
from src.api.oracle_controller import cmd_oracle
from src.api.profile_controller import cmd_curve, cmd_profile
from src.api.spectral_controller import cmd_gap, cmd_kernel, cmd_spectrum
from src.api.stability_controller import cmd_stability
from src.models.config import RunConfig
from src.services.settings_service import SettingsService
from src.utils.error_handlers import report_error
from src.utils.exceptions import ValidationError
from src.utils.reporting import Artifact, emit

LOG_LEVEL_ENV = "BRIDGE_LAB_LOG_LEVEL"

COMMANDS: Dict[str, Callable[[RunConfig], Artifact]] = {
    "profile": cmd_profile,
    "curve": cmd_curve,
    "spectrum": cmd_spectrum,
    "gap": cmd_gap,
    "kernel": cmd_kernel,
    "stability": cmd_stability,
    "oracle": cmd_oracle,
}

logger = structlog.get_logger()


def configure_logging(level: Optional[str] = None) -> None:
    """Structured JSON logs on standard error; artifacts alone go to standard output."""
    load_dotenv()
    name = (level or os.environ.get(LOG_LEVEL_ENV) or "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, name, logging.WARNING),
                        format="%(message)s", force=True)
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            structlog.processors.JSONRenderer()
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


def _add_common(parser: argparse.ArgumentParser, selectors: bool = True) -> None:
    parser.add_argument("--n", type=int, required=True, help="Dimension (n >= 3)")
    if selectors:
        group = parser.add_mutually_exclusive_group()
        group.add_argument("--T", type=float, help="Trace level")
        group.add_argument("--T-ratio", dest="T_ratio", type=float, help="Trace level as a multiple of T_E(n)")
        group.add_argument("--t", type=float, help="Profile shift (requires --branch)")
        parser.add_argument("--branch", choices=["spherical", "hyperbolic"])
    parser.add_argument("--scheme", choices=["tanh-sinh", "gauss-legendre"])
    parser.add_argument("--nodes", type=int, help="Quadrature nodes per half-line piece")
    parser.add_argument("--tail-cutoff", dest="tail_cutoff", type=float)
    parser.add_argument("--tol", type=float, help="Quadrature error estimate allowed against the integral of |f|")
    parser.add_argument("--config", help="JSON settings override file")
    parser.add_argument("--output", help="Artifact path (standard output when omitted)")
    parser.add_argument("--format", choices=["json", "csv"])
    parser.add_argument("--log-level", dest="log_level", help=f"Log level (default ${LOG_LEVEL_ENV} or WARNING)")


def _add_spectral(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--l-max", dest="l_max", type=int)
    parser.add_argument("--grid-nodes", dest="grid_nodes", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bridge-lab",
                                     description="Trace-constrained Sobolev bridge laboratory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    profile = sub.add_parser("profile", help="Solve one bridge profile")
    _add_common(profile)

    curve = sub.add_parser("curve", help="Trace Phi(T)^2 over T/T_E ratios")
    _add_common(curve, selectors=False)
    curve.add_argument("--ratios", type=float, nargs="+")

    for name, text in (("spectrum", "Lowest sector levels"), ("gap", "Spectral gap"),
                       ("kernel", "Kernel residual table")):
        command = sub.add_parser(name, help=text)
        _add_common(command)
        _add_spectral(command)

    stability = sub.add_parser("stability", help="Deficit against squared distance sweep")
    _add_common(stability)
    _add_spectral(stability)
    stability.add_argument("--eps", type=float, nargs="+", help="Decreasing amplitudes")
    stability.add_argument("--sector", type=int)
    stability.add_argument("--direction", choices=["sector", "kernel", "random"])
    stability.add_argument("--random-seed", dest="random_seed", type=int)

    oracle = sub.add_parser("oracle", help="Monte Carlo oracle for the profile integrals")
    _add_common(oracle, selectors=False)
    oracle.add_argument("--seed", type=int)
    oracle.add_argument("--samples", type=int)
    oracle.add_argument("--pairs", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Merges defaults, the optional --config file and the command-line flags.

    Raises:
        ConfigurationError: If a setting is out of range.
        ValidationError: If the selectors are inconsistent.
    """
    service = SettingsService(args.config)

    def get(name: str) -> Any:
        return getattr(args, name, None)

    settings = service.with_overrides({
        "quadrature": {"scheme": get("scheme"), "node_count": get("nodes"),
                       "tail_cutoff": get("tail_cutoff"), "tol": get("tol")},
        "spectral": {"l_max": get("l_max"), "grid_nodes": get("grid_nodes")},
        "stability": {"eps_list": get("eps"), "sector": get("sector"),
                      "direction": get("direction"), "random_seed": get("random_seed")},
        "oracle": {"seed": get("seed"), "samples": get("samples"), "pairs": get("pairs")},
    })
    try:
        return RunConfig(
            command=args.command,
            n=args.n,
            T=get("T"),
            T_ratio=get("T_ratio"),
            t=get("t"),
            branch=get("branch"),
            settings=settings,
            ratios=get("ratios"),
            output=args.output,
            format=args.format or settings.output.format,
        )
    except PydanticValidationError as e:
        errors = [{"field": ".".join(str(part) for part in err["loc"]), "message": err["msg"]}
                  for err in e.errors()]
        raise ValidationError("Invalid command-line configuration", details={"errors": errors})


def main(argv: Optional[List[str]] = None) -> int:
    """Runs one command; returns the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = resolve_config(args)
        logger.info("Running command", command=config.command, n=config.n)
        artifact = COMMANDS[config.command](config)
        emit(artifact.render(config.format), config.output)
    except Exception as e:
        return report_error(e)
    logger.info("Command finished", command=config.command)
    return 0


if __name__ == "__main__":
    sys.exit(main())
