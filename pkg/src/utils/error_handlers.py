"""
Error handlers for the bridge-lab CLI.
"""

import json
import sys
from typing import Any, Dict, TextIO, Tuple

import structlog

from src.utils.exceptions import (
    LabError,
    DomainError,
    ValidationError,
    ConfigurationError,
    OutputError,
)

logger = structlog.get_logger()

ERROR_SCHEMA = "bridge-lab/1"


def handle_error(error: Exception) -> Tuple[int, Dict[str, Any]]:
    """
    Map an exception to a process exit code and an error payload.

    Args:
        error: Exception raised by a command.

    Returns:
        Tuple of exit code and error payload.
    """
    if isinstance(error, (DomainError, ValidationError, ConfigurationError)):
        logger.warning("Domain error", error=str(error), details=error.details)
    elif isinstance(error, OutputError):
        logger.error("Output error", error=str(error), details=error.details)
    elif isinstance(error, LabError):
        logger.error("Numerical failure", error=str(error), details=error.details)
    else:
        logger.error("Unhandled exception", error=str(error), exc_info=True)
        return 3, {
            "schema": ERROR_SCHEMA,
            "error": "InternalError",
            "code": "INTERNAL_ERROR",
            "message": "An unexpected error occurred",
            "details": {
                "error_type": error.__class__.__name__,
                "error_message": str(error)
            },
            "exit_code": 3,
        }

    payload = {"schema": ERROR_SCHEMA, "error": error.__class__.__name__, "exit_code": error.exit_code}
    payload.update(error.to_dict())
    return error.exit_code, payload


def report_error(error: Exception, stream: TextIO = None) -> int:
    """
    Write the error payload as one JSON object and return the exit code.

    Args:
        error: Exception raised by a command.
        stream: Destination stream, standard error by default.

    Returns:
        Process exit code.
    """
    exit_code, payload = handle_error(error)
    stream = stream or sys.stderr
    stream.write(json.dumps(payload, sort_keys=True, default=str) + "\n")
    stream.flush()
    return exit_code
