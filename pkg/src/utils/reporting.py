"""
Versioned JSON/CSV artifacts of the laboratory.
"""

import csv
import dataclasses
import io
import json
import os
import sys
import tempfile
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import structlog

from src import __version__
from src.utils.exceptions import OutputError

logger = structlog.get_logger()

SCHEMA = "bridge-lab/1"
TOOL_NAME = "bridge-lab"


def to_builtin(value: Any) -> Any:
    """Converts numpy values, enums, fractions and dataclasses to JSON-ready builtins."""
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_builtin(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if hasattr(value, "as_dict"):
        return to_builtin(value.as_dict())
    if dataclasses.is_dataclass(value):
        return to_builtin(dataclasses.asdict(value))
    return value


def envelope(command: str, config: Dict[str, Any], result: Any, invariants: Dict[str, Any]) -> Dict[str, Any]:
    """Top-level artifact: schema, tool, command, resolved config, result and invariant summary."""
    return {
        "schema": SCHEMA,
        "tool": {"name": TOOL_NAME, "version": __version__},
        "command": command,
        "config": to_builtin(config),
        "result": to_builtin(result),
        "invariants": to_builtin(invariants),
    }


def render_json(document: Dict[str, Any]) -> str:
    """
    Raises:
        OutputError: If the document holds a non-finite number.
    """
    try:
        return json.dumps(to_builtin(document), sort_keys=True, indent=2, allow_nan=False) + "\n"
    except ValueError as e:
        raise OutputError("Artifact contains a non-finite number", details={"error": str(e)})


def format_cell(value: Any) -> str:
    """17 significant digits for reals, '.' decimal separator."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(to_builtin(value))


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]], document: Dict[str, Any]) -> str:
    """
    RFC-4180 table preceded by '# key: json' metadata lines (schema, tool, command, config, invariants).
    """
    buffer = io.StringIO()
    for key in ("schema", "tool", "command", "config", "invariants"):
        meta = json.dumps(to_builtin(document.get(key)), sort_keys=True, separators=(",", ":"), allow_nan=False)
        buffer.write(f"# {key}: {meta}\r\n")
    writer = csv.writer(buffer, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(list(columns))
    for row in rows:
        writer.writerow([format_cell(cell) for cell in row])
    return buffer.getvalue()


def write_atomic(path: str, text: str) -> None:
    """
    Writes text through a temporary file in the target directory, fsync and os.replace.

    Raises:
        OutputError: On any file system error.
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, temporary = tempfile.mkstemp(dir=str(target.parent), prefix=f".{target.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
                f.flush()
                os.fsync(f.fileno())
            os.replace(temporary, target)
        except BaseException:
            if os.path.exists(temporary):
                os.unlink(temporary)
            raise
    except OSError as e:
        logger.error("Artifact write failed", path=str(target), error=str(e))
        raise OutputError(f"Cannot write {target}: {e}", details={"path": str(target)})
    logger.info("Artifact written", path=str(target), size=len(text))


def emit(text: str, output: Optional[str] = None, stream=None) -> None:
    """Writes an artifact to a file, or to standard output when no path is given."""
    if output:
        write_atomic(output, text)
        return
    (stream or sys.stdout).write(text)


def invariant_summary(checks: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
    """Adds an overall pass flag to a name -> {value, tol, pass} table."""
    checks = to_builtin(checks)
    return {"checks": checks, "all_pass": all(bool(entry.get("pass")) for entry in checks.values())}


def check(value: Optional[float], tol: float, lower: bool = False) -> Dict[str, Any]:
    """Single invariant entry; passes when value <= tol (or >= tol with lower=True)."""
    if value is None:
        return {"value": None, "tol": tol, "pass": False}
    passed = value >= tol if lower else value <= tol
    return {"value": float(value), "tol": tol, "pass": bool(passed)}


@dataclasses.dataclass(frozen=True)
class Artifact:
    """Command output: the JSON document and its tabular CSV view."""

    document: Dict[str, Any]
    columns: Sequence[str]
    rows: List[List[Any]]

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return render_csv(self.columns, self.rows, self.document)
        return render_json(self.document)
