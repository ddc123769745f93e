import json
from enum import Enum
from fractions import Fraction

import numpy as np
import pytest

from src.models.geometry import Branch
from src.utils.exceptions import OutputError
from src.utils.reporting import (
    Artifact,
    check,
    envelope,
    format_cell,
    invariant_summary,
    render_csv,
    render_json,
    to_builtin,
    write_atomic,
)


def _document():
    checks = {"a": check(1e-12, 1e-10), "b": check(0.5, 1e-3, lower=True)}
    return envelope("profile", {"n": 3, "branch": Branch.SPHERICAL}, {"value": np.float64(0.1)},
                    invariant_summary(checks))


def test_to_builtin_conversions():
    class Color(Enum):
        RED = "red"

    converted = to_builtin({"a": np.arange(3), "b": np.int64(4), "c": Fraction(6, 1), "d": Color.RED,
                            "e": (np.bool_(True), 1.5)})
    assert converted == {"a": [0, 1, 2], "b": 4, "c": "6", "d": "red", "e": [True, 1.5]}
    assert type(converted["b"]) is int


def test_envelope_layout():
    document = _document()
    assert document["schema"] == "bridge-lab/1"
    assert document["tool"]["name"] == "bridge-lab"
    assert document["config"]["branch"] == "spherical"
    assert document["invariants"]["all_pass"] is True


def test_invariant_summary_fails_on_any_check():
    summary = invariant_summary({"ok": check(0.0, 1.0), "bad": check(2.0, 1.0), "missing": check(None, 1.0)})
    assert summary["all_pass"] is False
    assert summary["checks"]["missing"]["pass"] is False


def test_json_is_deterministic():
    first, second = render_json(_document()), render_json(_document())
    assert first == second
    assert list(json.loads(first)) == sorted(json.loads(first))


def test_json_rejects_non_finite():
    with pytest.raises(OutputError):
        render_json({"value": float("nan")})


def test_format_cell():
    assert format_cell(0.1) == "0.10000000000000001"
    assert format_cell(None) == ""
    assert format_cell(True) == "true"
    assert format_cell(3) == "3"


def test_csv_layout():
    text = render_csv(["x", "y"], [[0.1, "a,b"], [2.0, None]], _document())
    lines = text.split("\r\n")
    assert lines[0].startswith("# schema: ")
    assert lines[4].startswith("# invariants: ")
    assert lines[5] == "x,y"
    assert lines[6] == '0.10000000000000001,"a,b"'
    assert lines[7] == "2,"
    assert text.endswith("\r\n")


def test_artifact_render_formats():
    artifact = Artifact(_document(), ["x"], [[1.0]])
    assert artifact.render("json").startswith("{")
    assert artifact.render("csv").startswith("# schema")


def test_write_atomic(tmp_path):
    target = tmp_path / "nested" / "out.json"
    write_atomic(str(target), "first\r\n")
    write_atomic(str(target), "second\n")
    assert target.read_bytes() == b"second\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.json"]


def test_write_atomic_into_a_file_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError):
        write_atomic(str(blocker / "out.json"), "data")
