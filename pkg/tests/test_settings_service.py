import json

import pytest
from pydantic import ValidationError as PydanticValidationError

from src.config.default_settings import DEFAULT_SETTINGS
from src.models.config import LabSettings, RunConfig, StabilitySettings
from src.services.settings_service import SettingsService
from src.utils.exceptions import ConfigurationError, OutputError


def test_defaults_without_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    settings = SettingsService().get_settings()
    assert settings.quadrature.scheme == "tanh-sinh"
    assert settings.quadrature.node_count == 1024
    assert settings.spectral.l_max == 10
    assert settings.stability.eps_list[0] == 1e-1


def test_working_directory_file_is_picked_up(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "bridge_lab.json").write_text(json.dumps({"spectral": {"grid_nodes": 500}}))
    settings = SettingsService().get_settings()
    assert settings.spectral.grid_nodes == 500
    assert settings.spectral.l_max == 10


def test_explicit_missing_file(tmp_path):
    with pytest.raises(OutputError):
        SettingsService(str(tmp_path / "missing.json"))


@pytest.mark.parametrize("content", [
    "{not json",
    json.dumps([1, 2]),
    json.dumps({"plotting": {"dpi": 300}}),
    json.dumps({"spectral": 3}),
    json.dumps({"quadrature": {"node_count": 4}}),
    json.dumps({"stability": {"eps_list": [0.1, 0.2, 0.05, 0.01]}}),
])
def test_invalid_files(tmp_path, content):
    path = tmp_path / "settings.json"
    path.write_text(content)
    with pytest.raises(ConfigurationError):
        SettingsService(str(path))


def test_overrides_ignore_none(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"oracle": {"seed": 5}}))
    service = SettingsService(str(path))
    settings = service.with_overrides({"oracle": {"seed": None, "pairs": 2}, "quadrature": {"scheme": None}})
    assert settings.oracle.seed == 5
    assert settings.oracle.pairs == 2
    assert settings.quadrature.scheme == "tanh-sinh"


@pytest.mark.parametrize("l_max", [1, 2])
def test_override_validation(tmp_path, monkeypatch, l_max):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(ConfigurationError):
        SettingsService().with_overrides({"spectral": {"l_max": l_max}})


def test_defaults_come_from_the_models(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert DEFAULT_SETTINGS == LabSettings().model_dump()
    assert SettingsService().get_settings() == LabSettings()
    assert set(DEFAULT_SETTINGS) == set(LabSettings.model_fields)


@pytest.mark.parametrize("eps_list", [[0.1, 0.05, 0.01], [0.1, 0.05, 0.0, -0.01], [0.1, 0.1, 0.05, 0.01]])
def test_eps_list_validation(eps_list):
    with pytest.raises(PydanticValidationError):
        StabilitySettings(eps_list=eps_list)


@pytest.mark.parametrize("kwargs", [
    {"command": "profile", "n": 3},
    {"command": "profile", "n": 3, "T": 1.0, "T_ratio": 0.5},
    {"command": "profile", "n": 3, "t": 0.5},
    {"command": "profile", "n": 2, "T": 1.0},
    {"command": "curve", "n": 3, "T": 1.0, "t": 0.5, "branch": "spherical"},
])
def test_run_config_selectors(kwargs):
    with pytest.raises(PydanticValidationError):
        RunConfig(**kwargs)


def test_run_config_without_selector_for_curve():
    config = RunConfig(command="curve", n=4)
    assert config.quad.scheme == "tanh-sinh"
