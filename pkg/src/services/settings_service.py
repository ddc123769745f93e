"""
Settings service for the laboratory's numerical knobs.
Merges an optional JSON override file into the defaults and validates the result.
"""

import copy
import json
import os
from typing import Any, Dict, Optional

import structlog
from pydantic import ValidationError as PydanticValidationError

from src.config.default_settings import DEFAULT_SETTINGS
from src.models.config import LabSettings
from src.utils.exceptions import ConfigurationError, OutputError

logger = structlog.get_logger()

DEFAULT_SETTINGS_FILE = "bridge_lab.json"


class SettingsService:
    """
    Loads laboratory settings from defaults and an optional JSON override file.
    Overrides are merged section by section, so a file may name only the keys it changes.
    """

    def __init__(self, settings_file: Optional[str] = None):
        """
        Initializes the settings service.

        Args:
            settings_file: Path to an override file. When omitted, `bridge_lab.json` in the
                working directory is used if it exists.
        """
        self.explicit = settings_file is not None
        self.settings_file = settings_file or DEFAULT_SETTINGS_FILE
        self.settings: LabSettings = self._validate_settings(self._load_settings())
        logger.debug("SettingsService initialized", settings_source=self.settings_file)

    def _load_settings(self) -> Dict[str, Any]:
        """
        Loads the raw settings dictionary.
        A missing default file yields the defaults; a missing explicit file is an error.
        """
        merged = copy.deepcopy(DEFAULT_SETTINGS)
        if not os.path.exists(self.settings_file):
            if self.explicit:
                raise OutputError("Settings file not found", details={"file": self.settings_file})
            logger.debug("Settings file not found, using default settings", file=self.settings_file)
            return merged
        try:
            with open(self.settings_file, "r", encoding="utf-8") as f:
                loaded = json.load(f)
        except json.JSONDecodeError as e:
            logger.error("Error parsing settings file", file=self.settings_file, error=str(e))
            raise ConfigurationError("Settings file is not valid JSON", details={"file": self.settings_file, "error": str(e)})
        except OSError as e:
            logger.error("Error reading settings file", file=self.settings_file, error=str(e), exc_info=True)
            raise OutputError("Settings file could not be read", details={"file": self.settings_file, "error": str(e)})

        if not isinstance(loaded, dict):
            raise ConfigurationError("Settings must be a JSON object", details={"file": self.settings_file})
        for section, values in loaded.items():
            if section not in merged:
                raise ConfigurationError(f"Unknown settings section: {section}", details={"section": section})
            if not isinstance(values, dict):
                raise ConfigurationError(f"Settings section '{section}' must be an object", details={"section": section})
            merged[section].update(values)
        logger.info("Loaded settings overrides", file=self.settings_file, sections=sorted(loaded))
        return merged

    def _validate_settings(self, raw: Dict[str, Any]) -> LabSettings:
        """
        Validates a raw settings dictionary.

        Raises:
            ConfigurationError: If any value is out of range or of the wrong type.
        """
        try:
            return LabSettings.model_validate(raw)
        except PydanticValidationError as e:
            errors = [
                {"field": ".".join(str(part) for part in err["loc"]), "message": err["msg"]}
                for err in e.errors()
            ]
            logger.warning("Settings validation failed", errors=errors)
            raise ConfigurationError("Invalid laboratory settings", details={"errors": errors})

    def get_settings(self) -> LabSettings:
        return self.settings

    def with_overrides(self, overrides: Dict[str, Dict[str, Any]]) -> LabSettings:
        """
        Returns the settings with per-section overrides applied (None values are ignored).

        Args:
            overrides: Mapping of section name to the keys to replace.

        Returns:
            Validated settings.
        """
        raw = self.settings.model_dump()
        for section, values in overrides.items():
            raw[section].update({key: value for key, value in values.items() if value is not None})
        return self._validate_settings(raw)
