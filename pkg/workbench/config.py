"""Settings: defaults, then agm.yaml, then the environment, then CLI flags."""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml
from dotenv import load_dotenv
from jsonschema import validators

from workbench.errors import UsageError
from workbench.runtime import Budget

logger = logging.getLogger(__name__)

CONFIG_ENV = "AGM_CONFIG"
STEPS_ENV = "AGM_BUDGET_STEPS"
DEPTH_ENV = "AGM_BUDGET_DEPTH"
DEFAULT_CONFIG_FILE = "agm.yaml"

CONFIG_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "budget": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_steps": {"type": "integer", "minimum": 1},
                "max_depth": {"type": "integer", "minimum": 1},
            },
        },
        "lint": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "over_specification_threshold": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
        "runtime": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"ignore_unexpected_events": {"type": "boolean"}},
        },
        "suite": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"jobs": {"type": "integer", "minimum": 1}},
        },
    },
}


@dataclass(frozen=True)
class Settings:
    max_steps: int = 100000
    max_depth: int = 1000
    over_specification_threshold: float = 0.5
    ignore_unexpected_events: bool = False
    jobs: int = 1

    @property
    def budget(self) -> Budget:
        return Budget(self.max_steps, self.max_depth)

    def with_overrides(self, **overrides: Any) -> "Settings":
        """Apply CLI flags; None means the flag was not given."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _validate(document: Any, path: Path) -> None:
    validator_cls = validators.validator_for(CONFIG_SCHEMA)
    errors = sorted(validator_cls(CONFIG_SCHEMA).iter_errors(document), key=lambda e: list(e.path))
    if errors:
        details = [{"message": e.message, "path": list(e.path)} for e in errors]
        raise UsageError("invalid-config", f"{path}: {errors[0].message}", details)


def _read_yaml(path: Path) -> Dict[str, Any]:
    try:
        document = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError("invalid-config", f"{path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise UsageError("invalid-config", f"{path}: not valid YAML ({exc})") from exc
    if document is None:
        return {}
    _validate(document, path)
    return document


def _env_int(env: Mapping[str, str], name: str) -> Optional[int]:
    raw = env.get(name)
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise UsageError("invalid-config", f"{name} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise UsageError("invalid-config", f"{name} must be positive, got {value}")
    return value


def _config_path(explicit: Optional[str], env: Mapping[str, str]) -> Optional[Path]:
    if explicit:
        path = Path(explicit)
        if not path.is_file():
            raise UsageError("missing-file", f"{explicit}: no such file")
        return path
    if env.get(CONFIG_ENV):
        path = Path(env[CONFIG_ENV])
        if not path.is_file():
            raise UsageError("missing-file", f"{path}: no such file ({CONFIG_ENV})")
        return path
    default = Path(DEFAULT_CONFIG_FILE)
    return default if default.is_file() else None


def load_settings(config_path: Optional[str] = None, env: Optional[Mapping[str, str]] = None) -> Settings:
    """Resolve settings; `env` defaults to the process environment after loading `.env`."""
    if env is None:
        load_dotenv()
        env = os.environ
    settings = Settings()
    path = _config_path(config_path, env)
    if path is not None:
        document = _read_yaml(path)
        settings = replace(
            settings,
            max_steps=document.get("budget", {}).get("max_steps", settings.max_steps),
            max_depth=document.get("budget", {}).get("max_depth", settings.max_depth),
            over_specification_threshold=document.get("lint", {}).get(
                "over_specification_threshold", settings.over_specification_threshold
            ),
            ignore_unexpected_events=document.get("runtime", {}).get(
                "ignore_unexpected_events", settings.ignore_unexpected_events
            ),
            jobs=document.get("suite", {}).get("jobs", settings.jobs),
        )
        logger.debug("loaded settings from %s", path)
    settings = settings.with_overrides(max_steps=_env_int(env, STEPS_ENV), max_depth=_env_int(env, DEPTH_ENV))
    return settings
