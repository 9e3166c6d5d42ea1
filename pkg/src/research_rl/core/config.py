"""
Experiment configuration loading.

Config files are JSON or YAML mirroring ``ExperimentConfig`` field names. Named presets
live in ``config/presets.yaml`` and may carry a free-text ``description``. A file may
start from a preset via a top-level ``preset:`` key and override any nested field.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from research_rl.core.exceptions import ArtifactIOError, ConfigError
from research_rl.core.settings import ExperimentConfig

logger = logging.getLogger(__name__)


def _deep_merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    """Return a new dict where ``override`` wins key by key, recursing into dicts."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _format_violations(exc: ValidationError) -> list[str]:
    out = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        out.append(f"{path}: {err['msg']}")
    return out


class ConfigLoader:
    """
    Loads experiment configs and presets.

    Usage:
        loader = ConfigLoader()
        config = loader.load("configs/fast_f1plus_reinforce.json", overrides={"run_seed": 3})
    """

    def __init__(self, config_dir: Path | str | None = None):
        if config_dir:
            self.config_dir = Path(config_dir)
        else:
            cwd_config = Path.cwd() / "config"
            if cwd_config.exists():
                self.config_dir = cwd_config
            else:
                # src/research_rl/core/config.py -> ROOT/config
                self.config_dir = Path(__file__).resolve().parents[3] / "config"

        if not self.config_dir.exists():
            logger.warning("Config dir not found at %s", self.config_dir)

    def presets(self) -> dict[str, dict[str, Any]]:
        """Return the raw preset table (empty when no presets file exists)."""
        path = self.config_dir / "presets.yaml"
        if not path.exists():
            return {}
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        return data.get("presets", {})

    def preset(self, name: str) -> dict[str, Any]:
        table = self.presets()
        if name not in table:
            raise ConfigError(f"Unknown preset '{name}'", [f"preset: not one of {sorted(table)}"])
        return dict(table[name])

    @staticmethod
    def read_file(path: Path | str) -> dict[str, Any]:
        """Read a JSON or YAML mapping from disk."""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ArtifactIOError(f"Cannot read config file {path}: {exc}") from exc
        try:
            if path.suffix in (".yaml", ".yml"):
                data = yaml.safe_load(text)
            else:
                data = json.loads(text)
        except (json.JSONDecodeError, yaml.YAMLError) as exc:
            raise ConfigError(f"Config file {path} is not valid", [str(exc)]) from exc
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a mapping", ["<root>: not a mapping"])
        return data

    def resolve(self, raw: dict[str, Any], overrides: dict[str, Any] | None = None) -> ExperimentConfig:
        """Merge preset, raw mapping and overrides, then validate."""
        raw = dict(raw)
        preset_name = raw.pop("preset", None)
        raw.pop("description", None)
        base = self.preset(preset_name) if preset_name else {}
        base.pop("description", None)
        merged = _deep_merge(_deep_merge(base, raw), overrides or {})
        return build_config(merged)

    def load(self, path: Path | str | None = None, preset: str | None = None,
             overrides: dict[str, Any] | None = None) -> ExperimentConfig:
        raw: dict[str, Any] = self.read_file(path) if path else {}
        if preset:
            raw = {"preset": preset, **{k: v for k, v in raw.items() if k != "preset"}}
        config = self.resolve(raw, overrides)
        logger.debug("Loaded config %s (preset=%s)", config.name, preset)
        return config


def build_config(data: dict[str, Any]) -> ExperimentConfig:
    """Validate a mapping into an ``ExperimentConfig``, enumerating every violation."""
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError("Invalid experiment config", _format_violations(exc)) from exc


def load_config(path: Path | str | None = None, preset: str | None = None,
                overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Convenience wrapper around ``ConfigLoader().load``."""
    return ConfigLoader().load(path, preset=preset, overrides=overrides)
