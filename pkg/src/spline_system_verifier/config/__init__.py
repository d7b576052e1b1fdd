from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from ..models import ExperimentConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path("config_rules/config.json")
MAX_ORDER = 6
MAX_KNOTS = 2000
KNOWN_FAMILIES = ("dyadic", "uniform-random", "clustered", "repeated-knot", "custom-file")

_INT_FIELDS = {
    "k", "n", "seed", "trials", "m", "N_k_override", "remez_trials",
    "random_cases", "projection_points", "batch_workers",
}
_FLOAT_FIELDS = {"technical_p"}
_OPTIONAL_FIELDS = {"N_k_override", "sequence_file", "batch_workers"}


class ConfigError(ValueError):
    """Invalid experiment configuration; the CLI reports it as a usage error."""


def resolve_path(path: Union[str, os.PathLike[str], Path]) -> Path:
    """``path`` as given, or relative to the repository root when it is not found.

    Raises
    ------
    FileNotFoundError
        If neither location exists.
    """
    path = Path(path)
    if path.exists():
        return path
    if not path.is_absolute():
        current_dir = Path(__file__).resolve().parent
        rel_path = current_dir / ".." / ".." / ".." / path
        if rel_path.exists():
            return rel_path
        raise FileNotFoundError(
            f"File not found at {path} or {rel_path}"
        )
    raise FileNotFoundError(f"File not found: {path}")


def load_config(
    config_path: Union[str, os.PathLike[str], Path] = DEFAULT_CONFIG_PATH,
) -> dict:
    """
    Loads the JSON application configuration.

    Args:
        config_path (str): The path to the configuration file.

    Returns:
        dict: The loaded configuration as a dictionary.

    Raises:
        FileNotFoundError: If the config file does not exist.
        ValueError:
            If the config file is not valid JSON or the top-level value is not
            a dict.
    """
    config_path = resolve_path(config_path)
    try:
        with config_path.open("r", encoding="utf-8") as f:
            config = json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(
            f"Error decoding JSON from config file {config_path}: {e}"
        )

    if not isinstance(config, dict):
        raise ValueError(
            "Configuration content must be a JSON object (dictionary), but got"
            f" {type(config)} from {config_path}"
        )

    return config


def _convert(key: str, value: Any) -> Any:
    if key in _OPTIONAL_FIELDS and (value is None or str(value).strip().lower() in ("", "none")):
        return None
    try:
        if key == "p_list":
            if isinstance(value, str):
                parts = value.replace(",", " ").split()
            elif isinstance(value, (list, tuple)):
                parts = list(value)
            else:
                parts = [value]
            return tuple(float(v) for v in parts)
        if key in _INT_FIELDS:
            return int(value)
        if key in _FLOAT_FIELDS:
            return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid value {value!r} for '{key}': {e}")
    return str(value)


def experiment_config_from_mapping(
    values: Mapping[str, Any], defaults: Optional[Mapping[str, Any]] = None
) -> ExperimentConfig:
    """Build and validate an ExperimentConfig from string or typed values."""
    known = {f.name for f in fields(ExperimentConfig)}
    merged: Dict[str, Any] = dict(defaults or {})
    merged.update({k: v for k, v in values.items() if v is not None})
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ConfigError(f"Unknown experiment config keys: {', '.join(unknown)}")
    config = ExperimentConfig(**{k: _convert(k, v) for k, v in merged.items()})
    validate_experiment_config(config)
    return config


def parse_experiment_text(text: str) -> Dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"Line {lineno}: expected key=value, got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"Line {lineno}: empty key")
        values[key] = value
    return values


def load_experiment_config(
    path: Union[str, os.PathLike[str], Path],
    defaults: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read experiment config {path}: {e}")
    config = experiment_config_from_mapping(parse_experiment_text(text), defaults)
    logger.debug("Loaded experiment config %s from %s", config.experiment_id, path)
    return config


def validate_experiment_config(config: ExperimentConfig) -> None:
    problems = []
    if not 1 <= config.k <= MAX_ORDER:
        problems.append(f"k must lie in 1..{MAX_ORDER}, got {config.k}")
    if config.family not in KNOWN_FAMILIES:
        problems.append(f"unknown family '{config.family}'")
    if not 2 * config.k + 2 <= config.n <= MAX_KNOTS:
        problems.append(f"n must lie in {2 * config.k + 2}..{MAX_KNOTS}, got {config.n}")
    if not config.p_list:
        problems.append("p_list is empty")
    for p in config.p_list:
        if not 1.0 < p < math.inf:
            problems.append(f"p must lie in (1, inf), got {p}")
    if config.trials < 1:
        problems.append(f"trials must be at least 1, got {config.trials}")
    if config.m < 1:
        problems.append(f"m must be at least 1, got {config.m}")
    if config.random_cases < 1:
        problems.append(f"random_cases must be at least 1, got {config.random_cases}")
    if config.remez_trials < 0:
        problems.append(f"remez_trials must be non-negative, got {config.remez_trials}")
    if config.projection_points < 1:
        problems.append(f"projection_points must be at least 1, got {config.projection_points}")
    if not 1.0 < config.technical_p < math.inf:
        problems.append(f"technical_p must lie in (1, inf), got {config.technical_p}")
    if config.N_k_override is not None and config.N_k_override < 1:
        problems.append(f"N_k_override must be positive, got {config.N_k_override}")
    if config.family == "custom-file" and not config.sequence_file:
        problems.append("the custom-file family needs sequence_file")
    if problems:
        raise ConfigError("; ".join(problems))
