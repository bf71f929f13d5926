"""TOML run configuration: one table per section, validated into frozen models."""
import logging
import tomllib
from typing import Any

from pydantic import BaseModel, ValidationError

from core.errors import ConfigError
from core.params import ChannelParams, TolerancePolicy
from models.run import RunOptions

logger = logging.getLogger(__name__)

REQUIRED_PARAMS = ("nu", "alpha", "L")


def _flatten(table: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    flat = {}
    for key, value in table.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def _known_keys() -> set[str]:
    keys = {f"params.{name}" for name in ChannelParams.model_fields}
    keys |= {f"tol.{name}" for name in TolerancePolicy.model_fields}
    for section, field in RunOptions.model_fields.items():
        keys |= {f"{section}.{name}" for name in field.annotation.model_fields}
    return keys


def _section(flat: dict[str, Any], name: str) -> dict[str, Any]:
    prefix = f"{name}."
    return {key[len(prefix):]: value for key, value in flat.items() if key.startswith(prefix)}


def _validated(model: type[BaseModel], section: str, values: dict[str, Any]):
    try:
        return model(**values)
    except ValidationError as e:
        lines = []
        for error in e.errors():
            where = ".".join([section, *(str(part) for part in error["loc"])])
            lines.append(f"{where}: {error['msg']}")
        raise ConfigError("; ".join(lines)) from None


def parse_config(text: str) -> tuple[ChannelParams, TolerancePolicy, RunOptions]:
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML: {e}") from None

    flat = _flatten(document)
    unknown = sorted(set(flat) - _known_keys())
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    params = _section(flat, "params")
    missing = [name for name in REQUIRED_PARAMS if name not in params]
    if missing:
        raise ConfigError("; ".join(f"missing key {name}" for name in missing))

    channel = _validated(ChannelParams, "params", params)
    policy = _validated(TolerancePolicy, "tol", _section(flat, "tol"))
    options = {}
    for section, field in RunOptions.model_fields.items():
        options[section] = _validated(field.annotation, section, _section(flat, section))
    logger.debug(f"Parsed config: {channel}, {policy}")
    return channel, policy, RunOptions(**options)
