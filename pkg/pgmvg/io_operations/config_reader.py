# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""Run configuration files.

Two layouts are accepted. Plain text files hold ``key = value`` lines with
``#`` comments, keys mirroring the RunConfig field names::

    # run.cfg
    k_init = 5
    th_high = 0.4
    vote_quorum = none

Files ending in ``.yaml`` or ``.yml`` hold a single YAML mapping with the
same keys.
"""

import logging
import os
import typing
from dataclasses import fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Type, Union

import yaml

from ..core_types import RunConfig, validate_config
from ..exceptions import ConfigError

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

_NONE_WORDS = ("none", "null", "")


def _field_types(cls: Type) -> Dict[str, Any]:
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in fields(cls)}


def _coerce(key: str, value: Any, target: Any) -> Any:
    """Convert value to the annotated type of field key."""
    optional = False
    if typing.get_origin(target) is Union and type(None) in typing.get_args(target):
        args = [a for a in typing.get_args(target) if a is not type(None)]
        optional = True
        target = args[0]

    if value is None or (isinstance(value, str) and value.strip().lower() in _NONE_WORDS):
        if optional:
            return None
        raise ConfigError(key, "a value is required")

    try:
        if target is bool:
            if isinstance(value, str):
                word = value.strip().lower()
                if word not in ("true", "false", "1", "0", "yes", "no", "on", "off"):
                    raise ValueError(value)
                return word in ("true", "1", "yes", "on")
            return bool(value)
        if target is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            if isinstance(value, str):
                return int(value.strip())
            return int(value)
        if target is float:
            return float(value)
        if target is str:
            return str(value)
    except (TypeError, ValueError):
        raise ConfigError(key, "expected a value of type %s, got %r" % (target.__name__, value))
    return value


def parse_key_value_lines(text: str) -> Dict[str, str]:
    """Parse ``key = value`` lines into a dict, ignoring comments and blanks."""
    values = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if len(line) == 0:
            continue
        if "=" not in line:
            raise ConfigError("line %d" % line_number, "expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def read_config_mapping(path: PathLike) -> Dict[str, Any]:
    """Read the raw key/value mapping of a config file without coercion."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".yaml", ".yml"):
        data = yaml.safe_load(text)
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError(str(path), "YAML config must be a mapping")
        return {str(k): v for k, v in data.items()}
    return parse_key_value_lines(text)


def build_dataclass(cls: Type, values: Dict[str, Any], base=None):
    """Instantiate the frozen dataclass cls from a loosely typed mapping.

    Unknown keys raise ConfigError; missing keys keep the value of base (or
    the dataclass default when base is None).
    """
    types = _field_types(cls)
    unknown = sorted(set(values) - set(types))
    if len(unknown) > 0:
        raise ConfigError(unknown[0], "unknown configuration key")

    coerced = {key: _coerce(key, value, types[key]) for key, value in values.items()}
    if base is None:
        return cls(**coerced)
    return replace(base, **coerced)


def load_run_config(
    path: Optional[PathLike] = None, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """Build the effective RunConfig of a run.

    Args:
        path (str | PathLike, optional): Config file, ``key = value`` or YAML.
            Defaults to None (start from the defaults).
        overrides (dict, optional): Values that win over the file, typically
            command-line flags. None values are skipped. Defaults to None.

    Returns:
        RunConfig: The validated configuration.

    Raises:
        ConfigError: For unknown keys, uncoercible values or violated
            constraints.
    """
    config = RunConfig()
    if path is not None:
        config = build_dataclass(RunConfig, read_config_mapping(path), base=config)
        logger.debug("Loaded configuration from %s" % path)

    if overrides:
        overrides = {k: v for k, v in overrides.items() if v is not None}
        config = build_dataclass(RunConfig, overrides, base=config)

    return validate_config(config)
