"""
Configuration Utility

Loads run configuration for the lab commands. A config file is a list of
key=value lines (blank lines and '#' comments skipped, surrounding quotes
stripped); '[section]' headers are accepted and ignored. The JSON manifest
written next to every output is accepted too, so a run can be reproduced
from it.

Resolution order: command defaults < config file < command-line flags.
"""

import json
import logging
import os

from model.errors import ConfigurationError


def _strip_quotes(text):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in ("'", '"'):
        return text[1:-1]
    return text


def read_config_file(path):
    """
    Reads a key=value config file or a JSON run manifest.

    Args:
        path: File path.

    Returns:
        dict: Raw values keyed by option name (strings for key=value files,
            typed values for manifests).

    Raises:
        ConfigurationError: If a line cannot be parsed.
        OSError: If the file cannot be read.
    """
    logging.info(f"-> Reading configuration: {path}")
    with open(path, "r", encoding="utf-8") as f:
        content = f.read()

    if content.lstrip().startswith("{"):
        try:
            document = json.loads(content)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}: invalid JSON manifest ({e})") from e
        manifest = document.get("manifest", document)
        if not isinstance(manifest.get("config"), dict):
            raise ConfigurationError(f"{path}: JSON file has no 'config' object")
        return dict(manifest["config"])

    values = {}
    for number, line in enumerate(content.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{number}: expected key=value, got '{line}'")
        key, value = line.split("=", 1)
        key = _strip_quotes(key).replace("-", "_")
        values[key] = _strip_quotes(value)
    return values


# --- Typed parsers. Each accepts the raw string form or an already typed value. ---

def as_float(value):
    if isinstance(value, bool):
        raise ValueError("boolean is not a number")
    return float(value)


def as_int(value):
    if isinstance(value, bool):
        raise ValueError("boolean is not an integer")
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"{value} is not an integer")
    return int(value)


def as_str(value):
    return str(value).strip()


def _split(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    return [item for item in str(value).replace(";", ",").split(",") if item.strip()]


def as_float_list(value):
    return [as_float(item) for item in _split(value)]


def as_int_list(value):
    return [as_int(item) for item in _split(value)]


def as_str_list(value):
    return [as_str(item) for item in _split(value)]


def as_optional(parser):
    def parse(value):
        if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "auto")):
            return None
        return parser(value)
    return parse


def resolve(schema, defaults, file_values=None, overrides=None):
    """
    Merges defaults, config-file values and flag overrides into a typed dict.

    Args:
        schema: {key: parser}. Keys outside the schema are rejected.
        defaults: {key: default value}.
        file_values: Raw values from read_config_file (optional).
        overrides: Values from command-line flags; None entries are ignored.

    Returns:
        dict: Typed configuration with every schema key present.

    Raises:
        ConfigurationError: Naming the first unknown or unparsable key.
    """
    merged = dict(defaults)
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in schema:
                raise ConfigurationError(f"Unknown configuration key '{key}'")
            merged[key] = value

    resolved = {}
    for key, parser in schema.items():
        if key not in merged:
            raise ConfigurationError(f"Missing configuration key '{key}'")
        try:
            resolved[key] = parser(merged[key])
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid value for '{key}': {merged[key]!r} ({e})") from e
    return resolved


def config_from_sources(schema, defaults, config_path=None, overrides=None):
    """read_config_file + resolve; config_path may be None."""
    file_values = None
    if config_path:
        if not os.path.exists(config_path):
            raise ConfigurationError(f"Config file not found: {config_path}")
        file_values = read_config_file(config_path)
    return resolve(schema, defaults, file_values, overrides)
