"""
Lab commands. Each module exposes SCHEMA, DEFAULTS and run(config, output_path).
"""

from model.errors import ConfigurationError
from utils.config import as_int, as_str
from utils.output import FORMATS

# Options shared by every command
COMMON_SCHEMA = {
    "format": as_str,
    "threads": as_int,
    "seed": as_int,
}

COMMON_DEFAULTS = {
    "format": "csv",
    "threads": 1,
    "seed": 0,
}


def check_common(config):
    """Raises ConfigurationError for an unknown format or a thread count below 1."""
    if config["format"] not in FORMATS:
        raise ConfigurationError(f"format must be one of {FORMATS}, got '{config['format']}'")
    if config["threads"] < 1:
        raise ConfigurationError(f"threads must be >= 1, got {config['threads']}")
