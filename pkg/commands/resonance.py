"""
Resonance Command

Entropy at a fixed point close to the critical line as a function of the
frequency ratio λ on a logarithmic grid. The maximum sits at λ = 1.
"""

import logging
from datetime import datetime, timezone

import numpy as np

from commands import COMMON_DEFAULTS, COMMON_SCHEMA, check_common
from commands.scaling import SIDES, parse_target
from model.criticality import entropy_resonance, resonance_offset
from model.errors import ConfigurationError
from utils.config import as_float, as_int, as_str
from utils.output import build_manifest, write_report

# ===================================================================
# Configuration
# ===================================================================
COMMAND = "resonance"
HEADER = ["lambda", "entropy", "resonance_offset"]

SCHEMA = {
    **COMMON_SCHEMA,
    "target": as_str,
    "side": as_str,
    "distance": as_float,
    "lambda_min": as_float,
    "lambda_max": as_float,
    "lambda_count": as_int,
}

DEFAULTS = {
    **COMMON_DEFAULTS,
    "target": "0.3",
    "side": "superradiant",
    "distance": 1e-6,
    "lambda_min": 0.01,
    "lambda_max": 100.0,
    "lambda_count": 41,
}


def validate(config):
    check_common(config)
    if config["side"] not in SIDES:
        raise ConfigurationError(f"side must be one of {list(SIDES)}, got '{config['side']}'")
    if not 0.0 < config["distance"]:
        raise ConfigurationError(f"distance must be positive, got {config['distance']}")
    if not 0.0 < config["lambda_min"] < config["lambda_max"]:
        raise ConfigurationError(f"need 0 < lambda_min < lambda_max, got {config['lambda_min']}, {config['lambda_max']}")
    if config["lambda_count"] < 2:
        raise ConfigurationError(f"lambda_count must be >= 2, got {config['lambda_count']}")
    return parse_target(config["target"])


def run(config, output_path):
    """
    Writes S(λ) and S(λ) + ½ln(λ + 1/λ) for every λ of the grid.

    Returns:
        int: Number of records written.
    """
    started_at = datetime.now(timezone.utc)
    logging.info("Resonance - Processing started")
    target = validate(config)
    lambdas = np.geomspace(config["lambda_min"], config["lambda_max"], config["lambda_count"])

    try:
        best, profile = entropy_resonance(target, config["distance"], lambdas, SIDES[config["side"]])
    except Exception:
        logging.error("Resonance - entropy profile failed", exc_info=True)
        raise
    offsets = resonance_offset(profile)
    rows = [
        {"lambda": lam, "entropy": entropy, "resonance_offset": offset}
        for (lam, entropy), offset in zip(profile, offsets)
    ]
    logging.info(f"Entropy maximum at lambda = {best}")

    manifest = build_manifest(COMMAND, config)
    write_report(output_path, config["format"], manifest, rows, header=HEADER, started_at=started_at)
    logging.info("Resonance - Processing finished")
    return len(rows)
