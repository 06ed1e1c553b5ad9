"""
Sweep Command

Evaluates the mean-field solution and its quantum fluctuations on an
(x, y, λ) grid and writes one record per grid point, x-major, then y, then λ.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from datetime import datetime, timezone

import numpy as np

from commands import COMMON_DEFAULTS, COMMON_SCHEMA, check_common
from model import fluctuations, meanfield
from model.errors import ConfigurationError
from model.fluctuations import analyze
from model.meanfield import minimize_f
from model.params import ModelParams
from utils.config import as_float, as_float_list, as_int, as_str_list
from utils.output import build_manifest, write_report

# ===================================================================
# Configuration
# ===================================================================
COMMAND = "sweep"
HEADER = ["x", "y", "lambda", "z", "f", "gap", "entropy", "gamma", "phase", "divergent"]
QUANTITIES = ("z", "f", "gap", "entropy", "gamma", "phase")
FLUCTUATION_QUANTITIES = ("gap", "entropy", "gamma")

SCHEMA = {
    **COMMON_SCHEMA,
    "x_min": as_float,
    "x_max": as_float,
    "x_count": as_int,
    "y_min": as_float,
    "y_max": as_float,
    "y_count": as_int,
    "lambdas": as_float_list,
    "quantities": as_str_list,
}

DEFAULTS = {
    **COMMON_DEFAULTS,
    "x_min": 0.0,
    "x_max": 0.9,
    "x_count": 10,
    "y_min": 0.5,
    "y_max": 2.5,
    "y_count": 11,
    "lambdas": [0.1, 1.0, 10.0],
    "quantities": list(QUANTITIES),
}


def validate(config):
    """Raises ConfigurationError naming the first invalid field."""
    check_common(config)
    for axis in ("x", "y"):
        if config[f"{axis}_count"] < 1:
            raise ConfigurationError(f"{axis}_count must be >= 1, got {config[f'{axis}_count']}")
        if config[f"{axis}_min"] > config[f"{axis}_max"]:
            raise ConfigurationError(f"{axis}_min must not exceed {axis}_max")
    if not (0.0 <= config["x_min"] and config["x_max"] < 1.0):
        raise ConfigurationError(f"x range must lie in [0, 1), got [{config['x_min']}, {config['x_max']}]")
    if config["y_min"] < 0.0:
        raise ConfigurationError(f"y_min must be >= 0, got {config['y_min']}")
    if not config["lambdas"]:
        raise ConfigurationError("lambdas must not be empty")
    for lam in config["lambdas"]:
        if not (math.isfinite(lam) and lam > 0.0):
            raise ConfigurationError(f"lambdas must be positive, got {lam}")
    if not config["quantities"]:
        raise ConfigurationError("quantities must not be empty")
    unknown = [q for q in config["quantities"] if q not in QUANTITIES]
    if unknown:
        raise ConfigurationError(f"quantities contains unknown entries {unknown}; allowed: {list(QUANTITIES)}")


def grid(config):
    """Ordered (x, y, λ) triples, x-major."""
    xs = np.linspace(config["x_min"], config["x_max"], config["x_count"])
    ys = np.linspace(config["y_min"], config["y_max"], config["y_count"])
    return [(float(x), float(y), float(lam)) for x in xs for y in ys for lam in config["lambdas"]]


def evaluate_point(x, y, lam, quantities):
    """
    One sweep record. Quantities not requested stay None (empty in CSV);
    divergent is filled whenever the entropy is.
    """
    p = ModelParams(x, y, lam)
    solution = minimize_f(p)
    row = {"x": x, "y": y, "lambda": lam}
    if "z" in quantities:
        row["z"] = solution.z
    if "f" in quantities:
        row["f"] = solution.energy
    if "phase" in quantities:
        row["phase"] = solution.phase.value
    if any(q in quantities for q in FLUCTUATION_QUANTITIES):
        fr = analyze(p, solution.z)
        if "gap" in quantities:
            row["gap"] = fr.gap
        if "gamma" in quantities:
            row["gamma"] = fr.gamma
        if "entropy" in quantities:
            row["entropy"] = fr.entropy
            row["divergent"] = fr.divergent
            if fr.divergent:
                logging.warning(f"Divergent entropy at x={x}, y={y}, lambda={lam}; reporting floor value {fr.entropy}")
    return row


def tolerances():
    return {
        "z_normal_tol": meanfield.Z_NORMAL_TOL,
        "root_xtol": meanfield.ROOT_XTOL,
        "eigen_clamp": fluctuations.EIGEN_CLAMP,
        "gap_tol": fluctuations.GAP_TOL,
    }


def run(config, output_path):
    """
    Runs the sweep and writes the report.

    Args:
        config: Resolved configuration (SCHEMA keys).
        output_path: Destination file.

    Returns:
        int: Number of records written.
    """
    started_at = datetime.now(timezone.utc)
    logging.info("Sweep - Processing started")
    validate(config)

    points = grid(config)
    quantities = set(config["quantities"])
    logging.info(f"[1/2] Evaluating {len(points)} grid points on {config['threads']} thread(s)")

    rows = [None] * len(points)
    try:
        with ThreadPoolExecutor(max_workers=config["threads"]) as executor:
            future_to_index = {
                executor.submit(evaluate_point, x, y, lam, quantities): index
                for index, (x, y, lam) in enumerate(points)
            }
            for future in as_completed(future_to_index):
                rows[future_to_index[future]] = future.result()
    except Exception:
        logging.error("Sweep - grid evaluation failed", exc_info=True)
        raise

    logging.info(f"[2/2] Writing {len(rows)} records")
    manifest = build_manifest(COMMAND, config, tolerances())
    write_report(output_path, config["format"], manifest, rows, header=HEADER, started_at=started_at)
    logging.info("Sweep - Processing finished")
    return len(rows)
