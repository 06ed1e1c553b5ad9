"""
Boundary Command

Traces the phase boundary: the second-order line up to the tricritical
point, the tricritical point itself and the first-order boundary beyond it.
First-order points also carry the gap and entropy on both degenerate
branches, so the finite jumps across the boundary can be read off directly.
"""

import logging
from datetime import datetime, timezone

from commands import COMMON_DEFAULTS, COMMON_SCHEMA, check_common
from model import meanfield
from model.errors import ConfigurationError
from model.fluctuations import analyze
from model.meanfield import TransitionOrder, trace_boundary
from model.params import ModelParams
from utils.config import as_float, as_int
from utils.output import build_manifest, write_report

# ===================================================================
# Configuration
# ===================================================================
COMMAND = "boundary"
HEADER = [
    "x_c", "y_c", "order", "z_jump",
    "gap_normal", "gap_superradiant", "entropy_normal", "entropy_superradiant",
]

SCHEMA = {
    **COMMON_SCHEMA,
    "x_min": as_float,
    "x_max": as_float,
    "resolution": as_int,
    "lambda": as_float,
}

DEFAULTS = {
    **COMMON_DEFAULTS,
    "format": "json",
    "x_min": 0.0,
    "x_max": 0.95,
    "resolution": 20,
    "lambda": 1.0,
}


def validate(config):
    check_common(config)
    if config["resolution"] < 2:
        raise ConfigurationError(f"resolution must be >= 2, got {config['resolution']}")
    if not (0.0 <= config["x_min"] < config["x_max"] < 1.0):
        raise ConfigurationError(f"need 0 <= x_min < x_max < 1, got [{config['x_min']}, {config['x_max']}]")
    if not config["lambda"] > 0.0:
        raise ConfigurationError(f"lambda must be positive, got {config['lambda']}")


def _branch_columns(point, lam):
    # both degenerate minima of a first-order point, evaluated on their own
    p = ModelParams(point.x_c, point.y_c, lam)
    normal = analyze(p, 0.0)
    superradiant = analyze(p, point.z_jump)
    return {
        "gap_normal": normal.gap,
        "gap_superradiant": superradiant.gap,
        "entropy_normal": normal.entropy,
        "entropy_superradiant": superradiant.entropy,
    }


def run(config, output_path):
    """
    Traces the boundary and writes one record per BoundaryPoint.

    Returns:
        int: Number of records written.
    """
    started_at = datetime.now(timezone.utc)
    logging.info("Boundary - Processing started")
    validate(config)

    try:
        logging.info(f"[1/2] Tracing x in [{config['x_min']}, {config['x_max']}] at resolution {config['resolution']}")
        points = trace_boundary(config["x_min"], config["x_max"], config["resolution"])
        rows = []
        for point in points:
            row = point.to_dict()
            if point.order == TransitionOrder.FIRST_ORDER:
                row.update(_branch_columns(point, config["lambda"]))
            rows.append(row)
    except Exception:
        logging.error("Boundary - tracing failed", exc_info=True)
        raise

    counts = {order.value: sum(1 for p in points if p.order == order) for order in TransitionOrder}
    logging.info(f"[2/2] Writing {len(rows)} boundary points {counts}")
    manifest = build_manifest(COMMAND, config, {
        "boundary_y_tol": meanfield.BOUNDARY_Y_TOL,
        "degeneracy_tol": meanfield.DEGENERACY_TOL,
    })
    write_report(output_path, config["format"], manifest, rows, header=HEADER, started_at=started_at)
    logging.info("Boundary - Processing finished")
    return len(rows)
