"""
Scaling Command

Approaches a point of the critical line (or the tricritical point) along the
normal and reports the scaling fits: order parameter exponent, determinant
coefficient β, gap exponent, entropy slopes and the residual of the
gap-entropy relation at every sampled distance.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from datetime import datetime, timezone

import numpy as np

from commands import COMMON_DEFAULTS, COMMON_SCHEMA, check_common
from model import criticality
from model.criticality import (
    Side,
    determinant_scaling,
    entropy_divergence,
    gap_entropy_relation,
    gap_scaling,
    make_approach,
    order_parameter_scaling,
    second_order_target,
    tricritical_target,
)
from model.errors import ConfigurationError
from model.fluctuations import analyze
from model.params import X_TRICRITICAL
from utils.config import as_float, as_int, as_str
from utils.output import build_manifest, write_report

# ===================================================================
# Configuration
# ===================================================================
COMMAND = "scaling"
HEADER = ["n", "x", "y", "z", "gap", "entropy", "determinant_ratio", "universal_residual"]
SIDES = {"superradiant": Side.SUPERRADIANT, "normal": Side.NORMAL}

SCHEMA = {
    **COMMON_SCHEMA,
    "target": as_str,
    "side": as_str,
    "lambda": as_float,
    "n_min": as_float,
    "n_max": as_float,
    "n_count": as_int,
}

DEFAULTS = {
    **COMMON_DEFAULTS,
    "format": "json",
    "target": "qtp",
    "side": "superradiant",
    "lambda": 1.0,
    "n_min": 1e-9,
    "n_max": 1e-5,
    "n_count": 17,
}


def parse_target(value):
    """'qtp' or a critical-line abscissa x_c in [0, 1/√5]."""
    if value.strip().lower() == "qtp":
        return tricritical_target()
    try:
        x_c = float(value)
    except ValueError as e:
        raise ConfigurationError(f"target must be 'qtp' or a number, got '{value}'") from e
    if not 0.0 <= x_c <= X_TRICRITICAL:
        raise ConfigurationError(f"target x_c must lie in [0, {X_TRICRITICAL}], got {x_c}")
    return second_order_target(x_c)


def validate(config):
    check_common(config)
    if config["side"] not in SIDES:
        raise ConfigurationError(f"side must be one of {list(SIDES)}, got '{config['side']}'")
    if not config["lambda"] > 0.0:
        raise ConfigurationError(f"lambda must be positive, got {config['lambda']}")
    if not 0.0 < config["n_min"] < config["n_max"]:
        raise ConfigurationError(f"need 0 < n_min < n_max, got {config['n_min']}, {config['n_max']}")
    if config["n_count"] < 2:
        raise ConfigurationError(f"n_count must be >= 2, got {config['n_count']}")
    return parse_target(config["target"])


def _window_rows(app, lam):
    determinants = criticality.determinant_values(app, lam)
    rows = []
    for n, det in zip(app.distances, determinants):
        x, y = app.point(n)
        fr = analyze(app.params(n, lam))
        rows.append({
            "n": n,
            "x": x,
            "y": y,
            "z": fr.z,
            "gap": fr.gap,
            "entropy": fr.entropy,
            "determinant_ratio": float(det),
            "universal_residual": gap_entropy_relation(x, y, lam),
        })
    return rows


def run(config, output_path):
    """
    Runs the scaling study. JSON output holds one report with the fits and
    the sampled window; CSV output holds the window rows only.

    Returns:
        int: Number of window rows.
    """
    started_at = datetime.now(timezone.utc)
    logging.info("Scaling - Processing started")
    target = validate(config)
    side = SIDES[config["side"]]
    lam = config["lambda"]
    distances = np.geomspace(config["n_min"], config["n_max"], config["n_count"])
    app = make_approach(target, side, distances)
    logging.info(f"[1/3] Approach to ({target.x_c}, {target.y_c}) [{target.order.value}] from the {side.value}")

    tasks = {
        "determinant": lambda: determinant_scaling(app, lam).to_dict(),
        "gap": lambda: gap_scaling(app, lam).to_dict(),
        "entropy_vs_distance": lambda: entropy_divergence(app, lam, "distance").to_dict(),
        "entropy_vs_gap": lambda: entropy_divergence(app, lam, "gap").to_dict(),
        "window": lambda: _window_rows(app, lam),
    }
    if side == Side.SUPERRADIANT:
        tasks["order_parameter"] = lambda: order_parameter_scaling(app).to_dict()

    logging.info(f"[2/3] Running {len(tasks)} fits on {config['threads']} thread(s)")
    results = {}
    with ThreadPoolExecutor(max_workers=config["threads"]) as executor:
        future_to_name = {executor.submit(task): name for name, task in tasks.items()}
        for future in as_completed(future_to_name):
            name = future_to_name[future]
            try:
                results[name] = future.result()
                logging.info(f"  -> {name} done")
            except Exception:
                logging.error(f"Scaling - {name} failed", exc_info=True)
                raise

    window = results.pop("window")
    report = {
        "target": target.to_dict(),
        "side": side.value,
        "lambda": lam,
        "fits": {**{"order_parameter": None}, **results},
        "points": window,
    }
    fits = report["fits"]
    if fits["order_parameter"]:
        logging.info(f"alpha = {fits['order_parameter']['exponent']:.6f}")
    logging.info(f"beta = {fits['determinant']['beta']:.6f} (expected {fits['determinant']['reference']})")

    logging.info("[3/3] Writing report")
    manifest = build_manifest(COMMAND, config, {"divergent_gap": criticality.DIVERGENT_GAP})
    rows = [report] if config["format"] == "json" else window
    write_report(output_path, config["format"], manifest, rows, header=HEADER, started_at=started_at)
    logging.info("Scaling - Processing finished")
    return len(window)
