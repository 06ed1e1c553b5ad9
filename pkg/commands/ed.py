"""
ED Command

Exact diagonalization at a list of atom numbers, side by side with the
thermodynamic-limit predictions. The model point is given either as the
dimensionless (x, y, lambda) or as raw (omega, delta, g, epsilon).
"""

import logging
from datetime import datetime, timezone

from commands import COMMON_DEFAULTS, COMMON_SCHEMA, check_common
from model import ed_oracle
from model.ed_oracle import EDConfig, finite_size_scan
from model.errors import ConfigurationError
from model.params import ModelParams
from utils.config import as_float, as_int, as_int_list, as_optional
from utils.output import build_manifest, write_report

# ===================================================================
# Configuration
# ===================================================================
COMMAND = "ed"
RAW_KEYS = ("omega", "delta", "g", "epsilon")
HEADER = [
    "n_atoms", "n_max", "dimension", "ground_energy", "ground_energy_per_atom",
    "predicted_energy_per_atom", "energy_per_atom_diff", "gap", "intra_sector_gap",
    "compared_gap", "predicted_gap", "gap_diff", "n_photon_per_atom", "predicted_photon_density",
    "photon_density_diff", "energy_shift", "predicted_energy_shift", "mean_b",
    "entropy", "entropy_gaussian", "ground_parity", "truncation_converged",
]

SCHEMA = {
    **COMMON_SCHEMA,
    "n_atoms": as_int_list,
    "x": as_float,
    "y": as_float,
    "lambda": as_float,
    "omega": as_optional(as_float),
    "delta": as_optional(as_float),
    "g": as_optional(as_float),
    "epsilon": as_optional(as_float),
    "n_max": as_optional(as_int),
    "target_tolerance": as_float,
    "max_dimension": as_int,
    "dense_threshold": as_int,
    "max_escalations": as_int,
}

DEFAULTS = {
    **COMMON_DEFAULTS,
    "format": "json",
    "n_atoms": [8, 16, 24, 32],
    "x": 0.0,
    "y": 2.0,
    "lambda": 1.0,
    "omega": None,
    "delta": None,
    "g": None,
    "epsilon": None,
    "n_max": None,
    "target_tolerance": ed_oracle.DEFAULT_TARGET_TOLERANCE,
    "max_dimension": ed_oracle.DEFAULT_MAX_DIMENSION,
    "dense_threshold": ed_oracle.DEFAULT_DENSE_THRESHOLD,
    "max_escalations": ed_oracle.DEFAULT_MAX_ESCALATIONS,
}


def build_configs(config):
    """
    EDConfigs for every requested N.

    Raises:
        ConfigurationError: If the raw parameters are only partly given or
            any EDConfig field is invalid.
        DomainError: If the model point is outside the parameter domain.
    """
    check_common(config)
    if not config["n_atoms"]:
        raise ConfigurationError("n_atoms must not be empty")
    given = [key for key in RAW_KEYS if config[key] is not None]
    options = {
        "n_max": config["n_max"],
        "target_tolerance": config["target_tolerance"],
        "max_dimension": config["max_dimension"],
        "dense_threshold": config["dense_threshold"],
        "max_escalations": config["max_escalations"],
        "seed": config["seed"],
    }
    if given:
        if len(given) != len(RAW_KEYS):
            missing = [key for key in RAW_KEYS if key not in given]
            raise ConfigurationError(f"Raw parameters need all of {list(RAW_KEYS)}; missing {missing}")
        return [
            EDConfig.from_raw(n, *(config[key] for key in RAW_KEYS), **options)
            for n in config["n_atoms"]
        ]
    params = ModelParams(config["x"], config["y"], config["lambda"])
    return [EDConfig(n_atoms=n, params=params, **options) for n in config["n_atoms"]]


def run(config, output_path):
    """
    Runs the finite-size scan and writes one record per N.

    Returns:
        int: Number of records written.
    """
    started_at = datetime.now(timezone.utc)
    logging.info("ED - Processing started")
    cfgs = build_configs(config)
    for cfg in cfgs:
        # budget check happens before any matrix is built
        ed_oracle.check_budget(cfg, cfg.initial_n_max())

    logging.info(f"[1/2] Diagonalizing N = {[cfg.n_atoms for cfg in cfgs]}")
    try:
        rows = finite_size_scan(cfgs)
    except Exception:
        logging.error("ED - finite-size scan failed", exc_info=True)
        raise
    unconverged = [row["n_atoms"] for row in rows if not row["truncation_converged"]]
    if unconverged:
        logging.warning(f"Truncation did not converge for N = {unconverged}")

    logging.info(f"[2/2] Writing {len(rows)} records")
    manifest = build_manifest(COMMAND, config, {
        "n_max_step": ed_oracle.N_MAX_STEP,
        "target_tolerance": config["target_tolerance"],
    })
    write_report(output_path, config["format"], manifest, rows, header=HEADER, started_at=started_at)
    logging.info("ED - Processing finished")
    return len(rows)
