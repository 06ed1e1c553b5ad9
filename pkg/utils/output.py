"""
Output Utility

Writes command results as CSV or JSON together with a run manifest.

Data files are deterministic: floats are written round-trip safe, non-finite
values become empty CSV fields / JSON null, and no timestamps are written.
The timestamps live in the sidecar '<output>.manifest.json'.
"""

import csv
import io
import json
import logging
import math
import os
from datetime import datetime, timezone
from enum import Enum

import numpy as np

TOOL_NAME = "tricritical-dicke-lab"
VERSION = "1.0.0"
FORMATS = ("csv", "json")


def format_float(value):
    """17 significant digits, '' for nan/inf."""
    if value is None or not math.isfinite(value):
        return ""
    return format(float(value), ".17g")


def to_serializable(obj):
    """Converts numpy scalars/arrays, enums and tuples to JSON types; nan/inf become None."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, dict):
        return {str(k): to_serializable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_serializable(v) for v in obj]
    return obj


def _csv_field(value):
    if value is None:
        return ""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def build_manifest(command, config, tolerances=None):
    """Timestamp-free manifest embedded in JSON data files."""
    return to_serializable({
        "tool": TOOL_NAME,
        "version": VERSION,
        "command": command,
        "config": config,
        "tolerances": tolerances or {},
    })


def render_csv(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_field(row.get(column)) for column in header])
    return buffer.getvalue()


def render_json(manifest, data):
    document = {"manifest": manifest, "data": to_serializable(data)}
    return json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write_text(path, content):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(content)


def write_report(path, fmt, manifest, rows, header=None, started_at=None):
    """
    Writes the data file and its sidecar manifest.

    Args:
        path: Output path.
        fmt: 'csv' or 'json'.
        manifest: From build_manifest.
        rows: List of dicts (CSV rows or JSON data entries).
        header: Column order; required for CSV.
        started_at: Run start (UTC datetime) recorded in the sidecar.

    Returns:
        str: Sidecar manifest path.

    Raises:
        OSError: If a file cannot be written.
    """
    if fmt == "csv":
        content = render_csv(header, rows)
    elif fmt == "json":
        content = render_json(manifest, rows)
    else:
        raise ValueError(f"Unknown output format: {fmt}")

    try:
        _write_text(path, content)
        logging.info(f"Successfully saved {len(rows)} records: {path}")
        sidecar_path = f"{path}.manifest.json"
        sidecar = dict(manifest)
        sidecar["output"] = os.path.abspath(path)
        sidecar["format"] = fmt
        sidecar["started_at"] = (started_at or datetime.now(timezone.utc)).isoformat()
        sidecar["finished_at"] = datetime.now(timezone.utc).isoformat()
        _write_text(sidecar_path, json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
        return sidecar_path
    except OSError:
        logging.error(f"Failed to write output: {path}", exc_info=True)
        raise
