import csv
import json

import numpy as np
import pytest

import main
from model.errors import EXIT_DOMAIN, EXIT_IO, EXIT_OK, EXIT_USAGE
from model.meanfield import critical_line, first_order_boundary
from model.params import X_TRICRITICAL, Y_TRICRITICAL

SWEEP_HEADER = "x,y,lambda,z,f,gap,entropy,gamma,phase,divergent"
SMALL_SWEEP = ["--x-min", "0", "--x-max", "0.6", "--x-count", "3",
               "--y-min", "1.5", "--y-max", "1.5", "--y-count", "1", "--lambdas", "1"]


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def _read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def test_sweep_csv_smoke(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main.main(["sweep", *SMALL_SWEEP, "--output", str(out)]) == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == SWEEP_HEADER
    rows = _read_csv(out)
    assert [float(r["x"]) for r in rows] == [0.0, 0.3, 0.6]
    # plain Dicke at y = 1.5 is superradiant
    assert rows[0]["phase"] == "Superradiant"
    assert float(rows[0]["z"]) == pytest.approx((1.5 ** 2 - 1.0) ** 0.5, abs=1e-8)
    assert all(r["divergent"] in ("true", "false") for r in rows)
    assert (tmp_path / "sweep.csv.manifest.json").exists()


def test_sweep_threads_do_not_change_output(tmp_path):
    one, four = tmp_path / "one.csv", tmp_path / "four.csv"
    assert main.main(["sweep", *SMALL_SWEEP, "--output", str(one)]) == EXIT_OK
    assert main.main(["sweep", *SMALL_SWEEP, "--threads", "4", "--output", str(four)]) == EXIT_OK
    assert one.read_bytes() == four.read_bytes()


def test_rerun_from_manifest_is_byte_identical(tmp_path):
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    assert main.main(["sweep", *SMALL_SWEEP, "--format", "json", "--output", str(first)]) == EXIT_OK
    sidecar = str(first) + ".manifest.json"
    assert main.main(["sweep", "--config", sidecar, "--output", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("x-count = 2\ny_count = 2\nlambdas = 0.1,10\nquantities = z,phase\n", encoding="utf-8")
    out = tmp_path / "sweep.json"
    assert main.main(["sweep", "--config", str(cfg), "--x-count", "1", "--format", "json",
                      "--output", str(out)]) == EXIT_OK
    document = _read_json(out)
    assert len(document["data"]) == 1 * 2 * 2
    assert document["manifest"]["config"]["x_count"] == 1
    assert "gap" not in document["data"][0]


def test_sweep_json_reports_null_gamma_without_coupling(tmp_path):
    out = tmp_path / "y0.json"
    args = ["sweep", "--x-min", "0.2", "--x-max", "0.2", "--x-count", "1", "--y-min", "0", "--y-max", "0",
            "--y-count", "1", "--lambdas", "1", "--format", "json", "--output", str(out)]
    assert main.main(args) == EXIT_OK
    row = _read_json(out)["data"][0]
    assert row["z"] == 0.0
    assert row["phase"] == "Normal"
    assert row["gamma"] is None


@pytest.mark.parametrize("flags", [
    ["--x-count", "0"],
    ["--x-max", "1.2"],
    ["--quantities", "z,magnetization"],
    ["--lambdas", "-1"],
    ["--threads", "0"],
    ["--x-count", "many"],
])
def test_sweep_invalid_config_exits_with_usage_code(tmp_path, flags):
    out = tmp_path / "bad.csv"
    assert main.main(["sweep", *flags, "--output", str(out)]) == EXIT_USAGE
    assert not out.exists()


def test_missing_output_flag_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main.main(["sweep"])
    assert info.value.code == 2


def test_unwritable_output_exits_with_io_code(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    assert main.main(["sweep", *SMALL_SWEEP, "--output", str(blocker / "out.csv")]) == EXIT_IO


def test_out_of_domain_point_exits_with_domain_code(tmp_path):
    out = tmp_path / "ed.json"
    assert main.main(["ed", "--n-atoms", "2", "--x", "1.5", "--output", str(out)]) == EXIT_DOMAIN


def test_boundary_json(tmp_path):
    out = tmp_path / "boundary.json"
    assert main.main(["boundary", "--x-max", "0.7", "--resolution", "3", "--output", str(out)]) == EXIT_OK
    document = _read_json(out)
    assert document["manifest"]["command"] == "boundary"
    rows = document["data"]
    orders = [r["order"] for r in rows]
    assert orders.count("Tricritical") == 1
    for row in rows:
        if row["order"] == "FirstOrder":
            assert row["z_jump"] > 0.0
            assert row["entropy_superradiant"] != row["entropy_normal"]
        else:
            assert row["z_jump"] == 0.0


def test_scaling_report(tmp_path):
    out = tmp_path / "qtp.json"
    assert main.main(["scaling", "--n-count", "9", "--output", str(out)]) == EXIT_OK
    report = _read_json(out)["data"][0]
    assert report["target"]["order"] == "Tricritical"
    assert set(report["fits"]) == {"order_parameter", "determinant", "gap", "entropy_vs_distance", "entropy_vs_gap"}
    assert report["fits"]["order_parameter"]["exponent"] == pytest.approx(0.25, abs=0.01)
    assert len(report["points"]) == 9


def test_scaling_rejects_first_order_target(tmp_path):
    out = tmp_path / "bad.json"
    assert main.main(["scaling", "--target", "0.6", "--output", str(out)]) == EXIT_USAGE


def test_ed_without_coupling(tmp_path):
    out = tmp_path / "ed.json"
    args = ["ed", "--n-atoms", "2,4", "--omega", "1", "--delta", "1", "--g", "0", "--epsilon", "0",
            "--output", str(out)]
    assert main.main(args) == EXIT_OK
    rows = _read_json(out)["data"]
    assert [r["n_atoms"] for r in rows] == [2, 4]
    for row in rows:
        assert row["ground_energy"] == pytest.approx(-row["n_atoms"] / 2.0, abs=1e-9)
        assert row["n_photon_per_atom"] == pytest.approx(0.0, abs=1e-12)


def test_ed_partial_raw_parameters(tmp_path):
    out = tmp_path / "ed.json"
    assert main.main(["ed", "--n-atoms", "2", "--omega", "1", "--output", str(out)]) == EXIT_USAGE


def test_resonance_csv(tmp_path):
    out = tmp_path / "resonance.csv"
    assert main.main(["resonance", "--lambda-count", "9", "--output", str(out)]) == EXIT_OK
    assert out.read_text(encoding="utf-8").splitlines()[0] == "lambda,entropy,resonance_offset"
    rows = _read_csv(out)
    entropies = [float(r["entropy"]) for r in rows]
    assert entropies.index(max(entropies)) == 4


def test_boundary_places_tricritical_point(tmp_path):
    out = tmp_path / "boundary.csv"
    assert main.main(["boundary", "--x-min", "0.4", "--x-max", "0.5", "--resolution", "2",
                      "--format", "csv", "--output", str(out)]) == EXIT_OK
    rows = _read_csv(out)
    [tricritical] = [r for r in rows if r["order"] == "Tricritical"]
    assert float(tricritical["x_c"]) == pytest.approx(X_TRICRITICAL, abs=1e-9)
    assert float(tricritical["y_c"]) == pytest.approx(Y_TRICRITICAL, abs=1e-9)


def test_scaling_normal_side_beta(tmp_path):
    out = tmp_path / "normal.json"
    args = ["scaling", "--target", "0.3", "--side", "normal", "--n-count", "9", "--output", str(out)]
    assert main.main(args) == EXIT_OK
    report = _read_json(out)["data"][0]
    assert report["fits"]["order_parameter"] is None
    assert report["fits"]["determinant"]["beta"] == pytest.approx(1.0, rel=0.02)


def test_scaling_superradiant_relation_at_large_ratio(tmp_path):
    out = tmp_path / "ratio10.json"
    args = ["scaling", "--target", "0.3", "--side", "superradiant", "--lambda", "10",
            "--n-min", "1e-8", "--n-max", "1e-6", "--n-count", "3", "--output", str(out)]
    assert main.main(args) == EXIT_OK
    points = _read_json(out)["data"][0]["points"]
    assert points[0]["n"] == pytest.approx(1e-8)
    assert abs(points[0]["universal_residual"]) < 0.01


def _boundary_y(x):
    return critical_line(x) if x <= X_TRICRITICAL else first_order_boundary(x).y_c


@pytest.mark.slow
def test_sweep_phase_map_follows_boundary(tmp_path):
    out = tmp_path / "phases.json"
    args = ["sweep", "--x-min", "0", "--x-max", "0.9", "--x-count", "40", "--y-min", "0.5", "--y-max", "2.5",
            "--y-count", "40", "--lambdas", "1", "--quantities", "phase", "--threads", "4",
            "--format", "json", "--output", str(out)]
    assert main.main(args) == EXIT_OK
    rows = _read_json(out)["data"]
    assert len(rows) == 40 * 40
    cell = 2.0 / 39
    boundaries = {x: _boundary_y(x) for x in {r["x"] for r in rows}}
    checked = 0
    for row in rows:
        y_b = boundaries[row["x"]]
        if abs(row["y"] - y_b) <= cell:
            continue
        expected = "Superradiant" if row["y"] > y_b else "Normal"
        assert row["phase"] == expected, row
        checked += 1
    assert checked > 1400


@pytest.mark.parametrize("x", [0.0, 0.2, 0.4])
def test_sweep_gap_closes_on_second_order_line(tmp_path, x):
    out = tmp_path / "line.json"
    y = repr(critical_line(x))
    args = ["sweep", "--x-min", repr(x), "--x-max", repr(x), "--x-count", "1", "--y-min", y, "--y-max", y,
            "--y-count", "1", "--lambdas", "0.1", "--format", "json", "--output", str(out)]
    assert main.main(args) == EXIT_OK
    row = _read_json(out)["data"][0]
    assert row["gap"] < 1e-6


def test_sweep_gap_jumps_across_first_order_line(tmp_path):
    out = tmp_path / "jump.json"
    y_b = first_order_boundary(0.7).y_c
    args = ["sweep", "--x-min", "0.7", "--x-max", "0.7", "--x-count", "1",
            "--y-min", repr(y_b * (1.0 - 1e-6)), "--y-max", repr(y_b * (1.0 + 1e-6)), "--y-count", "2",
            "--lambdas", "0.1", "--format", "json", "--output", str(out)]
    assert main.main(args) == EXIT_OK
    below, above = _read_json(out)["data"]
    assert (below["phase"], above["phase"]) == ("Normal", "Superradiant")
    assert above["z"] > 0.1
    assert abs(above["gap"] - below["gap"]) > 1e-3
    assert np.isfinite([below["gap"], above["gap"]]).all()
