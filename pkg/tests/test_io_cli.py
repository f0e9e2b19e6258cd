"""File formats, round trips, and the command-line surface."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qdrive import IntegratorConfig, evolve, linear_lz, superadiabatic_tangent
from qdrive.analysis import ResourcePoint, ScanRecord, resource_curves
from qdrive.cli import build_schedule, load_config, main
from qdrive.errors import ConfigError
from qdrive.io import (
    read_resource_csv,
    read_scan_csv,
    read_schedule_csv,
    read_series_csv,
    read_trajectory_csv,
    write_resource_csv,
    write_scan_csv,
    write_schedule_csv,
    write_series_csv,
    write_trajectory_csv,
)
from qdrive.observables import fidelity_series


def test_trajectory_csv_round_trip(tmp_path):
    sched = superadiabatic_tangent(0.5, 5.9)
    traj = evolve(sched, IntegratorConfig(sample_count=41))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, traj, sched)
    cols = read_trajectory_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "tau,t,gamma,omega,re_c0,im_c0,re_c1,im_c1,fidelity,p_diab"
    assert cols["tau"][0] == 0.0 and cols["tau"][-1] == 1.0
    np.testing.assert_allclose(cols["t"], cols["tau"] * 5.9, rtol=1e-11)
    np.testing.assert_allclose(cols["re_c0"] ** 2 + cols["im_c0"] ** 2 + cols["re_c1"] ** 2 + cols["im_c1"] ** 2, 1.0, atol=1e-9)
    assert cols["fidelity"].min() > 1.0 - 1e-6


def test_schedule_csv_round_trip(tmp_path):
    sched = superadiabatic_tangent(0.5, 5.9)
    path = tmp_path / "sched.csv"
    write_schedule_csv(path, sched, samples=101)
    cols, kicks = read_schedule_csv(path)
    assert len(cols["tau"]) == 101
    assert cols["gamma"][0] == pytest.approx(-2.0)
    assert [k.tau for k in kicks] == [0.0, 1.0]
    assert kicks[0].area == pytest.approx(-kicks[1].area)


def test_series_csv_round_trip(tmp_path):
    sched = linear_lz(0.5, 5.9)
    traj = evolve(sched, IntegratorConfig(sample_count=21))
    series = fidelity_series(traj, sched)
    path = tmp_path / "series.csv"
    write_series_csv(path, series)
    back = read_series_csv(path)
    assert back.kind is series.kind
    np.testing.assert_allclose(back.values, series.values, rtol=1e-11)


def test_scan_csv_round_trip(tmp_path):
    records = [ScanRecord("alpha", 1.0, 5.0, 0.5), ScanRecord("alpha", 2.0, 5.0, 0.75)]
    path = tmp_path / "scan.csv"
    write_scan_csv(path, records)
    assert path.read_text().splitlines()[0] == "alpha,duration,final_fidelity"
    back = read_scan_csv(path)
    assert back == records


def test_scan_csv_rejects_mixed_parameters(tmp_path):
    with pytest.raises(ValueError):
        write_scan_csv(tmp_path / "x.csv", [ScanRecord("a", 1, 1, 1), ScanRecord("b", 1, 1, 1)])


def test_resource_csv_round_trip(tmp_path):
    points = resource_curves("superadiabatic-tangent", "peak", [2.0, 8.0])
    path = tmp_path / "resources.csv"
    write_resource_csv(path, points)
    back = read_resource_csv(path)
    assert [p.axis for p in back] == ["peak", "peak"]
    assert back[0].coupling_axis_value == pytest.approx(points[0].coupling_axis_value, rel=1e-11)


# --- schedule construction & config validation -------------------------------

def test_build_schedule_rejects_family_mismatch():
    with pytest.raises(ConfigError, match="alpha"):
        build_schedule("rc-eta", {"eta_sq": 0.1, "omega": 0.5, "alpha": 4.0}, 5.0)
    with pytest.raises(ConfigError):
        build_schedule("linear", {"omega": 0.5}, None)  # duration required
    with pytest.raises(ConfigError):
        build_schedule("roland-cerf", {"epsilon": 0.3, "omega": 0.5}, 5.0)  # fixed duration
    with pytest.raises(ConfigError):
        build_schedule("warp", {"omega": 0.5}, 5.0)


def test_load_config_merge_and_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"protocol": "linear", "omega": 0.4, "duration": 3.0}))
    out = tmp_path / "out"
    # flag overrides the file value for omega
    assert main(["evolve", "--config", str(cfg), "--omega", "0.5", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["omega"] == 0.5
    assert manifest["config"]["duration"] == 3.0

    # unknown keys are hard errors listing the offenders
    cfg.write_text(json.dumps({"protocol": "linear", "omega": 0.4, "duration": 3.0, "omegga": 1}))
    assert main(["evolve", "--config", str(cfg), "--out", str(out)]) == 2
    assert "omegga" in capsys.readouterr().err


def test_load_config_empty_file_plus_flags(tmp_path):
    cfg = tmp_path / "empty.json"
    cfg.write_text("")
    out = tmp_path / "out"
    assert main(["qsl", "--config", str(cfg), "--omega", "0.5", "--out", str(out)]) == 0


def test_load_config_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.json")


# --- CLI commands -------------------------------------------------------------

def test_cli_evolve_superadiabatic_unit_fidelity(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(
        ["evolve", "--protocol", "superadiabatic-tangent", "--omega", "0.5", "-T", "5.9", "--out", str(out)]
    )
    assert rc == 0
    cols = read_trajectory_csv(out / "trajectory.csv")
    assert np.all(np.abs(cols["fidelity"] - 1.0) < 1e-6)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "evolve"
    assert "trajectory.csv" in manifest["outputs"]
    assert manifest["version"]


def test_cli_min_time_single_line(tmp_path):
    out = tmp_path / "run"
    rc = main(
        [
            "min-time", "--protocol", "power-law", "--alpha", "4", "--omega", "0.5",
            "--target", "0.9", "--t-lo", "2", "--t-hi", "6", "--out", str(out),
        ]
    )
    assert rc == 0
    records = read_scan_csv(out / "mintime.csv")
    assert len(records) == 1
    assert records[0].duration == pytest.approx(3.125, abs=0.05)


def test_cli_qsl_value(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["qsl", "--omega", "0.5", "--gamma0", "2", "--out", str(out)]) == 0
    assert "2.65163532734" in capsys.readouterr().out
    text = (out / "qsl.csv").read_text()
    assert "qsl_time,2.65163532734" in text
    # finite edge pulses add 2 t0
    assert main(["qsl", "--omega", "0.5", "--gamma0", "2", "--gamma-m", "16", "--out", str(out)]) == 0
    text = (out / "qsl.csv").read_text()
    assert f"t0,{math.pi / 64:.12g}"[:12] in text


def test_cli_scan_duration_deterministic_bytes(tmp_path):
    args = ["scan-duration", "--protocol", "linear", "--omega", "0.5", "--t-min", "2", "--t-max", "4", "--t-count", "5"]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert (out1 / "scan.csv").read_bytes() == (out2 / "scan.csv").read_bytes()


def test_cli_scan_duration_parallel_matches_serial(tmp_path):
    args = ["scan-duration", "--protocol", "tangent", "--omega", "0.5", "--t-min", "2", "--t-max", "4", "--t-count", "6"]
    out1, out2 = tmp_path / "serial", tmp_path / "par"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2), "--jobs", "3"]) == 0
    assert (out1 / "scan.csv").read_bytes() == (out2 / "scan.csv").read_bytes()


def test_cli_rejects_duration_scan_of_fixed_duration_family(tmp_path, capsys):
    rc = main(["scan-duration", "--protocol", "roland-cerf", "--epsilon", "0.3", "--omega", "0.5",
               "--t-min", "1", "--t-max", "2", "--out", str(tmp_path)])
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError"


def test_cli_numerical_failure_exit_code(tmp_path, capsys):
    rc = main(
        [
            "min-time", "--protocol", "linear", "--omega", "0.5", "--target", "0.999",
            "--t-lo", "1", "--t-hi", "2", "--resolution", "0.5", "--out", str(tmp_path),
        ]
    )
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "TargetNotReachedError"
    assert 0.0 < err["best_fidelity"] < 0.999


def test_cli_scan_eta_outputs(tmp_path):
    out = tmp_path / "run"
    rc = main(
        [
            "scan-eta", "--omega", "0.5", "--eta-sq", "0.2,0.249",
            "--t-min", "1", "--t-max", "5", "--t-count", "9", "--out", str(out),
        ]
    )
    assert rc == 0
    surface = read_scan_csv(out / "eta_surface.csv")
    thresholds = read_scan_csv(out / "eta_thresholds.csv")
    assert len(surface) == 18
    assert {r.parameter for r in thresholds} == {0.2, 0.249}


def test_cli_scan_dt_variants(tmp_path):
    out = tmp_path / "run"
    rc = main(
        [
            "scan-dt", "--omega", "0.5", "--t-design", "5.9",
            "--dt-grid", "0,0.5", "--no-omega-correction", "--out", str(out),
        ]
    )
    assert rc == 0
    records = read_scan_csv(out / "scan.csv")
    assert records[0].final_fidelity < 1.0 - 1e-4  # uncorrected variant


def test_cli_resources_command(tmp_path):
    out = tmp_path / "run"
    rc = main(["resources", "--family", "superadiabatic-linear", "--axis", "peak",
               "--t-grid", "4,16", "--out", str(out)])
    assert rc == 0
    points = read_resource_csv(out / "resources.csv")
    assert points[0].coupling_axis_value == pytest.approx(1.0, abs=1e-3)


def test_cli_lattice_command(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["lattice", "--depth", "2", "--quasimomentum", "0", "--t-natural", "5.9", "--out", str(out)]) == 0
    text = (out / "lattice.csv").read_text()
    assert "coupling_omega,0.5" in text
    assert "gamma,-2" in text
    assert main(["lattice", "--out", str(out)]) == 2  # nothing to compute


def test_cli_plot_emission(tmp_path):
    pytest.importorskip("matplotlib")
    out = tmp_path / "run"
    rc = main(["scan-duration", "--protocol", "linear", "--omega", "0.5",
               "--t-grid", "2,3,4", "--plot", "--out", str(out)])
    assert rc == 0
    svg = (out / "scan.svg").read_text()
    assert svg.lstrip().startswith("<?xml")


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "qdrive.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "qdrive" in proc.stdout
