import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from zeno_shuffling import MeasurementSchedule, ParameterError, PhysicalParams
from zeno_shuffling import cli

GOLDEN = Path(__file__).parent / "golden"


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_scales_reference(capsys):
    code, out, _ = run_cli(capsys, "scales", "--delta-t", "0.01")
    record = json.loads(out)
    assert code == 0
    assert record["schema"] == 1
    assert record["tau"] == 0.05
    assert record["tau_zeno"] == pytest.approx(0.1414, abs=1e-4)
    assert record["gamma_prime"] == 0.25
    assert record["regime"] == "Zeno"


@pytest.mark.parametrize("delta_t, label", [("1", "PureAntiZeno"), ("0.1", "ConvexAntiZeno"), ("0.06", "CrossoverZeno")])
def test_scales_regimes(capsys, delta_t, label):
    code, out, _ = run_cli(capsys, "scales", "--delta-t", delta_t)
    assert code == 0 and json.loads(out)["regime"] == label


def test_scales_golden(capsys):
    _, out, _ = run_cli(capsys, "scales", "--delta-t", "0.01")
    assert out == (GOLDEN / "scales_reference.json").read_text()


def test_invalid_width_is_structured_error(capsys):
    code, out, err = run_cli(capsys, "scales", "--sigma0", "0")
    assert code == cli.EXIT_VALIDATION
    assert out == ""
    record = json.loads(err)
    assert record["error"] == "validation" and record["field"] == "sigma0"


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--delta-t", "-1"],
        ["run", "--fit-window", "2,1"],
        ["run", "--outputs", "trace,bogus"],
        ["run", "--delta-t", "0.1", "--total-time", "0.05"],
        ["frobnicate"],
        ["run", "--mass", "abc"],
    ],
)
def test_validation_exit_code(capsys, tmp_path, argv):
    code, _, _ = run_cli(capsys, *argv, "--out", str(tmp_path)) if argv[0] == "run" else run_cli(capsys, *argv)
    assert code == cli.EXIT_VALIDATION


def test_unwritable_output_is_io_error(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run_cli(capsys, "run", "--delta-t", "0.1", "--total-time", "0.2", "--out", str(blocker / "sub"))
    assert code == cli.EXIT_IO
    assert json.loads(err)["error"] == "io"


def test_run_golden(capsys, tmp_path):
    code, out, _ = run_cli(
        capsys, "run", "--delta-t", "0.02", "--total-time", "0.1", "--sample-dt", "0.01", "--out", str(tmp_path)
    )
    assert code == 0
    assert (tmp_path / "trace.csv").read_text() == (GOLDEN / "run_short_trace.csv").read_text()
    assert (tmp_path / "summary.json").read_text() == (GOLDEN / "run_short_summary.json").read_text()
    assert out == (tmp_path / "summary.json").read_text()


def test_run_defaults_fine_measurements(capsys, tmp_path):
    code, _, _ = run_cli(capsys, "run", "--out", str(tmp_path))
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert code == 0
    assert summary["schedule"] == {"delta_t": 0.01, "total_time": 5.0, "sample_dt": 1e-4}
    assert summary["gamma_prime_fit"] == pytest.approx(0.249, abs=0.013)
    assert summary["gamma_prime_est"] == 0.25
    assert summary["regime"] == "Zeno"
    for key in ("gamma_est", "gamma_prime_est", "gamma_prime_fit", "max_abs_delta", "crossing_time", "regime"):
        assert key in summary
    with open(tmp_path / "trace.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "c_unperturbed", "c_perturbed", "envelope", "fit", "delta"]
    assert len(rows) == 1 + 50001


def test_run_coarse_crossing(capsys, tmp_path):
    run_cli(capsys, "run", "--delta-t", "1", "--out", str(tmp_path))
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["crossing_time"] is not None and summary["crossing_time"] <= 2
    assert summary["regime"] == "PureAntiZeno"


def test_run_is_byte_identical(capsys, tmp_path):
    for name in ("a", "b"):
        run_cli(capsys, "run", "--delta-t", "0.1", "--total-time", "1", "--out", str(tmp_path / name))
    for fname in ("trace.csv", "summary.json"):
        assert (tmp_path / "a" / fname).read_bytes() == (tmp_path / "b" / fname).read_bytes()


def test_csv_format(capsys, tmp_path):
    run_cli(capsys, "run", "--delta-t", "0.1", "--total-time", "0.3", "--sample-dt", "0.05", "--out", str(tmp_path))
    raw = (tmp_path / "trace.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    for line in raw.decode("utf-8").splitlines()[1:]:
        for cell in line.split(","):
            assert float(cell) == float(repr(float(cell)))
            assert cell == repr(float(cell))


def test_outputs_subset(capsys, tmp_path):
    run_cli(
        capsys, "run", "--delta-t", "0.1", "--total-time", "0.3", "--outputs", "envelope,delta,summary", "--out", str(tmp_path)
    )
    assert (tmp_path / "trace.csv").read_text().splitlines()[0] == "t,envelope,delta"


def test_summary_only_writes_no_csv(capsys, tmp_path):
    run_cli(capsys, "run", "--delta-t", "0.1", "--total-time", "0.3", "--outputs", "summary", "--out", str(tmp_path))
    assert not (tmp_path / "trace.csv").exists()
    assert (tmp_path / "summary.json").exists()


def test_fit_failure_keeps_trace(capsys, tmp_path, monkeypatch):
    from zeno_shuffling import shuffling

    def broken(*args, **kwargs):
        raise shuffling.FitError("did not converge")

    monkeypatch.setattr(shuffling, "fit_exponential", broken)
    code, _, _ = run_cli(capsys, "run", "--delta-t", "0.1", "--total-time", "0.3", "--out", str(tmp_path))
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert code == 0
    assert summary["gamma_prime_fit"] is None and "did not converge" in summary["fit_error"]
    last = (tmp_path / "trace.csv").read_text().splitlines()[-1].split(",")
    assert last[4] == "nan" and last[5] == "nan"


def test_config_file_with_flag_override(capsys, tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(
        json.dumps(
            {
                "params": {"m": 0.5, "sigma0": 1.0},
                "schedule": {"delta_t": 0.5, "total_time": 2.0},
                "outputs": ["summary"],
            }
        )
    )
    code, out, _ = run_cli(capsys, "scales", "--config", str(config))
    assert code == 0 and json.loads(out)["tau"] == 1.0
    code, out, _ = run_cli(capsys, "scales", "--config", str(config), "--sigma0", "0.5")
    record = json.loads(out)
    assert record["tau"] == 0.25 and record["delta_t"] == 0.5


def test_bad_config_file(capsys, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert run_cli(capsys, "scales", "--config", str(broken))[0] == cli.EXIT_VALIDATION
    assert run_cli(capsys, "scales", "--config", str(tmp_path / "missing.json"))[0] == cli.EXIT_VALIDATION
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"params": {"mass": 1}}))
    assert run_cli(capsys, "scales", "--config", str(unknown))[0] == cli.EXIT_VALIDATION


def test_run_config_invariants():
    schedule = MeasurementSchedule(0.1, total_time=1.0)
    assert cli.RunConfig(schedule=schedule).fit_window == (0.0, 1.0)
    with pytest.raises(ParameterError):
        cli.RunConfig(schedule=schedule, fit_window=(0.0, 2.0))
    with pytest.raises(ParameterError):
        cli.RunConfig(outputs=())


def read_sweep(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_reference_intervals(capsys, tmp_path):
    code, _, _ = run_cli(capsys, "sweep", "--axis", "delta_t", "--values", "1,0.1,0.01", "--out", str(tmp_path))
    rows = read_sweep(tmp_path / "sweep.csv")
    assert code == 0
    assert [float(r["gamma_prime_est"]) for r in rows] == [25.0, 2.5, 0.25]
    deltas = [float(r["max_abs_delta"]) for r in rows]
    assert deltas[0] > deltas[1] > deltas[2]
    assert [r["regime"] for r in rows] == ["PureAntiZeno", "ConvexAntiZeno", "Zeno"]
    assert not list(tmp_path.glob("trace_*.csv"))


def test_sweep_worker_count_is_unobservable(capsys, tmp_path):
    argv = ["sweep", "--values", "0.5,0.2,0.1,0.05", "--total-time", "2", "--traces"]
    run_cli(capsys, *argv, "--out", str(tmp_path / "one"))
    run_cli(capsys, *argv, "--workers", "3", "--out", str(tmp_path / "three"))
    names = sorted(p.name for p in (tmp_path / "one").iterdir())
    assert names == ["sweep.csv", "trace_000.csv", "trace_001.csv", "trace_002.csv", "trace_003.csv"]
    for name in names:
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "three" / name).read_bytes()


def test_sweep_row_error_does_not_abort(capsys, tmp_path):
    code, _, _ = run_cli(
        capsys, "sweep", "--axis", "sigma0", "--values=-0.5,0.25,0.5", "--total-time", "1", "--out", str(tmp_path)
    )
    rows = read_sweep(tmp_path / "sweep.csv")
    assert code == 0 and len(rows) == 3
    assert "sigma0" in rows[0]["error"] and rows[0]["gamma_est"] == ""
    assert rows[1]["error"] == "" and rows[2]["error"] == ""


def test_sweep_overlap_flag_flips(capsys, tmp_path):
    # p_s = 1 here, so the flag flips at p0 = 1/sqrt(2)
    run_cli(capsys, "sweep", "--axis", "p0", "--values", "0.5,0.7,0.71,1", "--total-time", "1", "--out", str(tmp_path))
    flags = [r["overlap_condition"] for r in read_sweep(tmp_path / "sweep.csv")]
    assert flags == ["true", "true", "false", "false"]


def test_sweep_range_spacing():
    assert cli.sweep_values(span="0.01,1,3,log") == pytest.approx((0.01, 0.1, 1.0))
    assert cli.sweep_values(span="0,1,5") == (0.0, 0.25, 0.5, 0.75, 1.0)
    with pytest.raises(ParameterError):
        cli.sweep_values(span="0,1,3,log")
    with pytest.raises(ParameterError):
        cli.sweep_values()


def test_sweep_rejects_non_monotone(capsys, tmp_path):
    code, _, err = run_cli(capsys, "sweep", "--values", "0.1,0.2,0.15", "--out", str(tmp_path))
    assert code == cli.EXIT_VALIDATION and json.loads(err)["field"] == "values"


def test_oracle_check_default(capsys):
    code, out, _ = run_cli(capsys, "oracle-check", "--delta-t", "0.1", "--sample-dt", "0.001")
    report = json.loads(out)
    assert code == 0 and report["passed"]
    assert all(v <= 1e-6 for v in report["max_errors"].values())


def test_oracle_check_moving_packet_phase(capsys):
    code, out, _ = run_cli(capsys, "oracle-check", "--p0", "1", "--delta-t", "0.1", "--sample-dt", "0.001")
    report = json.loads(out)
    assert code == 0
    assert report["max_errors"]["correlation_phase"] <= 1e-5


def test_oracle_check_undersized_grid(capsys):
    code, out, err = run_cli(capsys, "oracle-check", "--delta-t", "0.1", "--domain=-2,2")
    record = json.loads(err)
    assert code == cli.EXIT_VALIDATION and out == ""
    assert record["error"] == "grid_sizing"
    lo, hi = record["suggested_domain"]
    assert lo < -2 and hi > 2


def test_oracle_check_tolerance_failure(capsys, monkeypatch):
    monkeypatch.setitem(cli.ORACLE_TOLERANCES, "correlation", 0.0)
    code, out, _ = run_cli(capsys, "oracle-check", "--delta-t", "0.1", "--sample-dt", "0.01", "--horizon", "0.2")
    report = json.loads(out)
    assert code == cli.EXIT_TOLERANCE
    assert "correlation_complex" in report["failed"] and not report["passed"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "zeno_shuffling", "scales", "--delta-t", "1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["regime"] == "PureAntiZeno"


def test_default_params_match_central_experiment():
    assert PhysicalParams() == PhysicalParams(hbar=1.0, m=0.1, sigma0=0.5, x0=0.0, p0=0.0)
    assert cli.RunConfig().schedule == MeasurementSchedule(0.01, total_time=5.0, sample_dt=1e-4)
