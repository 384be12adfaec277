"""Command-line front end: ``zeno scales|run|sweep|oracle-check``.

Configuration is a JSON document (``--config``) overridden by flags. Every
output is deterministic; floats are written in shortest round-trip form.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic, oracle
from .params import ParameterError, PhysicalParams, derive_scales
from .shuffling import (
    MeasurementSchedule,
    classify_regime,
    envelope_rate,
    envelope_rate_amp,
    shuffled_correlation,
    shuffled_survival,
    simulate,
)

SCHEMA = 1
EXIT_OK, EXIT_VALIDATION, EXIT_TOLERANCE, EXIT_IO = 0, 1, 2, 3
OUTPUT_KINDS = ("trace", "envelope", "fit", "delta", "summary")
SWEEP_AXES = ("delta_t", "p0", "sigma0")
DEFAULT_DELTA_T = 0.01

ORACLE_TOLERANCES = {
    "correlation": 1e-6,
    "phase": 1e-5,
    "moments": 1e-6,
    "pipeline": 1e-5,
}


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams = field(default_factory=PhysicalParams)
    schedule: MeasurementSchedule = field(default_factory=lambda: MeasurementSchedule(DEFAULT_DELTA_T))
    fit_window: tuple[float, float] | None = None
    outputs: tuple[str, ...] = OUTPUT_KINDS

    def __post_init__(self):
        if self.fit_window is None:
            object.__setattr__(self, "fit_window", (0.0, self.schedule.total_time))
        lo, hi = self.fit_window
        if not (0.0 <= lo < hi <= self.schedule.total_time * (1 + 1e-12)):
            raise ParameterError("fit_window", f"must satisfy 0 <= lo < hi <= total_time, got {self.fit_window}")
        if not self.outputs:
            raise ParameterError("outputs", "at least one output is required")
        unknown = set(self.outputs) - set(OUTPUT_KINDS)
        if unknown:
            raise ParameterError("outputs", f"unknown kinds {sorted(unknown)}")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[float, ...]
    base: RunConfig

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ParameterError("axis", f"must be one of {SWEEP_AXES}")
        if not self.values:
            raise ParameterError("values", "sweep needs at least one value")
        steps = np.diff(self.values)
        if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ParameterError("values", "sweep values must be strictly monotone")

    def configs(self) -> list[RunConfig | ParameterError]:
        """One config per value; invalid combinations are returned as errors."""
        out = []
        for value in self.values:
            try:
                out.append(_with_axis(self.base, self.axis, value))
            except ParameterError as exc:
                out.append(exc)
        return out


def _with_axis(base: RunConfig, axis: str, value: float) -> RunConfig:
    params, schedule = base.params, base.schedule
    if axis == "delta_t":
        schedule = dataclasses.replace(schedule, delta_t=value)
    else:
        params = dataclasses.replace(params, **{axis: value})
    return dataclasses.replace(base, params=params, schedule=schedule)


def sweep_values(text: str | None = None, span: str | None = None) -> tuple[float, ...]:
    """Parse ``--values a,b,c`` or ``--range lo,hi,n[,linear|log]``."""
    if text:
        return tuple(float(v) for v in text.split(","))
    if span:
        parts = span.split(",")
        if len(parts) not in (3, 4):
            raise ParameterError("range", "expected lo,hi,n[,linear|log]")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        scale = parts[3] if len(parts) == 4 else "linear"
        if n < 1:
            raise ParameterError("range", "n must be >= 1")
        if scale == "log":
            if lo <= 0 or hi <= 0:
                raise ParameterError("range", "log spacing needs positive bounds")
            grid = np.geomspace(lo, hi, n)
        elif scale == "linear":
            grid = np.linspace(lo, hi, n)
        else:
            raise ParameterError("range", f"unknown spacing {scale!r}")
        return tuple(float(v) for v in grid)
    raise ParameterError("values", "give --values or --range")


def fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _dump_json(record: dict) -> str:
    return json.dumps(record, indent=2) + "\n"


# ---------------------------------------------------------------- config


def _pair(text: str, name: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ParameterError(name, f"expected lo,hi, got {text!r}")
    return float(parts[0]), float(parts[1])


def load_config(args: argparse.Namespace) -> RunConfig:
    doc = {}
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ParameterError("config", f"cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParameterError("config", f"invalid JSON: {exc}") from exc

    params = dict(doc.get("params", {}))
    schedule = dict(doc.get("schedule", {}))
    for flag, key in (("p0", "p0"), ("sigma0", "sigma0"), ("mass", "m"), ("hbar", "hbar"), ("x0", "x0")):
        value = getattr(args, flag, None)
        if value is not None:
            params[key] = value
    for flag in ("delta_t", "total_time", "sample_dt"):
        value = getattr(args, flag, None)
        if value is not None:
            schedule[flag] = value
    schedule.setdefault("delta_t", DEFAULT_DELTA_T)

    fit_window = doc.get("fit_window")
    if getattr(args, "fit_window", None):
        fit_window = _pair(args.fit_window, "fit_window")
    outputs = doc.get("outputs", list(OUTPUT_KINDS))
    if getattr(args, "outputs", None):
        outputs = args.outputs.split(",")

    try:
        phys = PhysicalParams(**{k: float(v) for k, v in params.items()})
        sched = MeasurementSchedule(**{k: float(v) for k, v in schedule.items()})
    except TypeError as exc:
        raise ParameterError("config", str(exc)) from exc
    return RunConfig(
        params=phys,
        schedule=sched,
        fit_window=tuple(float(v) for v in fit_window) if fit_window is not None else None,
        outputs=tuple(outputs),
    )


# ---------------------------------------------------------------- commands


def scales_record(config: RunConfig) -> dict:
    scales = derive_scales(config.params)
    delta_t = config.schedule.delta_t
    return {
        "schema": SCHEMA,
        "tau": scales.tau,
        "tau_zeno": scales.tau_zeno,
        "tau_inflx": scales.tau_inflx,
        "p_spread": scales.p_spread,
        "e0": scales.e0,
        "mean_h": scales.mean_h,
        "delta_e": scales.delta_e,
        "momentum_ratio": scales.momentum_ratio,
        "delta_t": delta_t,
        "gamma": envelope_rate(scales, delta_t),
        "gamma_prime": envelope_rate_amp(scales, delta_t),
        "regime": classify_regime(scales, delta_t).label.value,
        "overlap_condition": analytic.overlap_condition_ok(config.params),
    }


def run_summary(config: RunConfig) -> tuple[dict, list[str] | None]:
    """Simulate one config; return the JSON summary and the CSV lines (if any)."""
    params, schedule = config.params, config.schedule
    result = simulate(params, schedule, config.fit_window)
    distance = result.markov_distance
    summary = {
        "schema": SCHEMA,
        "params": dataclasses.asdict(params),
        "schedule": dataclasses.asdict(schedule),
        "fit_window": list(config.fit_window),
        "gamma_est": result.envelope_rate,
        "gamma_prime_est": result.envelope_rate_amp,
        "gamma_prime_fit": result.fitted_rate_amp,
        "max_abs_delta": distance.max_abs if distance else None,
        "l2_delta": distance.l2 if distance else None,
        "crossing_time": result.crossing_time,
        "regime": result.regime.label.value,
        "overlap_condition": analytic.overlap_condition_ok(params),
        "fit_error": result.fit_error,
    }

    columns = ["t"]
    if "trace" in config.outputs:
        columns += ["c_unperturbed", "c_perturbed"]
    for kind in ("envelope", "fit", "delta"):
        if kind in config.outputs:
            columns.append(kind)
    if len(columns) == 1:
        return summary, None

    t = result.trace.times
    env = np.exp(-result.envelope_rate_amp * t)
    fit = np.exp(-result.fitted_rate_amp * t) if result.fitted_rate_amp is not None else np.full_like(t, np.nan)
    data = {
        "t": t,
        "c_unperturbed": analytic.correlation_modulus(params, t),
        "c_perturbed": result.trace.modulus,
        "envelope": env,
        "fit": fit,
        "delta": env - fit,
    }
    cols = [data[c].tolist() for c in columns]
    lines = [",".join(columns)]
    lines.extend(",".join(map(repr, row)) for row in zip(*cols))
    return summary, lines


def _write(path: Path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_scales(config: RunConfig, out: Path | None = None) -> int:
    text = _dump_json(scales_record(config))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "scales.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_run(config: RunConfig, out: Path) -> int:
    summary, lines = run_summary(config)
    out.mkdir(parents=True, exist_ok=True)
    if lines is not None:
        _write(out / "trace.csv", "\n".join(lines) + "\n")
    if "summary" in config.outputs:
        _write(out / "summary.json", _dump_json(summary))
    sys.stdout.write(_dump_json(summary))
    return EXIT_OK


SWEEP_COLUMNS = (
    "axis",
    "value",
    "delta_t",
    "p0",
    "sigma0",
    "gamma_est",
    "gamma_prime_est",
    "gamma_prime_fit",
    "max_abs_delta",
    "crossing_time",
    "regime",
    "overlap_condition",
    "error",
)


def _sweep_row(job) -> tuple[dict, list[str] | None]:
    axis, value, config = job
    row = {c: "" for c in SWEEP_COLUMNS}
    row.update(axis=axis, value=fmt(value))
    if isinstance(config, Exception):
        row["error"] = str(config)
        return row, None
    try:
        summary, lines = run_summary(config)
    except (ValueError, RuntimeError) as exc:
        row["error"] = str(exc)
        return row, None
    row.update(
        delta_t=fmt(config.schedule.delta_t),
        p0=fmt(config.params.p0),
        sigma0=fmt(config.params.sigma0),
        gamma_est=fmt(summary["gamma_est"]),
        gamma_prime_est=fmt(summary["gamma_prime_est"]),
        gamma_prime_fit=fmt(summary["gamma_prime_fit"]),
        max_abs_delta=fmt(summary["max_abs_delta"]),
        crossing_time=fmt(summary["crossing_time"]),
        regime=summary["regime"],
        overlap_condition=str(summary["overlap_condition"]).lower(),
        error=summary["fit_error"] or "",
    )
    return row, lines


def run_sweep(spec: SweepSpec, workers: int = 1, keep_traces: bool = False) -> list[tuple[dict, list[str] | None]]:
    """Rows in the order of ``spec.values`` whatever the worker count."""
    base = spec.base if keep_traces else dataclasses.replace(spec.base, outputs=("summary",))
    sweep = dataclasses.replace(spec, base=base)
    jobs = [(spec.axis, v, c) for v, c in zip(spec.values, sweep.configs())]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_row, jobs))
    return [_sweep_row(job) for job in jobs]


def cmd_sweep(spec: SweepSpec, out: Path, workers: int = 1, keep_traces: bool = False) -> int:
    rows = run_sweep(spec, workers, keep_traces)
    out.mkdir(parents=True, exist_ok=True)
    lines = [",".join(SWEEP_COLUMNS)]
    for i, (row, trace) in enumerate(rows):
        lines.append(",".join(_csv_cell(row[c]) for c in SWEEP_COLUMNS))
        if keep_traces and trace is not None:
            _write(out / f"trace_{i:03d}.csv", "\n".join(trace) + "\n")
    _write(out / "sweep.csv", "\n".join(lines) + "\n")
    sys.stdout.write(f"{out / 'sweep.csv'}\n")
    return EXIT_OK


def _csv_cell(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def oracle_report(config: RunConfig, horizon: float, spec: oracle.GridSpec | None = None) -> dict:
    """Largest analytic-vs-grid discrepancies; raises GridSizingError on a bad grid."""
    params, schedule = config.params, config.schedule
    pipe_horizon = max(horizon, schedule.delta_t)
    if spec is None:
        spec = oracle.GridSpec.for_params(params, pipe_horizon)
    oracle.check_grid(spec, params, pipe_horizon)

    times = np.linspace(0.0, horizon, 201)
    grid_c = oracle.correlation_series(params, times, spec)
    exact_c = analytic.correlation_unperturbed(params, times)
    resolved = np.abs(exact_c) > 1e-8
    phase_gap = np.angle(np.exp(1j * (np.angle(grid_c) - analytic.correlation_phase(params, times))))

    psi0 = oracle.init_gaussian(spec, params)
    grid_mean, grid_spread = oracle.energy_moments(psi0)
    mean_h, delta_e = analytic.energy_moments(params)

    pipe_schedule = MeasurementSchedule(schedule.delta_t, pipe_horizon, schedule.sample_dt)
    t_pipe, amp_pipe = oracle.measurement_pipeline(
        params, schedule.delta_t, pipe_horizon, schedule.sample_dt, spec
    )
    pipe_survival = float(np.max(np.abs(np.abs(amp_pipe) ** 2 - shuffled_survival(params, pipe_schedule, t_pipe))))
    pipe_amplitude = float(np.max(np.abs(amp_pipe - shuffled_correlation(params, pipe_schedule, t_pipe))))

    errors = {
        "correlation_modulus": float(np.max(np.abs(np.abs(grid_c) - np.abs(exact_c)))),
        "correlation_complex": float(np.max(np.abs(grid_c - exact_c))),
        "correlation_phase": float(np.max(np.abs(phase_gap[resolved]))) if resolved.any() else 0.0,
        "mean_energy_relative": abs(grid_mean - mean_h) / mean_h,
        "energy_spread_relative": abs(grid_spread - delta_e) / delta_e,
        "pipeline_survival": pipe_survival,
        "pipeline_amplitude": pipe_amplitude,
    }
    limits = {
        "correlation_modulus": ORACLE_TOLERANCES["correlation"],
        "correlation_complex": ORACLE_TOLERANCES["correlation"],
        "correlation_phase": ORACLE_TOLERANCES["phase"],
        "mean_energy_relative": ORACLE_TOLERANCES["moments"],
        "energy_spread_relative": ORACLE_TOLERANCES["moments"],
        "pipeline_survival": ORACLE_TOLERANCES["pipeline"],
        "pipeline_amplitude": ORACLE_TOLERANCES["pipeline"],
    }
    failed = sorted(k for k in errors if not errors[k] <= limits[k])
    return {
        "schema": SCHEMA,
        "params": dataclasses.asdict(params),
        "delta_t": schedule.delta_t,
        "sample_dt": schedule.sample_dt,
        "horizon": horizon,
        "grid": {"x_min": spec.x_min, "x_max": spec.x_max, "n_points": spec.n_points},
        "max_errors": errors,
        "tolerances": limits,
        "failed": failed,
        "passed": not failed,
    }


def cmd_oracle_check(config: RunConfig, horizon: float, spec: oracle.GridSpec | None, out: Path | None) -> int:
    report = oracle_report(config, horizon, spec)
    text = _dump_json(report)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "oracle.json", text)
    sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


# ---------------------------------------------------------------- parser


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--delta-t", type=float, help="interval between measurements")
    p.add_argument("--p0", type=float, help="centroid momentum")
    p.add_argument("--sigma0", type=float, help="initial packet width")
    p.add_argument("--mass", type=float, help="particle mass")
    p.add_argument("--hbar", type=float, help="reduced Planck constant (default 1)")
    p.add_argument("--x0", type=float, help="initial centroid position")
    p.add_argument("--total-time", type=float, help="monitoring horizon")
    p.add_argument("--sample-dt", type=float, help="trace sampling step")
    p.add_argument("--fit-window", help="lo,hi window for the exponential fit")
    p.add_argument("--outputs", help=f"comma list out of {','.join(OUTPUT_KINDS)}")
    p.add_argument("--out", type=Path, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zeno", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scales", help="characteristic times, rates and regime label")
    _add_common(p)

    p = sub.add_parser("run", help="perturbed trace, envelope, fit and Markov distance")
    _add_common(p)

    p = sub.add_parser("sweep", help="one summary row per value of a swept parameter")
    _add_common(p)
    p.add_argument("--axis", choices=SWEEP_AXES, default="delta_t")
    p.add_argument("--values", help="explicit comma list")
    p.add_argument("--range", dest="span", help="lo,hi,n[,linear|log]")
    p.add_argument("--traces", action="store_true", help="also write one trace CSV per value")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("oracle-check", help="compare closed forms against the grid oracle")
    _add_common(p)
    p.add_argument("--horizon", type=float, default=1.0, help="comparison horizon")
    p.add_argument("--n-points", type=int, default=oracle.DEFAULT_POINTS)
    p.add_argument("--domain", help="x_min,x_max, e.g. --domain=-5,5 (default: sized from params and horizon)")
    return parser


def _fail(kind: str, message: str, code: int, **extra) -> int:
    record = {"schema": SCHEMA, "error": kind, "message": message, **extra}
    sys.stderr.write(_dump_json(record))
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which is reserved for tolerance failures
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        config = load_config(args)
        if args.command == "scales":
            return cmd_scales(config, args.out)
        if args.command == "run":
            return cmd_run(config, args.out or Path("zeno_run"))
        if args.command == "sweep":
            values = sweep_values(args.values, args.span)
            spec = SweepSpec(axis=args.axis, values=values, base=config)
            return cmd_sweep(spec, args.out or Path("zeno_sweep"), max(args.workers, 1), args.traces)
        if args.command == "oracle-check":
            grid = None
            if args.domain:
                lo, hi = _pair(args.domain, "domain")
                grid = oracle.GridSpec(lo, hi, args.n_points)
            elif args.n_points != oracle.DEFAULT_POINTS:
                grid = oracle.GridSpec.for_params(
                    config.params, max(args.horizon, config.schedule.delta_t), args.n_points
                )
            return cmd_oracle_check(config, args.horizon, grid, args.out)
    except oracle.GridSizingError as exc:
        extra = {"suggested_domain": list(exc.suggested)} if exc.suggested else {}
        return _fail("grid_sizing", str(exc), EXIT_VALIDATION, **extra)
    except ParameterError as exc:
        return _fail("validation", str(exc), EXIT_VALIDATION, field=exc.field)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)
    except ValueError as exc:
        return _fail("validation", str(exc), EXIT_VALIDATION)
    return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
