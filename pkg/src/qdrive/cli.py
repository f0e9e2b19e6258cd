"""Command-line surface: configuration ingestion, scan orchestration, file emission.

Commands: evolve, scan-duration, scan-eta, scan-dt, min-time, resources, qsl,
lattice.  Every run writes its CSVs plus a ``manifest.json`` recording the
resolved configuration, tool version, and wall time; CSV content is byte
deterministic across reruns.  Options may come from a JSON config file
(``--config``); command-line flags win over file values, and unknown or
family-inappropriate keys are hard errors.

Exit status: 0 on success, 2 on configuration/usage errors, 1 on numerical
failures (a machine-readable error record goes to stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analysis, io, lattice_map
from .engine import IntegratorConfig, evolve, final_fidelity
from .errors import ConfigError, QDriveError
from .protocols import (
    ControlSchedule,
    composite_pulse,
    counterdiabatic_construct,
    linear_lz,
    linear_plus_sin,
    power_law,
    rc_eta,
    roland_cerf,
    superadiabatic_linear,
    superadiabatic_tangent,
    tangent,
)

# protocol family -> (required params, optional params, needs a free duration)
FAMILIES: dict[str, tuple[set[str], set[str], bool]] = {
    "linear": ({"omega"}, set(), True),
    "power-law": ({"alpha", "omega"}, set(), True),
    "linear-plus-sin": ({"delta", "omega"}, set(), True),
    "tangent": ({"omega"}, set(), True),
    "roland-cerf": ({"epsilon", "omega"}, set(), False),
    "rc-eta": ({"eta_sq", "omega"}, set(), True),
    "composite-pulse": ({"omega"}, {"gamma_m"}, False),
    "superadiabatic-linear": ({"omega"}, set(), True),
    "superadiabatic-tangent": ({"omega"}, set(), True),
    "counterdiabatic-linear": ({"omega"}, set(), True),
    "counterdiabatic-tangent": ({"omega"}, set(), True),
}

PROTOCOL_PARAM_KEYS = ("omega", "alpha", "delta", "eta_sq", "epsilon", "gamma_m")

_COMMON_KEYS = {"config", "out", "plot", "jobs", "rel_tol", "max_step", "samples", "command"}
_COMMAND_KEYS: dict[str, set[str]] = {
    "evolve": {"protocol", "duration", *PROTOCOL_PARAM_KEYS},
    "scan-duration": {"protocol", "t_min", "t_max", "t_count", "t_grid", *PROTOCOL_PARAM_KEYS},
    "scan-eta": {"omega", "eta_sq_list", "t_min", "t_max", "t_count", "t_grid", "target"},
    "scan-dt": {"omega", "t_design", "dt_min", "dt_max", "dt_count", "dt_grid", "omega_correction"},
    "min-time": {"protocol", "target", "t_lo", "t_hi", "resolution", "bisect_tol", *PROTOCOL_PARAM_KEYS},
    "resources": {"family", "axis", "t_min", "t_max", "t_count", "t_grid", "t_spacing"},
    "qsl": {"omega", "gamma0", "gamma_m"},
    "lattice": {"depth", "quasimomentum", "gamma", "force", "t_natural", "omega_rec"},
}


def build_schedule(name: str, params: dict[str, float], duration: float | None) -> ControlSchedule:
    """Construct a schedule from a family name and validated parameters."""
    if name not in FAMILIES:
        raise ConfigError(f"unknown protocol {name!r}; choose from {sorted(FAMILIES)}")
    required, optional, needs_t = FAMILIES[name]
    provided = {k: v for k, v in params.items() if v is not None}
    missing = required - provided.keys()
    if missing:
        raise ConfigError(f"protocol {name!r} requires {sorted(missing)}")
    extras = provided.keys() - required - optional
    if extras:
        raise ConfigError(f"protocol {name!r} does not accept {sorted(extras)}")
    if needs_t and duration is None:
        raise ConfigError(f"protocol {name!r} requires a duration (-T)")
    if not needs_t and duration is not None:
        raise ConfigError(f"protocol {name!r} determines its own duration; do not pass -T")
    omega = provided.get("omega")
    if name == "linear":
        return linear_lz(omega, duration)
    if name == "power-law":
        return power_law(provided["alpha"], omega, duration)
    if name == "linear-plus-sin":
        return linear_plus_sin(provided["delta"], omega, duration)
    if name == "tangent":
        return tangent(omega, duration)
    if name == "roland-cerf":
        return roland_cerf(provided["epsilon"], omega)
    if name == "rc-eta":
        return rc_eta(math.sqrt(provided["eta_sq"]), duration, omega)
    if name == "composite-pulse":
        return composite_pulse(omega, provided.get("gamma_m"))
    if name == "superadiabatic-linear":
        return superadiabatic_linear(omega, duration)
    if name == "superadiabatic-tangent":
        return superadiabatic_tangent(omega, duration)
    if name == "counterdiabatic-linear":
        return counterdiabatic_construct(linear_lz(omega, duration))
    return counterdiabatic_construct(tangent(omega, duration))


def family_factory(name: str, params: dict[str, float]):
    """Duration -> schedule callable for scan drivers."""
    return lambda t: build_schedule(name, params, t)


def load_config(path: str | Path) -> dict:
    """Parse a JSON config file into a flat option dict (see config_schema.json)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text() or "{}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    return data


def _validate_keys(command: str, options: dict) -> None:
    allowed = _COMMON_KEYS | _COMMAND_KEYS[command]
    unknown = sorted(set(options) - allowed)
    if unknown:
        raise ConfigError(f"unknown configuration keys for {command!r}: {unknown}")


def _merge_config(args: argparse.Namespace) -> dict:
    """File options merged under command-line options (flags win)."""
    cli_options = {k: v for k, v in vars(args).items() if v is not None and k != "func"}
    file_options = load_config(args.config) if args.config else {}
    if not isinstance(file_options.get("command", args.command), str):
        raise ConfigError("config 'command' must be a string")
    file_command = file_options.pop("command", None)
    if file_command is not None and file_command != args.command:
        raise ConfigError(f"config file is for command {file_command!r}, invoked {args.command!r}")
    merged = {**file_options, **cli_options}
    _validate_keys(args.command, merged)
    return merged


def _integrator(opts: dict, default_samples: int = 201) -> IntegratorConfig:
    return IntegratorConfig(
        rel_tol=float(opts.get("rel_tol", 1e-9)),
        max_step_tau=float(opts.get("max_step", 1e-3)),
        sample_count=int(opts.get("samples", default_samples)),
    )


def _protocol_params(opts: dict) -> dict[str, float]:
    return {k: (float(opts[k]) if opts.get(k) is not None else None) for k in PROTOCOL_PARAM_KEYS if k in opts}


def _duration_grid(opts: dict, prefix: str = "t") -> list[float]:
    grid = opts.get(f"{prefix}_grid")
    if grid is not None:
        values = [float(x) for x in (grid.split(",") if isinstance(grid, str) else grid)]
        if not values:
            raise ConfigError(f"{prefix}_grid is empty")
        return values
    try:
        lo = float(opts[f"{prefix}_min"])
        hi = float(opts[f"{prefix}_max"])
        count = int(opts.get(f"{prefix}_count", 21))
    except KeyError as exc:
        raise ConfigError(f"provide {prefix}_grid or {prefix}_min/{prefix}_max") from exc
    if opts.get("t_spacing", "linear") == "log":
        if lo <= 0:
            raise ConfigError("log spacing requires positive bounds")
        return np.geomspace(lo, hi, count).tolist()
    return np.linspace(lo, hi, count).tolist()


# --- parallel scan helper (fork-based; closures inherit through fork) -------

_WORK = None


def _call_work(item):
    return _WORK(item)


def _parallel_map(func, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    import multiprocessing

    global _WORK
    _WORK = func
    try:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=min(jobs, len(items))) as pool:
            return pool.map(_call_work, items)
    finally:
        _WORK = None


# --- command implementations -------------------------------------------------


def _out_dir(opts: dict) -> Path:
    out = Path(opts.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, opts: dict, outputs: list[str], t_start: float) -> None:
    manifest = {
        "tool": "qdrive",
        "version": __version__,
        "command": command,
        "config": {k: v for k, v in sorted(opts.items()) if k not in ("func", "config")},
        "outputs": outputs,
        "wall_time_s": round(time.monotonic() - t_start, 6),
    }
    io.atomic_write_text(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _cmd_evolve(opts: dict) -> list[str]:
    out = _out_dir(opts)
    schedule = build_schedule(opts["protocol"], _protocol_params(opts), opts.get("duration"))
    traj = evolve(schedule, _integrator(opts))
    io.write_trajectory_csv(out / "trajectory.csv", traj, schedule)
    io.write_schedule_csv(out / "schedule.csv", schedule)
    outputs = ["trajectory.csv", "schedule.csv"]
    if opts.get("plot"):
        from .observables import diabatic_probability_series, fidelity_series
        from .plotting import save_line_plot

        fid = fidelity_series(traj, schedule)
        pdiab = diabatic_probability_series(traj)
        save_line_plot(
            out / "trajectory.svg",
            traj.taus,
            {"fidelity": fid.values, "p_diab": pdiab.values},
            xlabel="tau",
            ylabel="probability",
        )
        outputs.append("trajectory.svg")
    return outputs


def _cmd_scan_duration(opts: dict) -> list[str]:
    out = _out_dir(opts)
    name = opts["protocol"]
    if name in FAMILIES and not FAMILIES[name][2]:
        raise ConfigError(f"protocol {name!r} has a fixed duration and cannot be duration-scanned")
    factory = family_factory(name, _protocol_params(opts))
    grid = _duration_grid(opts)
    cfg = _integrator(opts, default_samples=2)
    jobs = int(opts.get("jobs", 1))
    fids = _parallel_map(lambda t: final_fidelity(factory(float(t)), cfg), grid, jobs)
    records = [
        analysis.ScanRecord("duration", float(t), float(t), f) for t, f in zip(grid, fids)
    ]
    io.write_scan_csv(out / "scan.csv", records)
    outputs = ["scan.csv"]
    if opts.get("plot"):
        from .plotting import save_line_plot

        save_line_plot(
            out / "scan.svg", grid, {"final fidelity": fids}, xlabel="duration T", ylabel="final fidelity"
        )
        outputs.append("scan.svg")
    return outputs


def _cmd_scan_eta(opts: dict) -> list[str]:
    out = _out_dir(opts)
    eta_sq_list = opts["eta_sq_list"]
    if isinstance(eta_sq_list, str):
        eta_sq_list = [float(x) for x in eta_sq_list.split(",")]
    result = analysis.eta_scan(
        eta_sq_list,
        float(opts["omega"]),
        _duration_grid(opts),
        target=float(opts.get("target", 0.9)),
        cfg=_integrator(opts, default_samples=2),
    )
    io.write_scan_csv(out / "eta_surface.csv", result.surface)
    io.write_scan_csv(out / "eta_thresholds.csv", result.thresholds)
    outputs = ["eta_surface.csv", "eta_thresholds.csv"]
    if opts.get("plot"):
        from .plotting import save_line_plot

        by_eta: dict[str, list[float]] = {}
        ts = sorted({r.duration for r in result.surface})
        for eta_sq in eta_sq_list:
            by_eta[f"eta^2={eta_sq:g}"] = [
                r.final_fidelity for r in result.surface if r.parameter == float(eta_sq)
            ]
        save_line_plot(out / "eta_scan.svg", ts, by_eta, xlabel="duration T", ylabel="final fidelity")
        outputs.append("eta_scan.svg")
    return outputs


def _cmd_scan_dt(opts: dict) -> list[str]:
    out = _out_dir(opts)
    grid = _duration_grid(opts, prefix="dt")
    records = analysis.duration_mismatch_scan(
        float(opts["omega"]),
        float(opts["t_design"]),
        grid,
        with_omega_correction=bool(opts.get("omega_correction", True)),
        cfg=_integrator(opts, default_samples=2),
    )
    io.write_scan_csv(out / "scan.csv", records)
    outputs = ["scan.csv"]
    if opts.get("plot"):
        from .plotting import save_line_plot

        save_line_plot(
            out / "scan.svg",
            [r.parameter for r in records],
            {"final fidelity": [r.final_fidelity for r in records]},
            xlabel="dT / T",
            ylabel="final fidelity",
        )
        outputs.append("scan.svg")
    return outputs


def _cmd_min_time(opts: dict) -> list[str]:
    out = _out_dir(opts)
    factory = family_factory(opts["protocol"], _protocol_params(opts))
    target = float(opts["target"])
    t_star = analysis.min_duration_for_fidelity(
        factory,
        target,
        (float(opts.get("t_lo", 0.5)), float(opts.get("t_hi", 20.0))),
        resolution=float(opts.get("resolution", 0.05)),
        bisect_tol=float(opts.get("bisect_tol", 1e-3)),
        cfg=_integrator(opts, default_samples=2),
    )
    io.write_scan_csv(out / "mintime.csv", [analysis.ScanRecord("target", target, t_star, target)])
    print(f"T_{target:g} = {io.fmt(t_star)}")
    return ["mintime.csv"]


def _cmd_resources(opts: dict) -> list[str]:
    out = _out_dir(opts)
    points = analysis.resource_curves(
        opts["family"],
        opts.get("axis", "peak"),
        _duration_grid(opts),
        cfg=_integrator(opts, default_samples=2),
    )
    io.write_resource_csv(out / "resources.csv", points)
    outputs = ["resources.csv"]
    if opts.get("plot"):
        from .plotting import save_line_plot

        save_line_plot(
            out / "resources.svg",
            [p.coupling_axis_value for p in points],
            {points[0].protocol_label: [p.min_duration for p in points]},
            xlabel=f"coupling ({points[0].axis})",
            ylabel="duration T",
            logx=True,
            logy=True,
        )
        outputs.append("resources.svg")
    return outputs


def _cmd_qsl(opts: dict) -> list[str]:
    out = _out_dir(opts)
    omega = float(opts["omega"])
    gamma0 = float(opts.get("gamma0", 2.0))
    gamma_m = opts.get("gamma_m")
    t0 = math.pi / (4.0 * float(gamma_m)) if gamma_m is not None else 0.0
    t_min = analysis.qsl_time(omega, gamma0, t0)
    rows = [
        ("omega", io.fmt(omega)),
        ("gamma0", io.fmt(gamma0)),
        ("t0", io.fmt(t0)),
        ("qsl_time", io.fmt(t_min)),
        ("t_pi", io.fmt(analysis.t_pi(omega))),
    ]
    io.atomic_write_text(out / "qsl.csv", "quantity,value\n" + "\n".join(f"{k},{v}" for k, v in rows) + "\n")
    print(f"qsl_time = {io.fmt(t_min)}")
    return ["qsl.csv"]


def _cmd_lattice(opts: dict) -> list[str]:
    out = _out_dir(opts)
    omega_rec = float(opts.get("omega_rec", 2.0 * math.pi * 3125.0))
    rows: list[tuple[str, str]] = [("omega_rec", io.fmt(omega_rec))]
    if opts.get("depth") is not None:
        rows.append(("coupling_omega", io.fmt(lattice_map.depth_to_coupling(float(opts["depth"])))))
    if opts.get("quasimomentum") is not None:
        rows.append(("gamma", io.fmt(lattice_map.quasimomentum_to_gamma(float(opts["quasimomentum"])))))
    if opts.get("gamma") is not None:
        rows.append(("quasimomentum", io.fmt(lattice_map.gamma_to_quasimomentum(float(opts["gamma"])))))
    if opts.get("force") is not None:
        rows.append(("bloch_period", io.fmt(lattice_map.bloch_period(float(opts["force"])))))
    if opts.get("t_natural") is not None:
        seconds = lattice_map.natural_time_to_seconds(float(opts["t_natural"]), omega_rec)
        rows.append(("t_seconds", io.fmt(seconds)))
    if len(rows) == 1:
        raise ConfigError("lattice: provide at least one of depth/quasimomentum/gamma/force/t_natural")
    io.atomic_write_text(out / "lattice.csv", "quantity,value\n" + "\n".join(f"{k},{v}" for k, v in rows) + "\n")
    for k, v in rows:
        print(f"{k} = {v}")
    return ["lattice.csv"]


_COMMANDS = {
    "evolve": _cmd_evolve,
    "scan-duration": _cmd_scan_duration,
    "scan-eta": _cmd_scan_eta,
    "scan-dt": _cmd_scan_dt,
    "min-time": _cmd_min_time,
    "resources": _cmd_resources,
    "qsl": _cmd_qsl,
    "lattice": _cmd_lattice,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdrive",
        description="Two-level quantum driving protocols: simulation, scans, and resource analysis.",
    )
    parser.add_argument("--version", action="version", version=f"qdrive {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, samples_help: bool = True) -> None:
        p.add_argument("--config", help="JSON config file; command-line flags override its values")
        p.add_argument("--out", help="output directory (default: current directory)")
        p.add_argument("--plot", action="store_true", default=None, help="also emit SVG plots")
        p.add_argument("--jobs", type=int, help="parallel scan workers (default: env QDRIVE_JOBS or 1)")
        p.add_argument("--rel-tol", dest="rel_tol", type=float, help="integrator tolerance")
        p.add_argument("--max-step", dest="max_step", type=float, help="max substep in tau")
        if samples_help:
            p.add_argument("--samples", type=int, help="output samples per trajectory")

    def protocol_args(p: argparse.ArgumentParser, with_duration: bool = True) -> None:
        p.add_argument("--protocol", required=False, help=f"one of {', '.join(sorted(FAMILIES))}")
        p.add_argument("--omega", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--eta-sq", dest="eta_sq", type=float)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--gamma-m", dest="gamma_m", type=float)
        if with_duration:
            p.add_argument("-T", "--duration", type=float)

    def grid_args(p: argparse.ArgumentParser, prefix: str = "t") -> None:
        p.add_argument(f"--{prefix}-min", dest=f"{prefix}_min", type=float)
        p.add_argument(f"--{prefix}-max", dest=f"{prefix}_max", type=float)
        p.add_argument(f"--{prefix}-count", dest=f"{prefix}_count", type=int)
        p.add_argument(f"--{prefix}-grid", dest=f"{prefix}_grid", help="comma-separated values")

    p = sub.add_parser("evolve", help="propagate one protocol and emit the trajectory")
    common(p)
    protocol_args(p)

    p = sub.add_parser("scan-duration", help="final fidelity over a grid of durations")
    common(p)
    protocol_args(p, with_duration=False)
    grid_args(p)

    p = sub.add_parser("scan-eta", help="fidelity surface of the eta-labeled locally adiabatic family")
    common(p)
    p.add_argument("--omega", type=float)
    p.add_argument("--eta-sq", dest="eta_sq_list", help="comma-separated eta^2 values")
    p.add_argument("--target", type=float)
    grid_args(p)

    p = sub.add_parser("scan-dt", help="duration-mismatch robustness of the superadiabatic tangent")
    common(p)
    p.add_argument("--omega", type=float)
    p.add_argument("--t-design", dest="t_design", type=float)
    p.add_argument("--omega-correction", dest="omega_correction", action=argparse.BooleanOptionalAction)
    grid_args(p, prefix="dt")

    p = sub.add_parser("min-time", help="first duration reaching a target fidelity")
    common(p)
    protocol_args(p, with_duration=False)
    p.add_argument("--target", type=float)
    p.add_argument("--t-lo", dest="t_lo", type=float)
    p.add_argument("--t-hi", dest="t_hi", type=float)
    p.add_argument("--resolution", type=float)
    p.add_argument("--bisect-tol", dest="bisect_tol", type=float)

    p = sub.add_parser("resources", help="minimum coupling resource vs duration curves")
    common(p)
    p.add_argument("--family", choices=analysis.RESOURCE_FAMILIES)
    p.add_argument("--axis", choices=analysis.COUPLING_AXES)
    p.add_argument("--t-spacing", dest="t_spacing", choices=["linear", "log"])
    grid_args(p)

    p = sub.add_parser("qsl", help="quantum-speed-limit reference time")
    common(p, samples_help=False)
    p.add_argument("--omega", type=float)
    p.add_argument("--gamma0", type=float)
    p.add_argument("--gamma-m", dest="gamma_m", type=float)

    p = sub.add_parser("lattice", help="two-level <-> optical-lattice parameter mapping")
    common(p, samples_help=False)
    p.add_argument("--depth", type=float)
    p.add_argument("--quasimomentum", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--force", type=float)
    p.add_argument("--t-natural", dest="t_natural", type=float)
    p.add_argument("--omega-rec", dest="omega_rec", type=float)

    return parser


def run(opts: dict) -> int:
    """Execute a validated option dict; returns the exit status."""
    command = opts.get("command")
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    t_start = time.monotonic()
    outputs = _COMMANDS[command]({k: v for k, v in opts.items() if k != "command"})
    _write_manifest(_out_dir(opts), command, opts, outputs, t_start)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _merge_config(args)
        if "jobs" not in opts and os.environ.get("QDRIVE_JOBS"):
            opts["jobs"] = int(os.environ["QDRIVE_JOBS"])
        return run(opts)
    except ConfigError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except QDriveError as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("tau_lo", "tau_hi", "best_fidelity"):
            if getattr(exc, attr, None) is not None:
                record[attr] = getattr(exc, attr)
        json.dump(record, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
