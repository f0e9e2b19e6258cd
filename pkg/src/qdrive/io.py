"""CSV emission and parsing for trajectories, schedules, scans, and resource curves.

All files are comma-separated with a header row, ``.`` as the decimal
separator, and numbers printed with 12 significant digits, so identical runs
produce byte-identical files.  Writers are atomic (temp file + rename).

Formats
-------
trajectory : tau,t,gamma,omega,re_c0,im_c0,re_c1,im_c1,fidelity,p_diab
schedule   : tau,gamma,omega,kind   (kind "sweep"; kick rows carry the kick
             area in the gamma column, an empty omega, and kind "kick")
series     : tau,value,kind
scan       : <parameter>,duration,final_fidelity   (the first header names
             the swept parameter)
resource   : axis,axis_value,min_duration,protocol
"""

from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import ResourcePoint, ScanRecord
from .engine import Trajectory
from .observables import ObservableSeries, SeriesKind, diabatic_probability_series, fidelity_series
from .protocols import ControlSchedule, Kick

__all__ = [
    "fmt",
    "atomic_write_text",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_schedule_csv",
    "read_schedule_csv",
    "write_series_csv",
    "read_series_csv",
    "write_scan_csv",
    "read_scan_csv",
    "write_resource_csv",
    "read_resource_csv",
]


def fmt(x: float) -> str:
    """Render a number with 12 significant digits."""
    return f"{x:.12g}"


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write a file via a temporary sibling and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def _rows_to_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


# --- trajectory -------------------------------------------------------------

def write_trajectory_csv(path: str | Path, traj: Trajectory, schedule: ControlSchedule) -> None:
    fid = fidelity_series(traj, schedule)
    pdiab = diabatic_probability_series(traj)
    rows = []
    for i, tau in enumerate(traj.taus):
        rows.append(
            (
                fmt(tau),
                fmt(tau * traj.duration),
                fmt(traj.gammas[i]),
                fmt(traj.omegas[i]),
                fmt(traj.c0[i].real),
                fmt(traj.c0[i].imag),
                fmt(traj.c1[i].real),
                fmt(traj.c1[i].imag),
                fmt(fid.values[i]),
                fmt(pdiab.values[i]),
            )
        )
    header = ("tau", "t", "gamma", "omega", "re_c0", "im_c0", "re_c1", "im_c1", "fidelity", "p_diab")
    atomic_write_text(path, _rows_to_csv(header, rows))


def read_trajectory_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Read a trajectory file back as a dict of named float columns."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols: dict[str, list[float]] = {name: [] for name in header}
        for row in reader:
            for name, cell in zip(header, row):
                cols[name].append(float(cell))
    return {name: np.asarray(vals) for name, vals in cols.items()}


# --- schedule waveform ------------------------------------------------------

def write_schedule_csv(path: str | Path, schedule: ControlSchedule, samples: int = 1001) -> None:
    rows = []
    for i in range(samples):
        tau = i / (samples - 1)
        rows.append((fmt(tau), fmt(schedule.gamma_of_tau(tau)), fmt(schedule.omega_of_tau(tau)), "sweep"))
    for kick in schedule.kicks:
        rows.append((fmt(kick.tau), fmt(kick.area), "", "kick"))
    atomic_write_text(path, _rows_to_csv(("tau", "gamma", "omega", "kind"), rows))


def read_schedule_csv(path: str | Path) -> tuple[dict[str, np.ndarray], list[Kick]]:
    """Read a waveform file: (sweep columns, kick list)."""
    taus, gammas, omegas, kicks = [], [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for tau, gamma, omega, kind in reader:
            if kind == "kick":
                kicks.append(Kick(tau=float(tau), area=float(gamma)))
            else:
                taus.append(float(tau))
                gammas.append(float(gamma))
                omegas.append(float(omega))
    cols = {"tau": np.asarray(taus), "gamma": np.asarray(gammas), "omega": np.asarray(omegas)}
    return cols, kicks


# --- observable series ------------------------------------------------------

def write_series_csv(path: str | Path, series: ObservableSeries) -> None:
    rows = [(fmt(tau), fmt(val), series.kind.value) for tau, val in zip(series.taus, series.values)]
    atomic_write_text(path, _rows_to_csv(("tau", "value", "kind"), rows))


def read_series_csv(path: str | Path) -> ObservableSeries:
    taus, values, kind = [], [], None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for tau, value, k in reader:
            taus.append(float(tau))
            values.append(float(value))
            kind = SeriesKind(k)
    return ObservableSeries(np.asarray(taus), np.asarray(values), kind)


# --- scans ------------------------------------------------------------------

def write_scan_csv(path: str | Path, records: Sequence[ScanRecord]) -> None:
    if not records:
        raise ValueError("cannot write an empty scan")
    names = {r.parameter_name for r in records}
    if len(names) != 1:
        raise ValueError(f"scan mixes parameters {sorted(names)}")
    header = (records[0].parameter_name, "duration", "final_fidelity")
    rows = [(fmt(r.parameter), fmt(r.duration), fmt(r.final_fidelity)) for r in records]
    atomic_write_text(path, _rows_to_csv(header, rows))


def read_scan_csv(path: str | Path) -> list[ScanRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        name = header[0]
        for parameter, duration, fidelity in reader:
            records.append(ScanRecord(name, float(parameter), float(duration), float(fidelity)))
    return records


# --- resource curves --------------------------------------------------------

def write_resource_csv(path: str | Path, points: Sequence[ResourcePoint]) -> None:
    rows = [(p.axis, fmt(p.coupling_axis_value), fmt(p.min_duration), p.protocol_label) for p in points]
    atomic_write_text(path, _rows_to_csv(("axis", "axis_value", "min_duration", "protocol"), rows))


def read_resource_csv(path: str | Path) -> list[ResourcePoint]:
    points = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for axis, value, duration, protocol in reader:
            points.append(ResourcePoint(axis, float(value), float(duration), protocol))
    return points
