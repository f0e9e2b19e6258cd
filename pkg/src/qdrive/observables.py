"""Measured quantities along a trajectory: adiabatic fidelity and diabatic population.

Sign convention, fixed here once: the closed-form ground-state projection on
the diabatic basis is evaluated so that P_diab is the population of the
*initially empty* diabatic state.  With gamma sweeping -2 -> +2 and |0> the
low-energy state at the start, that is

    P_diab(gamma, omega) = (omega^2/2) / (gamma^2 + omega^2 - gamma * r),
    r = sqrt(gamma^2 + omega^2),

i.e. the textbook expression with the sign of the gamma * r term flipped,
so P_diab(-2, omega) ~ 0 and P_diab(+2, omega) ~ 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import ControlSample, overlap_fidelity
from .engine import Trajectory
from .errors import GapClosedError
from .protocols import ControlSchedule

__all__ = [
    "SeriesKind",
    "ObservableSeries",
    "fidelity_series",
    "diabatic_probability_series",
    "analytic_pdiab",
    "final_state_fidelity",
]

_CLAMP_TOL = 1e-12


class SeriesKind(enum.Enum):
    ADIABATIC_FIDELITY = "adiabatic_fidelity"
    DIABATIC_PROBABILITY = "diabatic_probability"


@dataclass(frozen=True)
class ObservableSeries:
    taus: np.ndarray
    values: np.ndarray
    kind: SeriesKind

    def max(self) -> float:
        return float(np.max(self.values))

    def min(self) -> float:
        return float(np.min(self.values))


def _clamp_unit(values: np.ndarray, what: str) -> np.ndarray:
    lo, hi = float(np.min(values)), float(np.max(values))
    if lo < -_CLAMP_TOL or hi > 1.0 + _CLAMP_TOL:
        raise ValueError(f"{what} out of [0, 1] beyond rounding tolerance: min={lo}, max={hi}")
    return np.clip(values, 0.0, 1.0)


def fidelity_series(traj: Trajectory, schedule: ControlSchedule) -> ObservableSeries:
    """F(tau) = |<reference(tau)|state(tau)>|^2 at every trajectory sample.

    The reference is the state the protocol is designed to follow: the
    schedule's ``reference_of_tau`` when present (superadiabatic families),
    otherwise the instantaneous adiabatic ground state of (gamma, omega).

    Raises
    ------
    ValueError
        If the trajectory was not produced from ``schedule``.
    """
    if traj.schedule_label != schedule.label or traj.duration != schedule.duration:
        raise ValueError(
            f"trajectory/schedule mismatch: trajectory from {traj.schedule_label!r} "
            f"(T={traj.duration:g}), schedule is {schedule.label!r} (T={schedule.duration:g})"
        )
    values = np.empty(len(traj))
    if schedule.reference_of_tau is not None:
        for i, tau in enumerate(traj.taus):
            ref = schedule.reference_of_tau(float(tau))
            inner = ref.c0.conjugate() * traj.c0[i] + ref.c1.conjugate() * traj.c1[i]
            values[i] = abs(inner) ** 2
    else:
        # vectorized analytic ground state of the sampled controls
        half = 0.5 * np.arctan2(traj.omegas, traj.gammas)
        inner = np.sin(half) * traj.c0 - np.cos(half) * traj.c1
        values = np.abs(inner) ** 2
    return ObservableSeries(traj.taus.copy(), _clamp_unit(values, "fidelity"), SeriesKind.ADIABATIC_FIDELITY)


def diabatic_probability_series(traj: Trajectory) -> ObservableSeries:
    """P_diab(tau) = |<1|state(tau)>|^2 = |c1|^2."""
    values = np.abs(traj.c1) ** 2
    return ObservableSeries(traj.taus.copy(), _clamp_unit(values, "diabatic probability"), SeriesKind.DIABATIC_PROBABILITY)


def analytic_pdiab(sample: ControlSample) -> float:
    """Closed-form ground-state population of the initially empty diabatic state.

    Equals |<1|ground(gamma, omega)>|^2 under the sweep convention documented
    in the module docstring: ~0 at gamma = -2, exactly 0.5 at gamma = 0, ~1
    at gamma = +2.
    """
    gamma, omega = sample.gamma, sample.omega
    r = math.hypot(gamma, omega)
    if r == 0.0:
        raise GapClosedError("gap closed: P_diab undefined at gamma = omega = 0")
    if gamma >= 0.0:
        value = 0.5 * (r + gamma) / r
    else:
        # algebraically identical, avoids cancellation of r + gamma for gamma < 0
        value = 0.5 * omega * omega / (r * (r - gamma))
    return min(max(value, 0.0), 1.0)


def final_state_fidelity(traj: Trajectory, schedule: ControlSchedule) -> float:
    """Fidelity of the last trajectory sample with the schedule's transfer target."""
    return overlap_fidelity(schedule.target_state(), traj.final_state())
