"""Two-level Hamiltonian primitives in dimensionless units.

The system Hamiltonian is

    H = gamma * sigma_z + omega * sigma_x        (hbar = 1)

with ``gamma`` the energy splitting between the diabatic states |0>, |1>
and ``omega >= 0`` the coupling between them.  Energies are expressed in
units of the recoil energy and times in inverse recoil frequencies, so
all quantities here are plain floats.

Conventions
-----------
* |0> = (1, 0) is the diabatic state with the lowest energy at the start
  of a sweep (gamma < 0), |1> = (0, 1) the other one.
* The adiabatic ground state carries energy -sqrt(gamma^2 + omega^2);
  its phase is fixed by making the amplitude on |0> real and >= 0, which
  removes the gauge ambiguity from fidelity time series.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import GapClosedError, NormalizationError

__all__ = [
    "ControlSample",
    "StateVector",
    "AdiabaticPair",
    "BlochVector",
    "adiabatic_eigenstates",
    "ground_state",
    "energy_gap",
    "overlap_fidelity",
    "to_bloch",
]

NORM_TOL = 1e-6


@dataclass(frozen=True)
class ControlSample:
    """Instantaneous control values (gamma, omega), both finite, omega >= 0."""

    gamma: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and math.isfinite(self.omega)):
            raise ValueError(f"control values must be finite, got ({self.gamma}, {self.omega})")
        if self.omega < 0:
            raise ValueError(f"omega must be non-negative, got {self.omega}")


@dataclass(frozen=True)
class StateVector:
    """Two complex amplitudes on the diabatic basis, |c0|^2 + |c1|^2 = 1."""

    c0: complex
    c1: complex

    def norm(self) -> float:
        return math.sqrt(abs(self.c0) ** 2 + abs(self.c1) ** 2)

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.c0 / n, self.c1 / n)

    def as_array(self):
        import numpy as np

        return np.array([self.c0, self.c1], dtype=complex)


@dataclass(frozen=True)
class AdiabaticPair:
    """Instantaneous eigensystem: energies and orthonormal eigenstates."""

    e_ground: float
    e_excited: float
    ground: StateVector
    excited: StateVector

    @property
    def gap(self) -> float:
        return self.e_excited - self.e_ground


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float


def _check_norm(state: StateVector, where: str) -> None:
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise NormalizationError(f"{where}: state norm {state.norm():.9f} deviates from 1 by more than {NORM_TOL}")


def energy_gap(gamma: float, omega: float) -> float:
    """Adiabatic energy gap 2*sqrt(gamma^2 + omega^2)."""
    return 2.0 * math.hypot(gamma, omega)


def adiabatic_eigenstates(sample: ControlSample) -> AdiabaticPair:
    """Diagonalize H = gamma*sigma_z + omega*sigma_x analytically.

    Returns the (ground, excited) pair with energies -r, +r where
    r = sqrt(gamma^2 + omega^2).  Writing the field direction as the
    polar angle theta = atan2(omega, gamma), the eigenvectors are

        ground  = ( sin(theta/2), -cos(theta/2) )
        excited = ( cos(theta/2),  sin(theta/2) )

    so that at (gamma < 0, omega = 0) the ground state is exactly |0>.

    Raises
    ------
    GapClosedError
        If gamma = omega = 0 (degenerate Hamiltonian).
    """
    gamma, omega = sample.gamma, sample.omega
    r = math.hypot(gamma, omega)
    if r == 0.0:
        raise GapClosedError("gap closed: gamma = omega = 0, eigenvectors undefined")
    half = 0.5 * math.atan2(omega, gamma)
    s, c = math.sin(half), math.cos(half)
    ground = StateVector(complex(s), complex(-c))
    excited = StateVector(complex(c), complex(s))
    return AdiabaticPair(e_ground=-r, e_excited=r, ground=ground, excited=excited)


def ground_state(gamma: float, omega: float) -> StateVector:
    """Adiabatic ground state of (gamma, omega); shorthand used throughout."""
    return adiabatic_eigenstates(ControlSample(gamma, omega)).ground


def overlap_fidelity(a: StateVector, b: StateVector) -> float:
    """Squared overlap |<a|b>|^2; symmetric and invariant under global phases.

    Both arguments must be unit vectors to within 1e-6.
    """
    _check_norm(a, "overlap_fidelity(a)")
    _check_norm(b, "overlap_fidelity(b)")
    inner = a.c0.conjugate() * b.c0 + a.c1.conjugate() * b.c1
    f = abs(inner) ** 2
    return min(f, 1.0)


def to_bloch(state: StateVector) -> BlochVector:
    """Pauli expectation values (<sx>, <sy>, <sz>) of a pure state."""
    _check_norm(state, "to_bloch")
    cross = state.c0.conjugate() * state.c1
    return BlochVector(
        x=2.0 * cross.real,
        y=2.0 * cross.imag,
        z=abs(state.c0) ** 2 - abs(state.c1) ** 2,
    )


def rotate_about_z(state: StateVector, angle: float) -> StateVector:
    """Apply exp(-i*angle*sigma_z); the Bloch azimuth advances by 2*angle."""
    return StateVector(
        cmath.exp(-1j * angle) * state.c0,
        cmath.exp(1j * angle) * state.c1,
    )
