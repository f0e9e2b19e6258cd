"""Mapping between the dimensionless two-level model and an optical lattice.

The two lowest Bloch bands of a condensate in a shallow lattice reduce, near
the edge of the Brillouin zone, to the two-level model: the lattice depth V0
sets the coupling, the quasimomentum sets the diabatic splitting, and a
constant force drags the quasimomentum across the zone.  This module only
performs the parameter mapping; it never solves band structure.

Units: lattice depth in recoil energies E_rec = hbar^2 pi^2 / (2 M d_L^2),
quasimomentum in units of hbar*k (one full zone spans q/hbar k in [0, 1]),
durations in inverse recoil frequencies 1/omega_rec.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .protocols import GAMMA0

__all__ = [
    "LatticeParams",
    "TwoLevelValidityWarning",
    "DEPTH_VALIDITY_BOUND",
    "depth_to_coupling",
    "quasimomentum_to_gamma",
    "gamma_to_quasimomentum",
    "bloch_period",
    "natural_time_to_seconds",
    "seconds_to_natural_time",
]

# Lattice depths well above a few recoil energies flatten the bands and mix in
# higher momentum components; the two-level reduction degrades there.
DEPTH_VALIDITY_BOUND = 5.0


class TwoLevelValidityWarning(UserWarning):
    """The requested lattice parameters strain the two-level reduction."""


@dataclass(frozen=True)
class LatticeParams:
    """Lattice realization parameters.

    v0 in recoil energies; q in units of hbar*k; gamma0 the dimensionless
    sweep endpoint (2 by convention); d_L the lattice constant in meters
    (informational); omega_rec the recoil angular frequency in rad/s, used
    for conversions to laboratory seconds.
    """

    v0: float
    q: float = 0.0
    gamma0: float = GAMMA0
    d_L: float = 421e-9
    omega_rec: float = 2.0 * math.pi * 3125.0

    def __post_init__(self):
        if self.v0 < 0:
            raise ValueError(f"lattice depth must be non-negative, got {self.v0}")
        if self.omega_rec <= 0:
            raise ValueError(f"omega_rec must be positive, got {self.omega_rec}")


def depth_to_coupling(v0: float, validity_bound: float = DEPTH_VALIDITY_BOUND) -> float:
    """Two-level coupling omega = V0/4 of a lattice of depth V0 (recoil units).

    Emits :class:`TwoLevelValidityWarning` (not an error) for depths at or
    above ``validity_bound``, where the reduction becomes questionable.
    """
    if v0 < 0:
        raise ValueError(f"lattice depth must be non-negative, got {v0}")
    if v0 >= validity_bound:
        warnings.warn(
            f"lattice depth {v0:g} E_rec is at or beyond the two-level validity bound {validity_bound:g}",
            TwoLevelValidityWarning,
            stacklevel=2,
        )
    return v0 / 4.0


def quasimomentum_to_gamma(q: float, gamma0: float = GAMMA0) -> float:
    """Diabatic splitting gamma = 2 gamma0 (q - 1/2), q in units of hbar*k.

    q = 1/2 is the zone-edge anticrossing; q = 0 and q = 1 map to the sweep
    endpoints -gamma0 and +gamma0.
    """
    return 2.0 * gamma0 * (q - 0.5)


def gamma_to_quasimomentum(gamma: float, gamma0: float = GAMMA0) -> float:
    """Inverse of :func:`quasimomentum_to_gamma`."""
    if gamma0 == 0:
        raise ValueError("gamma0 must be nonzero")
    return gamma / (2.0 * gamma0) + 0.5


def bloch_period(force: float, d_L: float = 1.0) -> float:
    """Bloch period 2*pi*hbar/(F*d_L); with dimensionless inputs (hbar = 1)
    this is the natural-unit duration of one full quasimomentum sweep."""
    if force <= 0:
        raise ValueError(f"force must be positive, got {force}")
    if d_L <= 0:
        raise ValueError(f"lattice constant must be positive, got {d_L}")
    return 2.0 * math.pi / (force * d_L)


def natural_time_to_seconds(duration: float, omega_rec: float = 2.0 * math.pi * 3125.0) -> float:
    """Convert a natural-unit duration to seconds: t = duration / omega_rec."""
    if omega_rec <= 0:
        raise ValueError(f"omega_rec must be positive, got {omega_rec}")
    return duration / omega_rec


def seconds_to_natural_time(seconds: float, omega_rec: float = 2.0 * math.pi * 3125.0) -> float:
    """Convert seconds to natural units: duration = t * omega_rec."""
    if omega_rec <= 0:
        raise ValueError(f"omega_rec must be positive, got {omega_rec}")
    return seconds * omega_rec
