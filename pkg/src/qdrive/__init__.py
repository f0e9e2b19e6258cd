"""Driving protocols for a two-level quantum system.

Simulation and analysis of state transfer across an avoided crossing:
generalized Landau-Zener sweeps, locally adiabatic and superadiabatic
(transitionless) protocols, quantum-speed-limit reference values, and the
mapping onto the optical-lattice realization.  All quantities are
dimensionless (energies in recoil units, hbar = 1).
"""

from .core import (
    AdiabaticPair,
    BlochVector,
    ControlSample,
    StateVector,
    adiabatic_eigenstates,
    energy_gap,
    ground_state,
    overlap_fidelity,
    to_bloch,
)
from .engine import IntegratorConfig, Trajectory, apply_kick, evolve, final_fidelity
from .errors import (
    ConfigError,
    FeasibilityError,
    GapClosedError,
    IntegrationError,
    NormalizationError,
    QDriveError,
    TargetNotReachedError,
)
from .observables import (
    ObservableSeries,
    SeriesKind,
    analytic_pdiab,
    diabatic_probability_series,
    fidelity_series,
    final_state_fidelity,
)
from .protocols import (
    GAMMA0,
    ControlSchedule,
    Kick,
    composite_pulse,
    counterdiabatic_construct,
    eta_opt,
    linear_lz,
    linear_plus_sin,
    power_law,
    rc_duration,
    rc_eta,
    roland_cerf,
    superadiabatic_linear,
    superadiabatic_tangent,
    tangent,
    with_duration,
)

__version__ = "0.1.0"
