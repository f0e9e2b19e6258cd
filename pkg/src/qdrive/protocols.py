"""Control schedules for driving a two-level system across its avoided crossing.

Every factory returns an immutable :class:`ControlSchedule` mapping rescaled
time ``tau = t/T`` in [0, 1] to control values (gamma, omega), together with
a nominal duration ``T`` and an ordered list of instantaneous z-axis kicks.
Sweep families satisfy gamma(0) = -2, gamma(1) = +2 (GAMMA0 = 2) and are
point-symmetric about tau = 0.5:

    gamma(1 - tau) = -gamma(tau),    omega(1 - tau) = omega(tau).

The sweep functions are module-level functions bound with ``functools.partial``
so schedules stay picklable for process-parallel parameter scans.

Families
--------
* ``linear_lz``             constant omega, gamma linear in tau
* ``power_law``             gamma ~ sign(x) * |2x|^alpha, x = tau - 1/2
* ``linear_plus_sin``       linear sweep plus a sinusoidal modulation
* ``tangent``               gamma = omega * tan(2 x * arctan(2/omega))
* ``roland_cerf``           locally adiabatic sweep at constant instantaneous
                            infidelity epsilon^2 (duration fixed by epsilon)
* ``rc_eta``                the same family parameterized by eta with free T
* ``composite_pulse``       time-optimal half-Rabi segment bracketed by
                            impulse kicks of area pi/4
* ``superadiabatic_linear`` transitionless transform of the linear sweep
* ``superadiabatic_tangent``transitionless transform of the tangent sweep
* ``counterdiabatic_construct``  generic transitionless oracle: adds the
                            transverse drive that cancels all nonadiabatic
                            transitions of a base schedule
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import partial
from typing import Callable, Optional

from .core import StateVector, ground_state, rotate_about_z
from .errors import GapClosedError

__all__ = [
    "GAMMA0",
    "Kick",
    "ControlSchedule",
    "linear_lz",
    "power_law",
    "linear_plus_sin",
    "tangent",
    "roland_cerf",
    "rc_eta",
    "eta_opt",
    "rc_duration",
    "composite_pulse",
    "superadiabatic_linear",
    "superadiabatic_tangent",
    "counterdiabatic_construct",
    "with_duration",
]

GAMMA0 = 2.0


@dataclass(frozen=True)
class Kick:
    """Instantaneous z-rotation: the unitary exp(-i * area * sigma_z).

    ``area`` is the integrated pulse area of the gamma impulse; all kicks
    used by the protocol library have |area| <= pi/4.
    """

    tau: float
    area: float
    axis: str = "z"

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"kick tau must lie in [0, 1], got {self.tau}")
        if not abs(self.area) < math.pi:
            raise ValueError(f"kick area must satisfy |area| < pi, got {self.area}")
        if self.axis != "z":
            raise ValueError(f"only z-axis kicks are supported, got {self.axis!r}")


@dataclass(frozen=True)
class ControlSchedule:
    """A pure mapping tau -> (gamma, omega) plus kicks and a nominal duration.

    ``g_of_tau``, when present, is a transverse (sigma_y) drive coefficient;
    it is produced by :func:`counterdiabatic_construct` only.
    ``reference_of_tau``, when present, returns the state the protocol is
    designed to pass through at ``tau`` (used as the fidelity reference for
    the superadiabatic families, whose boundary kicks rotate the evolution
    frame mid-protocol).
    """

    gamma_of_tau: Callable[[float], float]
    omega_of_tau: Callable[[float], float]
    duration: float
    kicks: tuple[Kick, ...] = ()
    label: str = ""
    g_of_tau: Optional[Callable[[float], float]] = None
    reference_of_tau: Optional[Callable[[float], StateVector]] = None

    def control(self, tau: float) -> tuple[float, float, float]:
        """Field components (omega, g, gamma) at rescaled time tau."""
        g = self.g_of_tau(tau) if self.g_of_tau is not None else 0.0
        return (self.omega_of_tau(tau), g, self.gamma_of_tau(tau))

    def target_state(self) -> StateVector:
        """The transfer target: the designed state at tau = 1."""
        if self.reference_of_tau is not None:
            return self.reference_of_tau(1.0)
        return ground_state(self.gamma_of_tau(1.0), self.omega_of_tau(1.0))

    def initial_state(self) -> StateVector:
        """The designed starting state at tau = 0 (before any kick)."""
        if self.reference_of_tau is not None:
            return self.reference_of_tau(0.0)
        return ground_state(self.gamma_of_tau(0.0), self.omega_of_tau(0.0))


def with_duration(schedule: ControlSchedule, duration: float) -> ControlSchedule:
    """Same waveform executed over a different duration (robustness studies)."""
    if duration <= 0:
        raise ValueError(f"executed duration must be positive, got {duration}")
    return replace(schedule, duration=duration)


def _require_positive(**values: float) -> None:
    for name, v in values.items():
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be positive and finite, got {v}")


# ---------------------------------------------------------------------------
# sweep functions (module level, partial-bound, picklable)
# ---------------------------------------------------------------------------

def _const(value: float, tau: float) -> float:
    return value


def _gamma_linear(tau: float) -> float:
    return 4.0 * (tau - 0.5)


def _gamma_power(alpha: float, tau: float) -> float:
    x = tau - 0.5
    if x == 0.0:
        return 0.0
    return math.copysign(2.0 * (2.0 * abs(x)) ** alpha, x)


def _gamma_linear_sin(delta: float, tau: float) -> float:
    return 4.0 * (tau + delta * math.sin(2.0 * math.pi * tau)) - 2.0


def _gamma_tangent(omega: float, tau: float) -> float:
    return omega * math.tan(2.0 * (tau - 0.5) * math.atan(2.0 / omega))


def _gamma_rc_eta(eta_sq: float, tau: float) -> float:
    x = tau - 0.5
    return 4.0 * math.sqrt(1.0 - 4.0 * eta_sq) * x / math.sqrt(1.0 - 16.0 * eta_sq * x * x)


def _gamma_roland_cerf(epsilon: float, omega: float, t_f: float, tau: float) -> float:
    x = tau - 0.5
    a = epsilon * omega * t_f
    return 4.0 * omega * omega * epsilon * t_f * x / math.sqrt(1.0 - 16.0 * a * a * x * x)


def _gamma_composite_ideal(tau: float) -> float:
    if tau == 0.0:
        return -GAMMA0
    if tau == 1.0:
        return GAMMA0
    return 0.0


def _gamma_composite_finite(gamma_m: float, t0_frac: float, tau: float) -> float:
    if tau == 0.0:
        return -GAMMA0
    if tau == 1.0:
        return GAMMA0
    if tau < t0_frac:
        return gamma_m
    if tau > 1.0 - t0_frac:
        return -gamma_m
    return 0.0


# --- superadiabatic transforms ---------------------------------------------
#
# For H = gamma*sigma_z + omega*sigma_x the transitionless auxiliary drive is
# g = (domega/dt * gamma - dgamma/dt * omega) / (2 (gamma^2 + omega^2)) on
# sigma_y.  Rotating the frame about z by chi = arctan(g/omega)/2 absorbs the
# transverse term into modified two-axis controls
#
#     omega' = sqrt(omega^2 + g^2),      gamma' = gamma - dchi/dt,
#
# at the price of impulse z-rotations of area -chi(0) and +chi(1) at the
# edges.  For the linear base sweep gamma = 4x (x = tau - 1/2, constant
# omega) this evaluates to
#
#     gamma'(tau) = 4x - 8x / (T^2 (8x^2 + omega^2/2)^2 + 1)
#     omega'(tau) = omega sqrt(1 + 1 / (T^2 (8x^2 + omega^2/2)^2))
#
# and for the tangent base sweep g is constant, so gamma' = gamma and
# omega' = omega sqrt(1 + arctan(2/omega)^2 / (T omega)^2).
#
# A variant of gamma' with denominator (x^2 + omega^2/2) and numerator 4x
# circulates in print; it is dimensionally inconsistent with the omega'
# line and does not follow the base ground state.  It is kept behind the
# ``as_printed`` flag for comparison studies only.

def _sal_gamma(omega: float, t_design: float, as_printed: bool, tau: float) -> float:
    if tau == 0.0:
        return -GAMMA0
    if tau == 1.0:
        return GAMMA0
    x = tau - 0.5
    if as_printed:
        d = x * x + 0.5 * omega * omega
        return 4.0 * x - 4.0 * x / (t_design * t_design * d * d + 1.0)
    d = 8.0 * x * x + 0.5 * omega * omega
    return 4.0 * x - 8.0 * x / (t_design * t_design * d * d + 1.0)


def _sal_omega(omega: float, t_design: float, tau: float) -> float:
    x = tau - 0.5
    d = 8.0 * x * x + 0.5 * omega * omega
    return omega * math.sqrt(1.0 + 1.0 / (t_design * t_design * d * d))


def _sat_omega_prime(omega: float, t_design: float) -> float:
    a = math.atan(2.0 / omega)
    return omega * math.sqrt(1.0 + (a / (t_design * omega)) ** 2)


def _chi_linear(omega: float, t_design: float, tau: float) -> float:
    # frame angle chi = arctan(g/omega)/2 along the linear base sweep
    x = tau - 0.5
    u = 16.0 * x * x + omega * omega
    return 0.5 * math.atan(-2.0 / (t_design * u))


def _chi_tangent(omega: float, t_design: float, tau: float) -> float:
    a = math.atan(2.0 / omega)
    return 0.5 * math.atan(-a / (t_design * omega))


_CHI = {"linear": _chi_linear, "tangent": _chi_tangent}
_BASE_GAMMA = {"linear": _gamma_linear}


def _superadiabatic_reference(kind: str, omega: float, t_design: float, tau: float) -> StateVector:
    """Designed trajectory: the base ground state, frame-rotated mid-protocol.

    At tau = 0 and tau = 1 the boundary kicks have not fired / have already
    undone the rotation, so the reference is the bare base ground state.
    """
    if kind == "tangent":
        base_gamma = _gamma_tangent(omega, tau)
    else:
        base_gamma = _BASE_GAMMA[kind](tau)
    g = ground_state(base_gamma, omega)
    if tau <= 0.0 or tau >= 1.0:
        return g
    return rotate_about_z(g, -_CHI[kind](omega, t_design, tau))


def _edge_kicks(kind: str, omega: float, t_design: float) -> tuple[Kick, Kick]:
    chi0 = _CHI[kind](omega, t_design, 0.0)
    chi1 = _CHI[kind](omega, t_design, 1.0)
    return (Kick(tau=0.0, area=-chi0), Kick(tau=1.0, area=chi1))


def _cd_coefficient(
    gamma_f: Callable[[float], float],
    omega_f: Callable[[float], float],
    dgamma_dtau: Callable[[float], float],
    domega_dtau: Callable[[float], float],
    duration: float,
    tau: float,
) -> float:
    gamma = gamma_f(tau)
    omega = omega_f(tau)
    u = gamma * gamma + omega * omega
    if u == 0.0:
        raise GapClosedError(f"gap closed at tau={tau}: cannot form counterdiabatic drive")
    dg = dgamma_dtau(tau) / duration
    dw = domega_dtau(tau) / duration
    return (dw * gamma - dg * omega) / (2.0 * u)


def _central_difference(f: Callable[[float], float], step: float, tau: float) -> float:
    lo = max(0.0, tau - step)
    hi = min(1.0, tau + step)
    return (f(hi) - f(lo)) / (hi - lo)


# ---------------------------------------------------------------------------
# factories
# ---------------------------------------------------------------------------

def linear_lz(omega: float, T: float) -> ControlSchedule:
    """Standard Landau-Zener sweep: gamma(tau) = 4(tau - 1/2), omega constant."""
    _require_positive(omega=omega, T=T)
    return ControlSchedule(
        gamma_of_tau=_gamma_linear,
        omega_of_tau=partial(_const, omega),
        duration=T,
        label=f"linear_lz(omega={omega:g}, T={T:g})",
    )


def power_law(alpha: float, omega: float, T: float) -> ControlSchedule:
    """Power-law sweep gamma = sign(x) * 2 |2x|^alpha, x = tau - 1/2.

    alpha = 1 reproduces the linear sweep exactly; larger alpha widens the
    low-speed region around the crossing.  Non-integer alpha >= 1 is allowed.
    """
    if not (math.isfinite(alpha) and alpha >= 1.0):
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    _require_positive(omega=omega, T=T)
    return ControlSchedule(
        gamma_of_tau=partial(_gamma_power, alpha),
        omega_of_tau=partial(_const, omega),
        duration=T,
        label=f"power_law(alpha={alpha:g}, omega={omega:g}, T={T:g})",
    )


def linear_plus_sin(delta: float, omega: float, T: float) -> ControlSchedule:
    """Linear sweep with sinusoidal modulation: gamma = 4[tau + delta sin(2 pi tau)] - 2.

    The crossing speed at tau = 0.5 is 4(1 - 2 pi delta) per unit tau, so for
    delta > 1/(2 pi) the sweep crosses zero three times instead of once.
    """
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta}")
    _require_positive(omega=omega, T=T)
    return ControlSchedule(
        gamma_of_tau=partial(_gamma_linear_sin, delta),
        omega_of_tau=partial(_const, omega),
        duration=T,
        label=f"linear_plus_sin(delta={delta:g}, omega={omega:g}, T={T:g})",
    )


def tangent(omega: float, T: float) -> ControlSchedule:
    """Tangent sweep gamma = omega tan(2(tau - 1/2) arctan(2/omega)).

    Endpoints are exactly +-2; the transitionless transform of this sweep
    leaves gamma unchanged (see :func:`superadiabatic_tangent`).
    """
    _require_positive(omega=omega, T=T)
    return ControlSchedule(
        gamma_of_tau=partial(_gamma_tangent, omega),
        omega_of_tau=partial(_const, omega),
        duration=T,
        label=f"tangent(omega={omega:g}, T={T:g})",
    )


def eta_opt(omega: float) -> float:
    """Optimal eta = 1/sqrt(4 + omega^2) of the locally adiabatic sweep."""
    _require_positive(omega=omega)
    return 1.0 / math.sqrt(4.0 + omega * omega)


def rc_duration(epsilon: float, omega: float) -> float:
    """Locally adiabatic protocol duration T = 1/(epsilon omega sqrt(4 + omega^2))."""
    _require_positive(epsilon=epsilon, omega=omega)
    return 1.0 / (epsilon * omega * math.sqrt(4.0 + omega * omega))


def roland_cerf(epsilon: float, omega: float) -> ControlSchedule:
    """Locally adiabatic (Roland-Cerf) sweep at constant instantaneous infidelity.

    The sweep keeps |<excited|state>|^2 = epsilon^2 along the way, which fixes
    the duration to 1/(epsilon omega sqrt(4 + omega^2)) and the shape to

        gamma(tau) = 4 eps omega^2 T x / sqrt(1 - 16 eps^2 omega^2 T^2 x^2).

    Equivalent to ``rc_eta`` at eta = eta_opt(omega) with the same duration.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    _require_positive(omega=omega)
    t_f = rc_duration(epsilon, omega)
    return ControlSchedule(
        gamma_of_tau=partial(_gamma_roland_cerf, epsilon, omega, t_f),
        omega_of_tau=partial(_const, omega),
        duration=t_f,
        label=f"roland_cerf(epsilon={epsilon:g}, omega={omega:g})",
    )


def rc_eta(eta: float, T: float, omega: float) -> ControlSchedule:
    """Detuned locally adiabatic sweep labeled by eta, duration free.

    gamma(tau) = 4 sqrt(1 - 4 eta^2) x / sqrt(1 - 16 eta^2 x^2) with endpoints
    exactly +-2 for any admissible eta.  Requires 0 < eta^2 < 0.25 strictly;
    the sweep diverges as eta^2 -> 0.25.
    """
    eta_sq = eta * eta
    if not (0.0 < eta_sq < 0.25):
        raise ValueError(f"eta^2 must lie strictly inside (0, 0.25), got eta^2={eta_sq}")
    _require_positive(T=T, omega=omega)
    return ControlSchedule(
        gamma_of_tau=partial(_gamma_rc_eta, eta_sq),
        omega_of_tau=partial(_const, omega),
        duration=T,
        label=f"rc_eta(eta_sq={eta_sq:.6g}, T={T:g}, omega={omega:g})",
    )


def composite_pulse(omega: float, gamma_m: float | None = None) -> ControlSchedule:
    """Time-optimal composite pulse: half Rabi segment bracketed by pi/4 kicks.

    The schedule holds gamma = 0 while the coupling rotates the state through
    the arc connecting the two ground states, preceded and followed by z-axis
    impulses of area +pi/4 and -pi/4.  The total duration is

        T = 2 t0 + arccos(|<fin|ini>|) / omega

    with t0 = 0 for ideal (delta) kicks.  Passing ``gamma_m`` replaces the
    impulses by finite plateaus of height +-gamma_m and length t0 =
    (pi/4)/gamma_m for realism studies (the transfer is then only
    approximately exact).
    """
    _require_positive(omega=omega)
    psi_i = ground_state(-GAMMA0, omega)
    psi_f = ground_state(GAMMA0, omega)
    overlap = abs(psi_i.c0.conjugate() * psi_f.c0 + psi_i.c1.conjugate() * psi_f.c1)
    plateau = math.acos(min(overlap, 1.0)) / omega
    if gamma_m is None:
        return ControlSchedule(
            gamma_of_tau=_gamma_composite_ideal,
            omega_of_tau=partial(_const, omega),
            duration=plateau,
            kicks=(Kick(tau=0.0, area=math.pi / 4.0), Kick(tau=1.0, area=-math.pi / 4.0)),
            label=f"composite_pulse(omega={omega:g}, ideal)",
        )
    _require_positive(gamma_m=gamma_m)
    t0 = math.pi / (4.0 * gamma_m)
    duration = 2.0 * t0 + plateau
    if not t0 < duration / 2.0:
        raise ValueError(f"gamma_m={gamma_m} too small: edge pulse t0={t0:g} does not fit in T/2={duration / 2.0:g}")
    return ControlSchedule(
        gamma_of_tau=partial(_gamma_composite_finite, gamma_m, t0 / duration),
        omega_of_tau=partial(_const, omega),
        duration=duration,
        label=f"composite_pulse(omega={omega:g}, gamma_m={gamma_m:g})",
    )


def superadiabatic_linear(omega: float, T: float, as_printed: bool = False) -> ControlSchedule:
    """Transitionless transform of the linear sweep.

    Evolving under this schedule follows the adiabatic ground state of the
    *base linear* protocol exactly (in the rotated execution frame tracked by
    ``reference_of_tau``), for any duration T.  The boundary kicks implement
    the frame rotation at the edges.  ``as_printed`` selects the
    dimensionally inconsistent gamma' variant discussed in the module notes;
    it does not follow the base ground state and exists for comparison only.
    """
    _require_positive(omega=omega, T=T)
    suffix = ", as_printed" if as_printed else ""
    return ControlSchedule(
        gamma_of_tau=partial(_sal_gamma, omega, T, as_printed),
        omega_of_tau=partial(_sal_omega, omega, T),
        duration=T,
        kicks=_edge_kicks("linear", omega, T),
        label=f"superadiabatic_linear(omega={omega:g}, T={T:g}{suffix})",
        reference_of_tau=partial(_superadiabatic_reference, "linear", omega, T),
    )


def superadiabatic_tangent(omega: float, T: float, with_omega_correction: bool = True) -> ControlSchedule:
    """Transitionless transform of the tangent sweep.

    gamma is the unmodified tangent sweep; the coupling is boosted to the
    constant omega' = omega sqrt(1 + arctan(2/omega)^2 / (T omega)^2) and the
    edges carry the frame-rotation kicks.  With ``with_omega_correction``
    False the coupling stays at the bare omega (kicks and sweep unchanged),
    which is the uncorrected variant used in robustness studies; it no longer
    follows the ground state exactly.
    """
    _require_positive(omega=omega, T=T)
    if with_omega_correction:
        omega_prime = _sat_omega_prime(omega, T)
        return ControlSchedule(
            gamma_of_tau=partial(_gamma_tangent, omega),
            omega_of_tau=partial(_const, omega_prime),
            duration=T,
            kicks=_edge_kicks("tangent", omega, T),
            label=f"superadiabatic_tangent(omega={omega:g}, T={T:g})",
            reference_of_tau=partial(_superadiabatic_reference, "tangent", omega, T),
        )
    return ControlSchedule(
        gamma_of_tau=partial(_gamma_tangent, omega),
        omega_of_tau=partial(_const, omega),
        duration=T,
        kicks=_edge_kicks("tangent", omega, T),
        label=f"superadiabatic_tangent(omega={omega:g}, T={T:g}, uncorrected)",
    )


def counterdiabatic_construct(
    base: ControlSchedule,
    dgamma_dtau: Callable[[float], float] | None = None,
    domega_dtau: Callable[[float], float] | None = None,
    diff_step: float = 1e-6,
) -> ControlSchedule:
    """Add the transverse drive that cancels all nonadiabatic transitions.

    Returns a three-axis schedule H + g * sigma_y with

        g = (domega/dt * gamma - dgamma/dt * omega) / (2 (gamma^2 + omega^2)).

    Evolution under it follows the instantaneous ground state of the base
    schedule exactly, which makes it the oracle for the two-axis
    superadiabatic protocols.  Derivatives default to central differences of
    width ``diff_step`` in tau; pass analytic derivatives where available.

    Raises
    ------
    GapClosedError
        If gamma^2 + omega^2 vanishes anywhere along the base schedule
        (checked on a dense grid).
    """
    n_check = 2001
    for i in range(n_check):
        tau = i / (n_check - 1)
        g_ = base.gamma_of_tau(tau)
        w_ = base.omega_of_tau(tau)
        if g_ * g_ + w_ * w_ == 0.0:
            raise GapClosedError(f"gap closed at tau={tau:g} along base schedule {base.label!r}")
    dg = dgamma_dtau or partial(_central_difference, base.gamma_of_tau, diff_step)
    dw = domega_dtau or partial(_central_difference, base.omega_of_tau, diff_step)
    return ControlSchedule(
        gamma_of_tau=base.gamma_of_tau,
        omega_of_tau=base.omega_of_tau,
        duration=base.duration,
        kicks=base.kicks,
        label=f"counterdiabatic({base.label})",
        g_of_tau=partial(_cd_coefficient, base.gamma_of_tau, base.omega_of_tau, dg, dw, base.duration),
    )
