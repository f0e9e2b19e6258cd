"""Fidelity series, diabatic populations, and the closed-form ground-state projection."""

import math

import numpy as np
import pytest

from qdrive import (
    ControlSample,
    GapClosedError,
    IntegratorConfig,
    SeriesKind,
    analytic_pdiab,
    diabatic_probability_series,
    evolve,
    fidelity_series,
    final_state_fidelity,
    linear_lz,
    superadiabatic_tangent,
    tangent,
)
from qdrive.protocols import counterdiabatic_construct

from conftest import eigh_ground


def test_fidelity_starts_at_one_from_auto_initial():
    sched = linear_lz(0.5, 5.9)
    series = fidelity_series(evolve(sched, IntegratorConfig(sample_count=51)), sched)
    assert series.values[0] == pytest.approx(1.0, abs=1e-12)
    assert series.kind is SeriesKind.ADIABATIC_FIDELITY


def test_superadiabatic_follows_designed_trajectory():
    sched = superadiabatic_tangent(0.5, 5.9)
    series = fidelity_series(evolve(sched, IntegratorConfig(sample_count=101)), sched)
    assert series.min() > 1.0 - 1e-6


def test_plain_lz_dips_after_the_crossing():
    sched = linear_lz(0.5, 5.9)
    series = fidelity_series(evolve(sched, IntegratorConfig(sample_count=101)), sched)
    assert series.values[-1] < 0.9
    assert series.min() < 0.9


def test_mismatched_schedule_rejected():
    sched = linear_lz(0.5, 5.9)
    other = linear_lz(0.5, 6.0)
    traj = evolve(sched, IntegratorConfig(sample_count=11))
    with pytest.raises(ValueError):
        fidelity_series(traj, other)


def test_completeness_with_excited_state():
    # |<ground|psi>|^2 + |<excited|psi>|^2 = 1 at every sample
    from qdrive import adiabatic_eigenstates, overlap_fidelity

    sched = tangent(0.5, 4.0)
    traj = evolve(sched, IntegratorConfig(sample_count=41))
    series = fidelity_series(traj, sched)
    for i, tau in enumerate(traj.taus):
        pair = adiabatic_eigenstates(ControlSample(traj.gammas[i], traj.omegas[i]))
        p_exc = overlap_fidelity(pair.excited, traj.state_at(i))
        assert series.values[i] + p_exc == pytest.approx(1.0, abs=1e-10)


def test_diabatic_probability_is_c1_population():
    sched = linear_lz(0.5, 5.9)
    traj = evolve(sched, IntegratorConfig(sample_count=21))
    series = diabatic_probability_series(traj)
    assert series.kind is SeriesKind.DIABATIC_PROBABILITY
    assert np.allclose(series.values, np.abs(traj.c1) ** 2)
    # ground-state start at gamma=-2: the upper diabatic state is barely filled
    assert series.values[0] == pytest.approx(0.0149, abs=5e-5)


def test_analytic_pdiab_reference_points():
    assert analytic_pdiab(ControlSample(0.0, 0.5)) == pytest.approx(0.5, abs=1e-14)
    assert analytic_pdiab(ControlSample(0.0, 3.0)) == pytest.approx(0.5, abs=1e-14)
    # at the sweep end the transferred population is 1 - 0.125/(4.25 + 2 sqrt(4.25))
    literal = 0.125 / (4.25 + 2.0 * math.sqrt(4.25))
    assert analytic_pdiab(ControlSample(2.0, 0.5)) == pytest.approx(1.0 - literal, rel=1e-12)
    assert analytic_pdiab(ControlSample(2.0, 0.5)) == pytest.approx(0.98507, abs=1e-5)
    assert analytic_pdiab(ControlSample(-2.0, 0.5)) == pytest.approx(literal, rel=1e-12)
    # complete-transfer limit
    assert analytic_pdiab(ControlSample(1.0, 1e-12)) == pytest.approx(1.0, abs=1e-12)
    assert analytic_pdiab(ControlSample(-1.0, 1e-12)) == pytest.approx(0.0, abs=1e-12)


def test_analytic_pdiab_matches_ground_state_population(rng):
    for _ in range(200):
        gamma = float(rng.uniform(-4, 4))
        omega = float(rng.uniform(1e-3, 4))
        ref = eigh_ground(gamma, omega)
        assert analytic_pdiab(ControlSample(gamma, omega)) == pytest.approx(abs(ref[1]) ** 2, abs=1e-12)


def test_analytic_pdiab_point_symmetry(rng):
    for _ in range(200):
        gamma = float(rng.uniform(-4, 4))
        omega = float(rng.uniform(1e-3, 4))
        total = analytic_pdiab(ControlSample(gamma, omega)) + analytic_pdiab(ControlSample(-gamma, omega))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_analytic_pdiab_gap_closed():
    with pytest.raises(GapClosedError):
        analytic_pdiab(ControlSample(0.0, 0.0))


def test_counterdiabatic_evolution_tracks_analytic_pdiab():
    cd = counterdiabatic_construct(linear_lz(0.5, 5.9))
    traj = evolve(cd, IntegratorConfig(sample_count=101))
    series = diabatic_probability_series(traj)
    predicted = np.array(
        [analytic_pdiab(ControlSample(g, w)) for g, w in zip(traj.gammas, traj.omegas)]
    )
    assert np.max(np.abs(series.values - predicted)) < 1e-6
    # midway through, the population is shared equally
    mid = np.argmin(np.abs(traj.taus - 0.5))
    assert series.values[mid] == pytest.approx(0.5, abs=1e-6)


def test_superadiabatic_end_population():
    sched = superadiabatic_tangent(0.5, 5.9)
    traj = evolve(sched, IntegratorConfig(sample_count=51))
    series = diabatic_probability_series(traj)
    assert series.values[-1] == pytest.approx(0.98507, abs=1e-5)


def test_final_state_fidelity_matches_series_end():
    sched = superadiabatic_tangent(0.5, 5.9)
    traj = evolve(sched, IntegratorConfig(sample_count=21))
    assert final_state_fidelity(traj, sched) == pytest.approx(1.0, abs=1e-9)
