"""Lattice-parameter mapping and unit conversions."""

import math

import numpy as np
import pytest

from qdrive import linear_lz
from qdrive.lattice_map import (
    LatticeParams,
    TwoLevelValidityWarning,
    bloch_period,
    depth_to_coupling,
    gamma_to_quasimomentum,
    natural_time_to_seconds,
    quasimomentum_to_gamma,
    seconds_to_natural_time,
)


def test_depth_to_coupling_quarter_rule():
    assert depth_to_coupling(2.0) == 0.5
    assert depth_to_coupling(0.0) == 0.0
    assert depth_to_coupling(1.0) == 0.25


def test_depth_validity_warning():
    with pytest.warns(TwoLevelValidityWarning):
        assert depth_to_coupling(5.0) == 1.25
    with pytest.warns(TwoLevelValidityWarning):
        depth_to_coupling(8.0)
    # configurable bound
    with pytest.warns(TwoLevelValidityWarning):
        depth_to_coupling(3.0, validity_bound=2.0)
    with pytest.raises(ValueError):
        depth_to_coupling(-1.0)


def test_quasimomentum_mapping():
    assert quasimomentum_to_gamma(0.5) == 0.0
    assert quasimomentum_to_gamma(0.0) == -2.0
    assert quasimomentum_to_gamma(1.0) == 2.0


def test_quasimomentum_round_trip(rng):
    for q in rng.uniform(-0.5, 1.5, size=200):
        gamma = quasimomentum_to_gamma(float(q))
        assert gamma_to_quasimomentum(gamma) == pytest.approx(float(q), abs=1e-14)


def test_linear_ramp_reproduces_sweep():
    # a uniform quasimomentum ramp q(tau) = tau maps onto the linear sweep
    sched = linear_lz(0.5, 7.0)
    for tau in np.linspace(0.0, 1.0, 11):
        assert quasimomentum_to_gamma(float(tau)) == pytest.approx(sched.gamma_of_tau(float(tau)), abs=1e-14)


def test_bloch_period_scaling():
    t1 = bloch_period(0.25)
    t2 = bloch_period(0.5)
    assert t1 == pytest.approx(2.0 * t2, rel=1e-14)
    with pytest.raises(ValueError):
        bloch_period(0.0)


def test_natural_unit_conversions():
    omega_rec = 2.0 * math.pi * 3125.0
    # one natural time unit is ~50.93 microseconds for this recoil frequency
    assert natural_time_to_seconds(1.0, omega_rec) == pytest.approx(50.93e-6, rel=1e-3)
    assert natural_time_to_seconds(5.9, omega_rec) == pytest.approx(300e-6, rel=2e-3)
    # 7.9 natural units is the 400 us band-mapping ramp, within 1%
    assert natural_time_to_seconds(7.9, omega_rec) == pytest.approx(400e-6, rel=1e-2)
    assert seconds_to_natural_time(natural_time_to_seconds(3.3, omega_rec), omega_rec) == pytest.approx(3.3, rel=1e-14)


def test_lattice_params_validation():
    params = LatticeParams(v0=2.0)
    assert params.gamma0 == 2.0
    assert depth_to_coupling(params.v0) == 0.5
    with pytest.raises(ValueError):
        LatticeParams(v0=-1.0)
    with pytest.raises(ValueError):
        LatticeParams(v0=1.0, omega_rec=0.0)
