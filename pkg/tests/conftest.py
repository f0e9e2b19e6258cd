"""Shared test oracles, independent of the implementation paths they check."""

import numpy as np
import pytest

from qdrive import StateVector


def eigh_ground(gamma: float, omega: float) -> np.ndarray:
    """Ground state by direct numpy diagonalization, phase-fixed like the library."""
    h = np.array([[gamma, omega], [omega, -gamma]], dtype=float)
    _, vecs = np.linalg.eigh(h)
    ground = vecs[:, 0]
    if ground[0] < 0:
        ground = -ground
    return ground.astype(complex)


def eigh_pair(gamma: float, omega: float):
    h = np.array([[gamma, omega], [omega, -gamma]], dtype=float)
    vals, vecs = np.linalg.eigh(h)
    return vals, vecs


def rk4_evolve(schedule, n_steps: int, initial: np.ndarray) -> np.ndarray:
    """Independent fixed-step RK4 integration of i dpsi/dt = H(t) psi.

    Applies kicks at their exact instants with the same boundary convention
    as the engine (kick at tau=0 before stepping, at tau=1 after).  Used as
    the reference path for engine cross-checks.
    """
    sy = np.array([[0.0, -1.0j], [1.0j, 0.0]])

    def ham(tau):
        wx, wy, wz = schedule.control(tau)
        return np.array([[wz, wx], [wx, -wz]], dtype=complex) + wy * sy

    def rhs(tau, psi):
        return -1j * schedule.duration * (ham(tau) @ psi)

    def kick_matrix(area):
        return np.array([[np.exp(-1j * area), 0.0], [0.0, np.exp(1j * area)]])

    psi = initial.astype(complex).copy()
    start_kicks = [k for k in schedule.kicks if k.tau == 0.0]
    end_kicks = [k for k in schedule.kicks if k.tau == 1.0]
    interior = [k for k in schedule.kicks if 0.0 < k.tau < 1.0]
    assert not interior, "rk4 oracle only handles boundary kicks"
    for k in start_kicks:
        psi = kick_matrix(k.area) @ psi
    h = 1.0 / n_steps
    for i in range(n_steps):
        tau = i * h
        k1 = rhs(tau, psi)
        k2 = rhs(tau + 0.5 * h, psi + 0.5 * h * k1)
        k3 = rhs(tau + 0.5 * h, psi + 0.5 * h * k2)
        k4 = rhs(tau + h, psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    for k in end_kicks:
        psi = kick_matrix(k.area) @ psi
    return psi / np.linalg.norm(psi)


def as_state(vec: np.ndarray) -> StateVector:
    return StateVector(complex(vec[0]), complex(vec[1]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
