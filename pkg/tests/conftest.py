import numpy as np
import pytest

from qaccel.ensembles import random_hermitian, random_state
from qaccel.schedules import HamiltonianSchedule


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_schedule(rng, dim, T=1.0):
    """Non-commuting polynomial family ``A + t B + t^2 C``."""
    a, b, c = (random_hermitian(rng, dim) for _ in range(3))
    return HamiltonianSchedule(dim, lambda t: a + t * b + t * t * c, lambda t: b + 2 * t * c, T)


def random_rest_schedule(rng, dim, T=1.0):
    """Non-commuting family that starts from a stationary state: ``H(0)`` has ``psi0`` as eigenvector."""
    h0 = random_hermitian(rng, dim)
    b, c = random_hermitian(rng, dim), random_hermitian(rng, dim)
    w, v = np.linalg.eigh(h0)
    sched = HamiltonianSchedule(dim, lambda t: h0 + t * b + np.sin(t) * c, lambda t: b + np.cos(t) * c, T)
    return sched, v[:, 0]


__all__ = ["random_schedule", "random_rest_schedule", "random_state", "random_hermitian"]
