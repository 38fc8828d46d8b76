"""
Speed limits and geodesics on the Bloch sphere
==============================================

The Fubini-Study distance between two rays is S0 = 2 arccos |<psi1|psi2>|.
Any evolution needs a path at least that long, and it cannot cover it faster
than its energy spread allows: T >= hbar S0 / (2 <dH>).

A constant sigma_z acting on |+> moves the state along a great circle, so it
realizes both limits with equality. A generic time-dependent Hamiltonian does
not.
"""

import math

import numpy as np

from qaccel import HamiltonianSchedule, SIGMA_Z, TimeGrid, make_constant, propagate
from qaccel.ensembles import random_hermitian, random_state
from qaccel.geometry import fs_geodesic_distance, mt_qsl_report, path_geodesic_report

plus = np.array([1, 1]) / np.sqrt(2)

print("constant sigma_z from |+>")
for T in (0.25, 0.75, math.pi / 2):
    traj = propagate(make_constant(SIGMA_Z, T), plus, TimeGrid(T, 256))
    s0 = fs_geodesic_distance(traj.initial_state, traj.final_state)
    mt = mt_qsl_report(traj)
    print(f"  T = {T:.4f}: geodesic {s0:.6f}, path {path_geodesic_report(traj).lhs:.6f}, "
          f"minimal time {mt.lhs:.6f}")

# Now a random non-commuting family H(t) = A + sin(2t) B + t^2 C on four levels.
rng = np.random.default_rng(3)
a, b, c = (random_hermitian(rng, 4) for _ in range(3))
sched = HamiltonianSchedule(4, lambda t: a + math.sin(2 * t) * b + t * t * c,
                            lambda t: 2 * math.cos(2 * t) * b + 2 * t * c, 1.5)
traj = propagate(sched, random_state(rng, 4), TimeGrid(1.5, 2048))
path = path_geodesic_report(traj)
mt = mt_qsl_report(traj)
print("random four-level drive")
print(f"  path {path.lhs:.6f} >= geodesic {path.rhs:.6f}")
print(f"  minimal time {mt.lhs:.6f} <= elapsed {mt.rhs:.6f}")
