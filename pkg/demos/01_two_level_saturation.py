"""
A driven qubit that accelerates as fast as allowed
==================================================

A qubit starts in |0> and is driven by H(t) = sin(t) sigma_x. Because the
drive is always along the same axis, every instantaneous Hamiltonian commutes
with every other, and the state just rotates about x by the angle
theta(t) = 1 - cos(t).

We propagate it numerically and compare the speed and acceleration of the
state on the projective Hilbert space with their upper limits.
"""

import math

import numpy as np

from qaccel import ScalarSchedule, TimeGrid, make_two_level_drive, propagate
from qaccel.geometry import acceleration_bound_series, qal_time_report

# The horizon ends at pi/2, where the drive stops growing.
T = math.pi / 2
schedule = make_two_level_drive(ScalarSchedule.sine(1.0, 1.0), T)
traj = propagate(schedule, [1, 0], TimeGrid(T, 4096))

# The closed-form state is cos(theta)|0> - i sin(theta)|1>.
theta = 1 - np.cos(traj.times)
exact = np.stack([np.cos(theta), -1j * np.sin(theta)], axis=1)
print(f"max state error vs closed form:   {np.abs(traj.states - exact).max():.2e}")

# The speed is V = 2 dH = 2 |J(t)|, the acceleration is 2 dJ/dt and the
# limit (2/hbar) d(dH/dt) equals exactly that: the bound is saturated.
series = acceleration_bound_series(traj)
print(f"max |a| - limit (should be ~0):  {np.max(series.lhs - series.rhs):.2e}")
for k in range(0, len(traj), 1024):
    print(f"  t = {traj.times[k]:.3f}   V = {traj.speed[k]:.6f}   a = {traj.accel[k]:+.6f}   "
          f"limit = {series.rhs[k]:.6f}")

# Integrating the limit gives the minimal time to reach the final speed.
# For this drive it equals the time actually spent.
rep = qal_time_report(traj)
print(f"minimal acceleration time {rep.lhs:.12f} vs elapsed {rep.rhs:.12f}")
