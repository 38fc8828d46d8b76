"""
Bracketing the run time of an adiabatic sweep
=============================================

We interpolate H(t) = s(t) HI + (1 - s(t)) HF from HI = -sigma_x to
HF = -sigma_z with the linear sweep s = 1 - t/T, starting in the ground state
of HI. Along the simulated run we evaluate two certificates:

* a lower one, built from the speed, acceleration and the commutator
  <[HI, HF]>;
* an upper one, built from the final speed and the fluctuations of HI and HF.

The run time T must lie between them. For a qubit the lower certificate
reproduces T itself, because pure qubit states turn the Schrodinger-Robertson
inequality into an equality.
"""

import numpy as np

from qaccel import AdiabaticSpec, SIGMA_X, SIGMA_Z, audit, fidelity_curve

spec = AdiabaticSpec(-SIGMA_X.matrix, -SIGMA_Z.matrix, T=1.0)

print(f"{'T':>6} {'fidelity':>10} {'lower':>12} {'upper':>12} {'min gap':>8}")
for T in (1.0, 5.0, 20.0):
    rep = audit(spec.with_runtime(T))
    print(f"{T:6g} {rep.fidelity:10.6f} {rep.lower.lhs:12.6f} {rep.upper.rhs:12.4f} {rep.min_gap:8.5f}")

# Slow sweeps follow the ground state; sudden ones leave the state behind.
runtimes = [0.01, 0.5, 2.0, 10.0, 50.0, 200.0]
fids = fidelity_curve(spec, runtimes)
print("final ground-state fidelity vs run time")
for T, f in zip(runtimes, fids):
    bar = "#" * int(round(40 * f))
    print(f"  T = {T:7.2f}  {f:.6f}  {bar}")
print(f"sudden limit tends to |<+|0>|^2 = {abs(np.vdot([1, 1], [1, 0])) ** 2 / 2:.2f}")
