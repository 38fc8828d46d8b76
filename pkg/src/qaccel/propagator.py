"""
Integration of ``i hbar d|psi>/dt = H(t)|psi>`` on a uniform time grid.

The default stepper applies ``exp(-i H(t + dt/2) dt / hbar)`` exactly through
an eigendecomposition of the midpoint Hamiltonian: second order in ``dt`` and
unitary to round-off. Classical RK4 is kept as an independent cross-check.
For commuting families the exact solution ``exp(-i/hbar int_0^t H)`` is also
available and serves as the oracle for the steppers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import NORM_TOL, DimensionError, _vec
from .schedules import HamiltonianSchedule

EPS_SPEED = 1e-8
RK4_RENORM_TOL = 1e-12
_CHUNK = 1024

METHODS = ("midpoint", "rk4")
_ALIASES = {"midpoint-exponential": "midpoint", "midpoint": "midpoint", "rk4": "rk4"}


class PropagationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on ``[0, T]`` with ``n_steps`` steps; every ``stride``-th step is sampled."""

    T: float
    n_steps: int = 4096
    stride: int = 1

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T!r}")
        if self.n_steps < 1 or self.stride < 1:
            raise ValueError("n_steps and stride must be positive")
        if self.n_steps % self.stride:
            raise ValueError(f"stride {self.stride} does not divide n_steps {self.n_steps}")

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    @property
    def n_samples(self) -> int:
        return self.n_steps // self.stride + 1

    @property
    def sample_dt(self) -> float:
        return self.T * self.stride / self.n_steps

    def step_time(self, j) -> np.ndarray:
        return self.T * np.asarray(j, dtype=float) / self.n_steps

    def sample_times(self) -> np.ndarray:
        return self.step_time(np.arange(self.n_samples) * self.stride)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled states plus the geometric observables at each sample.

    Arrays are indexed by sample. ``accel`` is the analytic acceleration
    ``2 Cov(H, dH/dt) / (hbar dH)`` where the speed exceeds ``EPS_SPEED`` and
    the finite-difference derivative of the speed series elsewhere;
    ``accel_analytic`` keeps NaN at those zero-speed samples.
    """

    schedule: HamiltonianSchedule
    grid: TimeGrid
    times: np.ndarray
    states: np.ndarray
    hbar: float
    method: str
    delta_h: np.ndarray
    delta_hdot: np.ndarray
    cov: np.ndarray
    comm_abs: np.ndarray
    speed: np.ndarray
    accel_analytic: np.ndarray
    accel: np.ndarray

    @classmethod
    def from_states(cls, schedule, grid, states, *, hbar=1.0, method="") -> "Trajectory":
        times = grid.sample_times()
        states = np.asarray(states, dtype=complex)
        h = np.stack([schedule.evaluate(t) for t in times])
        hd = np.stack([schedule.derivative(t) for t in times])
        obs = sample_moments(states, h, hd)
        delta_h = np.sqrt(obs["var_h"])
        speed = 2.0 * delta_h / hbar
        moving = speed > EPS_SPEED
        accel_analytic = np.full(times.size, np.nan)
        accel_analytic[moving] = 2.0 * obs["cov"][moving] / (hbar * delta_h[moving])
        accel = accel_analytic.copy()
        if not moving.all():
            if times.size >= 3:
                numeric = np.gradient(speed, grid.sample_dt, edge_order=2)
                accel[~moving] = numeric[~moving]
        arrays = dict(times=times, states=states, delta_h=delta_h, delta_hdot=np.sqrt(obs["var_hdot"]),
                      cov=obs["cov"], comm_abs=obs["comm_abs"], speed=speed,
                      accel_analytic=accel_analytic, accel=accel)
        for a in arrays.values():
            a.setflags(write=False)
        return cls(schedule=schedule, grid=grid, hbar=hbar, method=method, **arrays)

    @property
    def initial_state(self) -> np.ndarray:
        return self.states[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self):
        return self.times.size


def sample_moments(states: np.ndarray, h: np.ndarray, hd: np.ndarray) -> dict:
    """Batched variances, covariance and |<[H, Hdot]>| for stacked samples."""
    h_psi = np.einsum("nij,nj->ni", h, states)
    hd_psi = np.einsum("nij,nj->ni", hd, states)
    mean_h = np.einsum("ni,ni->n", states.conj(), h_psi).real
    mean_hd = np.einsum("ni,ni->n", states.conj(), hd_psi).real
    u = h_psi - mean_h[:, None] * states
    v = hd_psi - mean_hd[:, None] * states
    var_h = np.maximum(np.sum(u.conj() * u, axis=1).real, 0.0)
    var_hd = np.maximum(np.sum(v.conj() * v, axis=1).real, 0.0)
    cov = np.sum(u.conj() * v, axis=1).real
    # <[H, Hd]> = <H psi|Hd psi> - <Hd psi|H psi> = 2i Im <H psi|Hd psi>
    comm_abs = 2.0 * np.abs(np.einsum("ni,ni->n", h_psi.conj(), hd_psi).imag)
    return {"mean_h": mean_h, "var_h": var_h, "var_hdot": var_hd, "cov": cov, "comm_abs": comm_abs}


def _initial(schedule: HamiltonianSchedule, psi0) -> np.ndarray:
    psi = np.array(_vec(psi0), dtype=complex)
    if psi.size != schedule.dim:
        raise DimensionError(f"state has dim {psi.size}, schedule has dim {schedule.dim}")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise ValueError("initial state is not normalized")
    return psi


def propagate(schedule: HamiltonianSchedule, psi0, grid: TimeGrid, method: str = "midpoint",
              *, hbar: float = 1.0) -> Trajectory:
    """Integrate the Schrödinger equation over ``grid``.

    Parameters
    ----------
    schedule : HamiltonianSchedule
    psi0 : QuantumState or array_like
        Normalized initial state.
    grid : TimeGrid
    method : {"midpoint", "midpoint-exponential", "rk4"}
    hbar : float

    Returns
    -------
    Trajectory
        States and observables at every ``grid.stride``-th step.
    """
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    try:
        method = _ALIASES[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}") from None
    psi = _initial(schedule, psi0)
    stepper = _midpoint_states if method == "midpoint" else _rk4_states
    states = stepper(schedule, psi, grid, hbar)
    return Trajectory.from_states(schedule, grid, states, hbar=hbar, method=method)


def _midpoint_states(schedule, psi, grid, hbar):
    dt = grid.dt
    out = [psi.copy()]
    for start in range(0, grid.n_steps, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, grid.n_steps))
        h_mid = np.stack([schedule.evaluate(t) for t in grid.step_time(idx + 0.5)])
        bad = ~np.isfinite(h_mid).all(axis=(1, 2))
        if bad.any():
            raise PropagationError(f"non-finite Hamiltonian at step {idx[bad][0]}")
        w, vecs = np.linalg.eigh(h_mid)
        phases = np.exp(-1j * w * (dt / hbar))
        steps = (vecs * phases[:, None, :]) @ vecs.conj().transpose(0, 2, 1)
        for k, j in enumerate(idx):
            psi = steps[k] @ psi
            if (j + 1) % grid.stride == 0:
                out.append(psi.copy())
    return np.array(out)


def _rk4_states(schedule, psi, grid, hbar):
    dt = grid.dt
    c = -1j / hbar
    out = [psi.copy()]
    for j in range(grid.n_steps):
        t = grid.step_time(j)
        h0 = schedule.evaluate(t)
        h1 = schedule.evaluate(t + dt / 2)
        h2 = schedule.evaluate(t + dt)
        k1 = c * (h0 @ psi)
        k2 = c * (h1 @ (psi + dt / 2 * k1))
        k3 = c * (h1 @ (psi + dt / 2 * k2))
        k4 = c * (h2 @ (psi + dt * k3))
        psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(psi).all():
            raise PropagationError(f"non-finite amplitudes after step {j}")
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > RK4_RENORM_TOL:
            psi = psi / norm
        if (j + 1) % grid.stride == 0:
            out.append(psi.copy())
    return np.array(out)


def common_eigenbasis(schedule: HamiltonianSchedule, probes: int = 7) -> np.ndarray:
    """Unitary that diagonalizes every H(t) of a commuting family."""
    rng = np.random.default_rng(0)
    ts = np.linspace(0.0, schedule.T, probes) + schedule.T * rng.uniform(-0.01, 0.01, probes)
    ts = np.clip(ts, 0.0, schedule.T)
    hs = [schedule.evaluate(t) for t in ts]
    generic = sum(c * h for c, h in zip(rng.standard_normal(probes), hs))
    _, vecs = np.linalg.eigh(generic)
    for h in hs:
        d = vecs.conj().T @ h @ vecs
        off = d - np.diag(np.diag(d))
        if np.abs(off).max() > 1e-8 * max(1.0, np.abs(h).max()):
            raise ValueError("schedule is not a commuting family: no common eigenbasis found")
    return vecs


def propagate_commuting_oracle(schedule: HamiltonianSchedule, psi0, grid: TimeGrid,
                               *, hbar: float = 1.0) -> Trajectory:
    """Exact propagation for commuting families up to quadrature error.

    The phase integral is accumulated step by step with Simpson's rule on the
    step endpoints and midpoints, so the error is O(dt^4).
    """
    if not schedule.commuting_family:
        raise ValueError("commuting oracle requires a schedule with commuting_family = True")
    psi = _initial(schedule, psi0)
    vecs = common_eigenbasis(schedule)
    nodes = grid.step_time(np.arange(2 * grid.n_steps + 1) / 2.0)
    energies = np.array([np.einsum("ji,jk,ki->i", vecs.conj(), schedule.evaluate(t), vecs).real
                         for t in nodes])
    per_step = grid.dt / 6.0 * (energies[0:-2:2] + 4 * energies[1::2] + energies[2::2])
    phase = np.vstack([np.zeros(schedule.dim), np.cumsum(per_step, axis=0)])[::grid.stride]
    coeffs = vecs.conj().T @ psi
    states = (np.exp(-1j * phase / hbar) * coeffs) @ vecs.T
    return Trajectory.from_states(schedule, grid, states, hbar=hbar, method="commuting-oracle")


def reference_final_state(schedule: HamiltonianSchedule, psi0, T: float, n_steps: int,
                          *, hbar: float = 1.0) -> np.ndarray:
    """High-accuracy final state: the commuting oracle when licensed, else a fine RK4 run."""
    grid = TimeGrid(T, n_steps, n_steps)
    if schedule.commuting_family:
        return propagate_commuting_oracle(schedule, psi0, grid, hbar=hbar).final_state
    return propagate(schedule, psi0, grid, "rk4", hbar=hbar).final_state


def step_errors(schedule, psi0, T: float, steps, method: str = "midpoint", *, reference=None,
                hbar: float = 1.0) -> np.ndarray:
    """Final-state errors ``||psi_n(T) - psi_ref(T)||`` for each step count in ``steps``."""
    steps = list(steps)
    if reference is None:
        reference = reference_final_state(schedule, psi0, T, 64 * max(steps), hbar=hbar)
    reference = _vec(reference)
    return np.array([np.linalg.norm(propagate(schedule, psi0, TimeGrid(T, n, n), method, hbar=hbar).final_state
                                    - reference) for n in steps])


def convergence_order(schedule, psi0, T: float | None = None, method: str = "midpoint", *,
                      n_base: int = 64, reference=None, hbar: float = 1.0, floor: float = 1e-11) -> float:
    """Observed order of accuracy from runs with ``n_base``, 2x and 4x steps.

    Returns NaN when the coarsest error already sits at the round-off floor
    (e.g. a constant Hamiltonian, which the midpoint stepper solves exactly).
    """
    T = schedule.T if T is None else T
    errs = step_errors(schedule, psi0, T, [n_base, 2 * n_base, 4 * n_base], method,
                       reference=reference, hbar=hbar)
    if errs[0] < floor:
        return float("nan")
    return float(np.log2(errs[0] / errs[2]) / 2.0)

