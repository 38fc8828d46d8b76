"""
Run-time certificates for adiabatic interpolation ``H = s HI + (1 - s) HF``.

A sweep is run first, and the certificates are then evaluated along the
trajectory it produced. They are a posteriori consistency checks on ``T``,
not schedule predictions. All averages are taken in the evolved state
``|psi(t)>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bounds import BoundReport
from .geometry import EPS_SPEED, integrate_samples
from .operators import HermitianOperator, _mat, commutator
from .propagator import TimeGrid, Trajectory, propagate
from .schedules import HamiltonianSchedule, ScalarSchedule, ScheduleError, make_adiabatic

GAP_TOL = 1e-10
EPS_RADICAND = 1e-14


class DegenerateGroundStateError(ValueError):
    def __init__(self, gap: float):
        super().__init__(f"ground space is degenerate (gap {gap:.3e} < {GAP_TOL:g})")
        self.gap = gap


def ground_state(H) -> tuple[np.ndarray, float]:
    """Lowest eigenvector (largest-magnitude amplitude made real positive) and the gap ``E1 - E0``."""
    w, v = np.linalg.eigh(_mat(H))
    gap = float(w[1] - w[0]) if w.size > 1 else math.inf
    if gap < GAP_TOL:
        raise DegenerateGroundStateError(gap)
    vec = v[:, 0]
    k = np.argmax(np.abs(vec))
    vec = vec * (abs(vec[k]) / vec[k])
    vec[k] = vec[k].real
    return vec, gap


def ground_space_fidelity(H, state, tol: float = GAP_TOL) -> float:
    """Weight of ``state`` in the lowest eigenspace of ``H`` (degenerate spaces allowed)."""
    w, v = np.linalg.eigh(_mat(H))
    low = v[:, w <= w[0] + tol]
    return float(np.sum(np.abs(low.conj().T @ np.asarray(state)) ** 2))


@dataclass(frozen=True)
class AdiabaticSpec:
    """Interpolation from ``HI`` to ``HF`` over run time ``T``.

    ``profile`` is the sweep as a function of the normalized time
    ``u = t/T`` with ``profile(0) = 1`` and ``profile(1) = 0``; ``None``
    selects the linear sweep ``s(t) = 1 - t/T``. The initial state is the
    ground state of ``HI``, which must be non-degenerate.
    """

    HI: np.ndarray
    HF: np.ndarray
    T: float
    profile: ScalarSchedule | None = None
    _ground: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        hi = HermitianOperator(_mat(self.HI)).matrix
        hf = HermitianOperator(_mat(self.HF)).matrix
        if hi.shape != hf.shape:
            raise ValueError(f"HI {hi.shape} and HF {hf.shape} differ in shape")
        if not self.T > 0:
            raise ValueError(f"run time T must be positive, got {self.T!r}")
        if self.profile is not None:
            p0, p1 = self.profile(0.0), self.profile(1.0)
            if abs(p0 - 1.0) > 1e-12 or abs(p1) > 1e-12:
                raise ScheduleError(f"sweep profile must satisfy s(0) = 1, s(T) = 0; got {p0!r}, {p1!r}")
        object.__setattr__(self, "HI", hi)
        object.__setattr__(self, "HF", hf)
        object.__setattr__(self, "_ground", ground_state(hi))

    @property
    def linear(self) -> bool:
        return self.profile is None

    @property
    def dim(self) -> int:
        return self.HI.shape[0]

    def sweep(self) -> ScalarSchedule | None:
        if self.profile is None:
            return None
        p, T = self.profile, self.T
        return ScalarSchedule(lambda t: p(t / T), lambda t: p.derivative(t / T) / T, f"profile({p.tag}) T={T:g}")

    def schedule(self) -> HamiltonianSchedule:
        return make_adiabatic(self.HI, self.HF, self.T, self.sweep())

    def initial_state(self) -> np.ndarray:
        return self._ground[0]

    def with_runtime(self, T: float) -> "AdiabaticSpec":
        return replace(self, T=T)

    def sweep_rate(self, t) -> np.ndarray:
        """``ds/dt`` at the given times."""
        t = np.asarray(t, dtype=float)
        if self.profile is None:
            return np.full(t.shape, -1.0 / self.T)
        return np.vectorize(self.profile.derivative)(t / self.T) / self.T


def default_steps(T: float, per_unit_time: int = 1024, minimum: int = 8192) -> int:
    """Power-of-two step count with at least ``per_unit_time`` steps per unit of ``T``.

    The upper certificate divides by the final speed, which is small for slow
    sweeps, so audits need a finer grid than the state fidelity alone would.
    """
    n = max(minimum, int(math.ceil(per_unit_time * T)))
    return 1 << (n - 1).bit_length()


def simulate(spec: AdiabaticSpec, n_steps: int | None = None, stride: int = 1, method: str = "midpoint",
             *, hbar: float = 1.0) -> Trajectory:
    n_steps = default_steps(spec.T) if n_steps is None else n_steps
    return propagate(spec.schedule(), spec.initial_state(), TimeGrid(spec.T, n_steps, stride), method, hbar=hbar)


def commutator_reduction_deviation(spec: AdiabaticSpec, times) -> float:
    """``max ||[H(t), dH/dt] + s'(t) [HI, HF]||_F``; for the linear sweep ``-s' = 1/T``."""
    sched = spec.schedule()
    times = np.asarray(times, dtype=float)
    c_if = commutator(spec.HI, spec.HF)
    h = np.stack([sched.evaluate(t) for t in times])
    hd = np.stack([sched.derivative(t) for t in times])
    comm = h @ hd - hd @ h
    if spec.linear:
        target = np.broadcast_to(c_if / spec.T, comm.shape)
    else:
        target = -spec.sweep_rate(times)[:, None, None] * c_if
    return float(np.linalg.norm(comm - target, axis=(1, 2)).max())


def _uncertainties(states: np.ndarray, op: np.ndarray) -> np.ndarray:
    op_psi = states @ op.T
    mean = np.einsum("ni,ni->n", states.conj(), op_psi).real
    u = op_psi - mean[:, None] * states
    return np.sqrt(np.maximum(np.sum(np.abs(u) ** 2, axis=1), 0.0))


def rate_fluctuation_identity_check(spec: AdiabaticSpec, traj: Trajectory) -> BoundReport:
    """Deviation of ``dHdot`` from ``(1/T) Delta(HF - HI)`` along the run.

    Non-linear sweeps use the generalized ``|s'(t)| Delta(HI - HF)``; the
    report's ``extra["form"]`` says which one was checked.
    """
    delta_diff = _uncertainties(traj.states, spec.HF - spec.HI)
    if spec.linear:
        predicted = delta_diff / spec.T
        form = "linear: (1/T) Delta(HF - HI)"
    else:
        predicted = np.abs(spec.sweep_rate(traj.times)) * delta_diff
        form = "general: |s'(t)| Delta(HI - HF)"
    dev = np.abs(traj.delta_hdot - predicted)
    scale = max(1.0, float(np.max(traj.delta_hdot)))
    return BoundReport("rate-fluctuation-identity", float(dev.max()) / scale, 0.0, context={"T": spec.T},
                       extra={"form": form, "deviation": dev})


def runtime_lower_certificate(spec: AdiabaticSpec, traj: Trajectory, *, eps_v: float = EPS_SPEED,
                              eps_r: float = EPS_RADICAND) -> BoundReport:
    """Lower bound on the run time from the speed and acceleration along the sweep.

    Per sample ``|<[HI,HF]>| / (2 dH sqrt(dHdot^2 - hbar^2 a^2 / 4))``, scaled
    by ``|s'| T`` for non-linear sweeps; the certificate is the maximum over
    samples where ``V > eps_v`` and the radicand exceeds ``eps_r``. Excluded
    samples are counted in ``extra``.
    """
    T, hbar = spec.T, traj.hbar
    sched = traj.schedule
    c_if = commutator(spec.HI, spec.HF)
    if sched.commuting_family:
        return BoundReport("runtime-lower", 0.0, T, context={"T": T}, note="[HI, HF] = 0: certificate is 0")
    states = traj.states
    comm_if = np.abs(np.einsum("ni,ij,nj->n", states.conj(), c_if, states).imag)
    radicand = traj.delta_hdot**2 - hbar**2 * traj.accel**2 / 4.0
    admissible = (traj.speed > eps_v) & (radicand > eps_r) & np.isfinite(traj.accel)
    weight = np.abs(spec.sweep_rate(traj.times)) * T
    values = np.full(len(traj), np.nan)
    values[admissible] = (weight[admissible] * comm_if[admissible]
                          / (2.0 * traj.delta_h[admissible] * np.sqrt(radicand[admissible])))
    extra = {"values": values, "n_admissible": int(admissible.sum()),
             "n_excluded": int((~admissible).sum()),
             "state": "averages evaluated in the evolved state psi(s(t))"}
    if not admissible.any():
        return BoundReport("runtime-lower", math.nan, T, status="undefined",
                           note="certificate undefined (saturated everywhere)", extra=extra)
    k = int(np.nanargmax(values))
    extra["argmax_time"] = float(traj.times[k])
    return BoundReport("runtime-lower", float(values[k]), T, context={"T": T}, extra=extra)


def runtime_upper_certificate(spec: AdiabaticSpec, traj: Trajectory, *, eps_v: float = EPS_SPEED) -> BoundReport:
    """``T <= (2/hbar) (1/V(T)) int_0^T (dHI + dHF) dt`` with both fluctuations in ``|psi(t)>``.

    Relies on the sweep starting at rest (``V(0) = 0``), which the ground-state
    initial condition guarantees. Non-linear sweeps weight the integrand by
    ``|s'| T``.
    """
    T, hbar = spec.T, traj.hbar
    d_hi = _uncertainties(traj.states, spec.HI)
    d_hf = _uncertainties(traj.states, spec.HF)
    # sum uncertainty Delta(HF - HI) <= dHF + dHI, the step between the rate fluctuation and the integrand
    delta_diff = _uncertainties(traj.states, spec.HF - spec.HI)
    slacks = d_hi + d_hf - delta_diff
    extra = {"sum_uncertainty_min_slack": float(slacks.min()), "sum_uncertainty_slacks": slacks,
             "delta_diff": delta_diff}
    v_T = traj.speed[-1]
    if v_T <= eps_v:
        return BoundReport("runtime-upper", T, math.nan, status="undefined",
                           note="upper certificate undefined (final state stationary)", extra=extra)
    weight = np.abs(spec.sweep_rate(traj.times)) * T
    integral = integrate_samples(weight * (d_hi + d_hf), traj.times)
    value = 2.0 / hbar * integral / v_T
    return BoundReport("runtime-upper", T, float(value), context={"T": T, "V_T": float(v_T)}, extra=extra)


def gap_series(spec: AdiabaticSpec, times) -> np.ndarray:
    """``E1(t) - E0(t)`` of the interpolating Hamiltonian at each time."""
    sched = spec.schedule()
    times = np.asarray(times, dtype=float)
    if spec.dim < 2:
        return np.full(times.shape, math.inf)
    w = np.linalg.eigvalsh(np.stack([sched.evaluate(t) for t in times]))
    return w[:, 1] - w[:, 0]


def fidelity_curve(spec: AdiabaticSpec, T_list, n_steps: int | None = None, method: str = "midpoint",
                   *, hbar: float = 1.0) -> np.ndarray:
    """Final weight in the ground space of ``HF`` for each run time in ``T_list``."""
    out = []
    for T in T_list:
        sp = spec.with_runtime(float(T))
        steps = n_steps or default_steps(sp.T, per_unit_time=128, minimum=4096)
        final = propagate(sp.schedule(), sp.initial_state(), TimeGrid(sp.T, steps, steps), method,
                          hbar=hbar).final_state
        out.append(ground_space_fidelity(sp.HF, final))
    return np.array(out)


@dataclass(frozen=True)
class AuditReport:
    T: float
    fidelity: float
    lower: BoundReport
    upper: BoundReport
    rate_identity: BoundReport
    commutator_deviation: float
    sum_uncertainty_min_slack: float
    min_gap: float
    trajectory: Trajectory = field(repr=False)
    gaps: np.ndarray = field(repr=False)

    @property
    def sandwich_holds(self) -> bool:
        """``lower <= T <= upper`` wherever each certificate is defined (tolerance 1e-6 T)."""
        tol = 1e-6 * self.T
        ok = True
        if self.lower.applicable:
            ok &= self.lower.lhs <= self.T + tol
        if self.upper.applicable:
            ok &= self.T <= self.upper.rhs + tol
        return bool(ok)

    def summary(self) -> dict:
        return {
            "T": self.T,
            "fidelity": self.fidelity,
            "lower_certificate": self.lower.lhs if self.lower.applicable else None,
            "lower_status": self.lower.status,
            "lower_excluded_samples": self.lower.extra.get("n_excluded", 0),
            "upper_certificate": self.upper.rhs if self.upper.applicable else None,
            "upper_status": self.upper.status,
            "rate_identity_deviation": self.rate_identity.lhs,
            "commutator_reduction_deviation": self.commutator_deviation,
            "sum_uncertainty_min_slack": self.sum_uncertainty_min_slack,
            "min_gap": self.min_gap,
            "sandwich_holds": self.sandwich_holds,
        }


def audit(spec: AdiabaticSpec, n_steps: int | None = None, stride: int = 1, method: str = "midpoint",
          *, hbar: float = 1.0) -> AuditReport:
    """Simulate ``spec`` and evaluate every run-time certificate along the run."""
    traj = simulate(spec, n_steps, stride, method, hbar=hbar)
    upper = runtime_upper_certificate(spec, traj)
    gaps = gap_series(spec, traj.times)
    return AuditReport(
        T=spec.T,
        fidelity=ground_space_fidelity(spec.HF, traj.final_state),
        lower=runtime_lower_certificate(spec, traj),
        upper=upper,
        rate_identity=rate_fluctuation_identity_check(spec, traj),
        commutator_deviation=commutator_reduction_deviation(spec, traj.times),
        sum_uncertainty_min_slack=upper.extra["sum_uncertainty_min_slack"],
        min_gap=float(np.min(gaps)),
        trajectory=traj,
        gaps=gaps,
    )
