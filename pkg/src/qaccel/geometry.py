"""
Fubini-Study geometry of a pure-state evolution.

Distances on projective space, transport speed ``V = 2 dH / hbar``, its rate
of change (the quantum acceleration), and the inequalities that bound them:
the acceleration limit ``|a| <= 2 dHdot / hbar`` with its commutator-refined
squared form, the minimal time to reach a given speed, and the
Mandelstam-Tamm time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson, trapezoid

from .bounds import BoundReport
from .operators import _mat, _vec, commutator_mean_abs, covariance, variance
from .propagator import EPS_SPEED, TimeGrid, Trajectory, propagate
from .schedules import HamiltonianSchedule

GAMMA_FLOOR = 1e-14


class ZeroSpeedError(ArithmeticError):
    """The state is (numerically) stationary; the analytic acceleration divides by zero."""


class UnreachableTargetError(ArithmeticError):
    pass


def fs_geodesic_distance(psi1, psi2) -> float:
    """Fubini-Study distance ``2 arccos |<psi1|psi2>|`` in [0, pi]."""
    overlap = abs(np.vdot(_vec(psi1), _vec(psi2)))
    return 2.0 * math.acos(min(max(overlap, 0.0), 1.0))


def speed(state, H, *, hbar: float = 1.0) -> float:
    return 2.0 * math.sqrt(variance(state, H)) / hbar


def integrate_samples(values, times) -> float:
    """Integral of a uniformly sampled series: composite Simpson, trapezoid for 2 samples.

    Saturated bounds are compared at 1e-8, below the trapezoid error of a
    typical 4096-step run, hence the fourth-order rule.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise ValueError("need at least 2 samples to integrate")
    if values.size == 2:
        return float(trapezoid(values, times))
    return float(simpson(values, x=times))


def cumulative_path_length(traj: Trajectory) -> np.ndarray:
    if len(traj) < 3:
        return np.concatenate([[0.0], np.cumsum(np.diff(traj.times) * (traj.speed[1:] + traj.speed[:-1]) / 2)])
    return cumulative_simpson(traj.speed, x=traj.times, initial=0.0)


def path_length(traj: Trajectory) -> float:
    """Fubini-Study length ``(2/hbar) int dH dt`` of the sampled path."""
    if len(traj) < 2:
        raise ValueError("path length needs at least 2 samples")
    return integrate_samples(traj.speed, traj.times)


def quadrature_refinement(values: np.ndarray, times: np.ndarray) -> float:
    """Change of the integral when every second sample is dropped.

    An a posteriori error estimate; NaN when the sample count does not allow
    halving.
    """
    values = np.asarray(values, dtype=float)
    if (values.size - 1) % 2 or values.size < 5:
        return math.nan
    return abs(integrate_samples(values, times) - integrate_samples(values[::2], times[::2]))


def acceleration_analytic(state, H, Hdot, *, hbar: float = 1.0, eps_v: float = EPS_SPEED) -> float:
    """``a = (4/hbar^2) Cov(H, Hdot) / V``.

    Raises
    ------
    ZeroSpeedError
        When ``V <= eps_v``; fall back to :func:`acceleration_numeric`.
    """
    v = speed(state, H, hbar=hbar)
    if v <= eps_v:
        raise ZeroSpeedError(f"speed {v:.3e} <= {eps_v:g}: acceleration is singular here")
    return 4.0 * covariance(state, H, Hdot) / (hbar**2 * v)


def acceleration_numeric(speeds, dt: float) -> np.ndarray:
    """Second-order finite-difference derivative of a uniformly sampled speed series."""
    speeds = np.asarray(speeds, dtype=float)
    if speeds.size < 3:
        raise ValueError("numeric acceleration needs at least 3 samples")
    return np.gradient(speeds, dt, edge_order=2)


def qal_pointwise_check(state, H, Hdot, *, hbar: float = 1.0, accel: float | None = None,
                        eps_v: float = EPS_SPEED, context=None) -> tuple[BoundReport, BoundReport]:
    """Both acceleration limits at one instant.

    Returns ``(squared, plain)``: the commutator-refined squared bound
    ``a^2 <= (4/hbar^2) dHdot^2 - |<[H,Hdot]>|^2 / (hbar^2 dH^2)`` and the plain
    bound ``|a| <= (2/hbar) dHdot``. ``accel`` overrides the analytic value; it
    is needed at zero-speed points, where the squared form is marked
    not applicable.
    """
    var_h = variance(state, H)
    var_hd = variance(state, Hdot)
    delta_h = math.sqrt(var_h)
    moving = 2.0 * delta_h / hbar > eps_v
    if accel is None:
        accel = acceleration_analytic(state, H, Hdot, hbar=hbar, eps_v=eps_v) if moving else None
    plain_rhs = 2.0 * math.sqrt(var_hd) / hbar
    if accel is None:
        plain = BoundReport("accel-limit", math.nan, plain_rhs, context=context, status="not-applicable",
                            note="zero speed and no numeric acceleration supplied")
    else:
        plain = BoundReport("accel-limit", abs(accel), plain_rhs, context=context)
    if moving and accel is not None:
        comm = commutator_mean_abs(state, H, Hdot)
        rhs = 4.0 * var_hd / hbar**2 - comm**2 / (hbar**2 * var_h)
        squared = BoundReport("accel-limit-squared", accel**2, rhs, context=context,
                              extra={"commutator_term": comm**2 / (hbar**2 * var_h)})
    else:
        squared = BoundReport("accel-limit-squared", math.nan, math.nan, context=context,
                              status="not-applicable", note="zero speed")
    return squared, plain


@dataclass(frozen=True)
class AccelerationBoundSeries:
    """Per-sample sides of both acceleration limits (NaN where not applicable)."""

    sq_lhs: np.ndarray
    sq_rhs: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    commutator_term: np.ndarray

    @property
    def sq_slack(self) -> np.ndarray:
        return self.sq_rhs - self.sq_lhs

    @property
    def slack(self) -> np.ndarray:
        return self.rhs - self.lhs

    @property
    def sq_scale(self) -> np.ndarray:
        return np.fmax(np.fmax(np.abs(self.sq_lhs), np.abs(self.sq_rhs)), 1.0)

    @property
    def scale(self) -> np.ndarray:
        return np.fmax(np.fmax(np.abs(self.lhs), np.abs(self.rhs)), 1.0)


def acceleration_bound_series(traj: Trajectory) -> AccelerationBoundSeries:
    """Vectorized :func:`qal_pointwise_check` over a trajectory."""
    hbar = traj.hbar
    var_h = traj.delta_h**2
    var_hd = traj.delta_hdot**2
    moving = np.isfinite(traj.accel_analytic)
    comm_term = np.full(len(traj), np.nan)
    comm_term[moving] = traj.comm_abs[moving] ** 2 / (hbar**2 * var_h[moving])
    sq_rhs = np.where(moving, 4.0 * var_hd / hbar**2 - comm_term, np.nan)
    sq_lhs = np.where(moving, traj.accel_analytic**2, np.nan)
    return AccelerationBoundSeries(sq_lhs, sq_rhs, np.abs(traj.accel), 2.0 * traj.delta_hdot / hbar, comm_term)


def mt_qsl_time(psi0, psiT, delta_h_mean: float, *, hbar: float = 1.0) -> float:
    """Mandelstam-Tamm minimal time ``hbar S0 / (2 dH)``.

    ``S0`` is the Fubini-Study distance ``2 arccos|<psi0|psiT>|`` used
    throughout this package; with that convention a constant-variance
    geodesic evolution reaches ``psiT`` in exactly this time. For
    time-dependent runs pass the time-averaged fluctuation.
    """
    s0 = fs_geodesic_distance(psi0, psiT)
    if delta_h_mean <= 0:
        if s0 > 0:
            raise UnreachableTargetError("zero energy fluctuation cannot move the state to a different ray")
        return 0.0
    return hbar * s0 / (2.0 * delta_h_mean)


def mean_delta_h(traj: Trajectory) -> float:
    return integrate_samples(traj.delta_h, traj.times) / traj.grid.T


def mt_qsl_report(traj: Trajectory) -> BoundReport:
    T = traj.grid.T
    try:
        bound = mt_qsl_time(traj.initial_state, traj.final_state, mean_delta_h(traj), hbar=traj.hbar)
    except UnreachableTargetError as exc:
        return BoundReport("mt-qsl", math.nan, T, status="undefined", note=str(exc))
    return BoundReport("mt-qsl", bound, T, context={"T": T})


def path_geodesic_report(traj: Trajectory) -> BoundReport:
    s0 = fs_geodesic_distance(traj.initial_state, traj.final_state)
    return BoundReport("path-vs-geodesic", path_length(traj), s0, relation=">=")


def rate_fluctuation_mean(traj: Trajectory) -> float:
    """``Gamma = (1/T) int_0^T dHdot dt``."""
    return integrate_samples(traj.delta_hdot, traj.times) / traj.grid.T


def qal_time(traj: Trajectory) -> float:
    """``T_QAL = (hbar/2) V(T) / Gamma``; raises when Gamma vanishes."""
    gamma = rate_fluctuation_mean(traj)
    if gamma <= GAMMA_FLOOR:
        raise ZeroDivisionError("Gamma = 0: time-independent regime, acceleration time undefined")
    return traj.hbar / 2.0 * traj.speed[-1] / gamma


def qal_time_report(traj: Trajectory) -> BoundReport:
    """Minimal time to accelerate: ``T >= (hbar/2) V(T) / Gamma``.

    This form assumes the evolution starts at rest (``V(0) = 0``); otherwise
    see :func:`qal_time_corrected_report`. The report notes when ``V(0) != 0``.
    """
    T = traj.grid.T
    gamma = rate_fluctuation_mean(traj)
    if gamma <= GAMMA_FLOOR:
        return BoundReport("qal-time", math.nan, T, status="undefined",
                           note="Gamma = 0: time-independent regime, the state is never accelerated")
    t_qal = traj.hbar / 2.0 * traj.speed[-1] / gamma
    v0 = traj.speed[0]
    note = f"V(0) = {v0:.6g} != 0; only the corrected form is guaranteed" if v0 > EPS_SPEED else ""
    return BoundReport("qal-time", t_qal, T, context={"Gamma": gamma, "V_T": traj.speed[-1], "V_0": v0},
                       note=note)


def qal_time_corrected_report(traj: Trajectory) -> BoundReport:
    """``T >= (hbar/2) |V(T) - V(0)| / Gamma``, valid for any initial speed."""
    T = traj.grid.T
    gamma = rate_fluctuation_mean(traj)
    if gamma <= GAMMA_FLOOR:
        return BoundReport("qal-time-corrected", math.nan, T, status="undefined",
                           note="Gamma = 0: time-independent regime")
    t_min = traj.hbar / 2.0 * abs(traj.speed[-1] - traj.speed[0]) / gamma
    return BoundReport("qal-time-corrected", t_min, T, context={"Gamma": gamma})


@dataclass(frozen=True)
class GeometrySeries:
    times: np.ndarray
    path: np.ndarray
    speed: np.ndarray
    accel: np.ndarray
    accel_numeric: np.ndarray
    gamma_running: np.ndarray
    t_qal: float


def geometry_series(traj: Trajectory) -> GeometrySeries:
    """Cumulative path length, speed, acceleration and the running ``Gamma`` along a run."""
    if len(traj) >= 3:
        integral = cumulative_simpson(traj.delta_hdot, x=traj.times, initial=0.0)
    else:
        integral = np.array([0.0, (traj.delta_hdot[0] + traj.delta_hdot[1]) / 2 * traj.grid.T])
    with np.errstate(invalid="ignore", divide="ignore"):
        gamma_running = np.where(traj.times > 0, integral / traj.times, traj.delta_hdot)
    try:
        t_qal = qal_time(traj)
    except ZeroDivisionError:
        t_qal = math.nan
    numeric = acceleration_numeric(traj.speed, traj.grid.sample_dt) if len(traj) >= 3 else np.full(len(traj), np.nan)
    return GeometrySeries(traj.times, cumulative_path_length(traj), traj.speed, traj.accel, numeric,
                          gamma_running, t_qal)


def covariance_identity_residual(traj: Trajectory) -> float:
    """``max |V dV/dt - (4/hbar^2) Cov(H, Hdot)|`` over interior samples, dV/dt by central differences."""
    if len(traj) < 3:
        raise ValueError("need at least 3 samples")
    dv = (traj.speed[2:] - traj.speed[:-2]) / (2.0 * traj.grid.sample_dt)
    resid = traj.speed[1:-1] * dv - 4.0 * traj.cov[1:-1] / traj.hbar**2
    return float(np.abs(resid).max())


def fs_overlap_ratio(schedule: HamiltonianSchedule, state, t: float, dt: float, *,
                     hbar: float = 1.0, substeps: int = 32) -> float:
    """Ratio of the overlap form ``4 (1 - |<psi(t)|psi(t+dt)>|^2)`` of the
    infinitesimal Fubini-Study distance to ``(4/hbar^2) dH(t)^2 dt^2``.

    Tends to 1 as ``dt -> 0``.
    """
    shifted = HamiltonianSchedule(schedule.dim, lambda tau: schedule.evaluate(t + tau),
                                  lambda tau: schedule.derivative(t + tau), dt)
    psi = _vec(state)
    later = propagate(shifted, psi, TimeGrid(dt, substeps, substeps), hbar=hbar).final_state
    # 1 - |<psi|later>|^2 as the squared norm of the orthogonal component: no cancellation at small dt
    perp = later - np.vdot(psi, later) * psi
    overlap_form = 4.0 * np.vdot(perp, perp).real
    metric_form = 4.0 * variance(psi, _mat(schedule.evaluate(t))) * dt**2 / hbar**2
    return overlap_form / metric_form
