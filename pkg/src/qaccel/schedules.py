"""
Time-dependent Hamiltonian families H(t) with their rates dH/dt.

Scalar profiles (``ScalarSchedule``) carry an exact derivative. Three operator
families are built from them: a linear-parametric coupling ``lam(t) H0``, the
two-level drive ``J(t) sigma_x``, and the adiabatic interpolation
``s(t) HI + (1 - s(t)) HF``. A constant Hamiltonian and a generic
``HamiltonianSchedule`` built from two callables cover everything else.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline

from .operators import SIGMA_X, DimensionError, _mat, commutator

BOUNDARY_TOL = 1e-12
COMMUTING_TOL = 1e-10


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class ScalarSchedule:
    """Real profile f(t) together with its exact derivative."""

    func: Callable[[float], float]
    deriv: Callable[[float], float]
    tag: str = "custom"

    def __call__(self, t: float) -> float:
        return float(self.func(t))

    def derivative(self, t: float) -> float:
        return float(self.deriv(t))

    def is_nondecreasing(self, t0: float, t1: float, samples: int = 513) -> bool:
        """Sampled check that the derivative never goes negative on [t0, t1]."""
        ts = np.linspace(t0, t1, samples)
        rates = np.array([self.derivative(t) for t in ts])
        scale = max(1.0, np.abs(rates).max())
        return bool(np.all(rates >= -1e-12 * scale))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], tag: str | None = None) -> "ScalarSchedule":
        """``c0 + c1 t + c2 t^2 + ...``"""
        p = Polynomial(np.asarray(coeffs, dtype=float))
        dp = p.deriv()
        return cls(p, dp, tag or "polynomial " + " ".join(f"{c:g}" for c in coeffs))

    @classmethod
    def linear(cls, slope: float, offset: float = 0.0) -> "ScalarSchedule":
        return cls.polynomial([offset, slope], tag=f"linear {offset:g} {slope:g}")

    @classmethod
    def quadratic(cls, c2: float, c1: float = 0.0, c0: float = 0.0) -> "ScalarSchedule":
        return cls.polynomial([c0, c1, c2], tag=f"quadratic {c0:g} {c1:g} {c2:g}")

    @classmethod
    def constant(cls, value: float) -> "ScalarSchedule":
        return cls(lambda t: value, lambda t: 0.0, f"constant {value:g}")

    @classmethod
    def sine(cls, amplitude: float = 1.0, omega: float = 1.0, phase: float = 0.0) -> "ScalarSchedule":
        """``amplitude * sin(omega t + phase)``"""
        return cls(lambda t: amplitude * math.sin(omega * t + phase),
                   lambda t: amplitude * omega * math.cos(omega * t + phase),
                   f"sine {amplitude:g} {omega:g} {phase:g}")

    @classmethod
    def tabulated(cls, times, values) -> "ScalarSchedule":
        """Piecewise-cubic interpolant of samples; the derivative is the interpolant's."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ScheduleError("tabulated schedule needs matching 1-D time/value arrays with >= 2 rows")
        if np.any(np.diff(times) <= 0):
            raise ScheduleError("tabulated times must be strictly increasing")
        spline = CubicSpline(times, values)
        dspline = spline.derivative()
        return cls(spline, dspline, f"tabulated {times.size} points")

    @classmethod
    def from_table(cls, path) -> "ScalarSchedule":
        """Read a two-column ``time value`` text table; ``#`` starts a comment."""
        path = Path(path)
        try:
            data = np.loadtxt(path, comments="#", ndmin=2)
        except ValueError as exc:
            raise ScheduleError(f"{path}: {exc}") from None
        if data.shape[1] != 2:
            raise ScheduleError(f"{path}: expected 2 columns, found {data.shape[1]}")
        try:
            sched = cls.tabulated(data[:, 0], data[:, 1])
        except ScheduleError as exc:
            raise ScheduleError(f"{path}: {exc}") from None
        return ScalarSchedule(sched.func, sched.deriv, f"table {path.name}")

    @classmethod
    def from_descriptor(cls, form: str, coeffs: Sequence[float]) -> "ScalarSchedule":
        """Named forms used in scenario files: linear, quadratic, polynomial, sine, constant."""
        coeffs = [float(c) for c in coeffs]
        if form == "linear":
            if len(coeffs) != 2:
                raise ScheduleError("linear takes 2 coefficients: c0 c1")
            return cls.polynomial(coeffs, tag="linear " + " ".join(f"{c:g}" for c in coeffs))
        if form == "quadratic":
            if len(coeffs) != 3:
                raise ScheduleError("quadratic takes 3 coefficients: c0 c1 c2")
            return cls.polynomial(coeffs, tag="quadratic " + " ".join(f"{c:g}" for c in coeffs))
        if form == "polynomial":
            if not coeffs:
                raise ScheduleError("polynomial needs at least one coefficient")
            return cls.polynomial(coeffs)
        if form == "sine":
            if not 1 <= len(coeffs) <= 3:
                raise ScheduleError("sine takes 1-3 coefficients: amplitude [omega [phase]]")
            return cls.sine(*coeffs)
        if form == "constant":
            if len(coeffs) != 1:
                raise ScheduleError("constant takes 1 coefficient")
            return cls.constant(coeffs[0])
        raise ScheduleError(f"unknown scalar schedule form {form!r}")


@dataclass(frozen=True)
class HamiltonianSchedule:
    """A Hamiltonian family on the horizon ``[0, T]``.

    ``hamiltonian(t)`` and ``rate(t)`` return dense Hermitian arrays.
    ``commuting_family`` promises that all H(t) commute with each other, which
    is what licenses the exact exponential-of-integral propagator.
    """

    dim: int
    hamiltonian: Callable[[float], np.ndarray]
    rate: Callable[[float], np.ndarray]
    T: float
    commuting_family: bool = False
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self.T > 0:
            raise ScheduleError(f"horizon T must be positive, got {self.T!r}")

    def evaluate(self, t: float) -> np.ndarray:
        return self.hamiltonian(t)

    def derivative(self, t: float) -> np.ndarray:
        return self.rate(t)


def _static(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


def make_constant(H, T: float) -> HamiltonianSchedule:
    h = _static(_mat(H))
    zero = _static(np.zeros_like(h))
    return HamiltonianSchedule(h.shape[0], lambda t: h, lambda t: zero, T,
                               commuting_family=True, name="constant")


def make_linear_parametric(lam: ScalarSchedule, H0, T: float = 1.0) -> HamiltonianSchedule:
    """``H(t) = lam(t) H0``; always a commuting family."""
    h0 = _static(_mat(H0))
    return HamiltonianSchedule(h0.shape[0], lambda t: lam(t) * h0, lambda t: lam.derivative(t) * h0, T,
                               commuting_family=True, name="linear-parametric",
                               params={"lam": lam, "H0": h0})


def make_two_level_drive(J: ScalarSchedule, T: float = 1.0) -> HamiltonianSchedule:
    """``H(t) = J(t) sigma_x`` for a qubit driven by a field switched on at t = 0."""
    j0 = J(0.0)
    if abs(j0) > BOUNDARY_TOL:
        warnings.warn(f"two-level drive expects J(0) = 0, got {j0!r}", stacklevel=2)
    sx = SIGMA_X.matrix
    return HamiltonianSchedule(2, lambda t: J(t) * sx, lambda t: J.derivative(t) * sx, T,
                               commuting_family=True, name="two-level-drive",
                               params={"J": J})


def linear_sweep(T: float) -> ScalarSchedule:
    """``s(t) = 1 - t/T``"""
    return ScalarSchedule(lambda t: 1.0 - t / T, lambda t: -1.0 / T, f"linear-sweep T={T:g}")


def make_adiabatic(HI, HF, T: float, s: ScalarSchedule | None = None) -> HamiltonianSchedule:
    """``H(t) = s(t) HI + (1 - s(t)) HF`` with ``s(0) = 1`` and ``s(T) = 0``."""
    hi, hf = _static(_mat(HI)), _static(_mat(HF))
    if hi.shape != hf.shape:
        raise DimensionError(f"HI {hi.shape} and HF {hf.shape} differ in shape")
    if s is None:
        s = linear_sweep(T)
    if abs(s(0.0) - 1.0) > BOUNDARY_TOL or abs(s(T)) > BOUNDARY_TOL:
        raise ScheduleError(f"sweep must satisfy s(0) = 1 and s(T) = 0; got s(0) = {s(0.0)!r}, s(T) = {s(T)!r}")
    diff = _static(hi - hf)
    comm = np.linalg.norm(commutator(hi, hf))
    commuting = comm <= COMMUTING_TOL * max(1.0, np.linalg.norm(hi) * np.linalg.norm(hf))
    return HamiltonianSchedule(hi.shape[0], lambda t: s(t) * hi + (1.0 - s(t)) * hf, lambda t: s.derivative(t) * diff, T,
                               commuting_family=bool(commuting), name="adiabatic",
                               params={"HI": hi, "HF": hf, "s": s})


def finite_difference_derivative(schedule: HamiltonianSchedule, t: float, h: float = 1e-4) -> np.ndarray:
    """Central difference ``(H(t+h) - H(t-h)) / 2h``, re-Hermitized."""
    if not h > 0:
        raise ScheduleError(f"step h must be positive, got {h!r}")
    margin = 0.05 * schedule.T
    if t - h < -margin or t + h > schedule.T + margin:
        raise ScheduleError(f"t = {t!r} with h = {h!r} leaves the domain [0, {schedule.T!r}]")
    d = (schedule.evaluate(t + h) - schedule.evaluate(t - h)) / (2 * h)
    return (d + d.conj().T) / 2
