"""
Hermitian operators, pure states, and their statistical moments.

All quantities are dense numpy arrays. ``HermitianOperator`` and
``QuantumState`` validate once at construction and are read-only afterwards;
every function here also accepts plain arrays, which are trusted as given.
"""

from __future__ import annotations

import numpy as np

from .bounds import BoundReport

HERMITIAN_RTOL = 1e-12
NORM_TOL = 1e-10
VARIANCE_CLAMP = 1e-12
COMMUTATOR_REAL_TOL = 1e-10


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


class NormalizationError(ValueError):
    pass


class HermitianOperator:
    """Dense complex Hermitian matrix (energy units)."""

    __slots__ = ("matrix",)

    def __init__(self, entries, *, check: bool = True):
        m = np.array(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionError(f"operator must be a non-empty square matrix, got shape {m.shape}")
        if check:
            scale = np.abs(m).max()
            err = np.abs(m - m.conj().T).max()
            if err > HERMITIAN_RTOL * scale:
                raise NotHermitianError(
                    f"matrix is not Hermitian: max|A - A^H| = {err:.3e} "
                    f"exceeds {HERMITIAN_RTOL:g} * max|A| = {HERMITIAN_RTOL * scale:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("HermitianOperator is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)

    def __add__(self, other):
        return HermitianOperator(self.matrix + _mat(other), check=False)

    def __sub__(self, other):
        return HermitianOperator(self.matrix - _mat(other), check=False)

    def __neg__(self):
        return HermitianOperator(-self.matrix, check=False)

    def __mul__(self, scalar):
        if np.iscomplexobj(scalar) and np.imag(scalar) != 0:
            raise NotHermitianError("scaling by a complex number breaks Hermiticity")
        return HermitianOperator(float(np.real(scalar)) * self.matrix, check=False)

    __rmul__ = __mul__

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


class QuantumState:
    """Normalized complex amplitude vector."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes, *, normalize: bool = False):
        v = np.array(amplitudes, dtype=complex).reshape(-1)
        if v.size < 1:
            raise DimensionError("state must have at least one amplitude")
        norm = np.linalg.norm(v)
        if normalize:
            if norm == 0 or not np.isfinite(norm):
                raise NormalizationError("cannot normalize a zero or non-finite vector")
            v = v / norm
        elif abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"state norm {norm!r} differs from 1 by more than {NORM_TOL:g}")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    def __setattr__(self, name, value):
        raise AttributeError("QuantumState is immutable")

    @classmethod
    def basis(cls, dim: int, index: int) -> "QuantumState":
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return cls(v)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.amplitudes
        return self.amplitudes.astype(dtype)

    def __repr__(self):
        return f"QuantumState(dim={self.dim})"


def _mat(a) -> np.ndarray:
    if isinstance(a, HermitianOperator):
        return a.matrix
    return np.asarray(a, dtype=complex)


def _vec(psi) -> np.ndarray:
    if isinstance(psi, QuantumState):
        return psi.amplitudes
    return np.asarray(psi, dtype=complex).reshape(-1)


def _check_dims(psi: np.ndarray, *ops: np.ndarray) -> None:
    for op in ops:
        if op.shape != (psi.size, psi.size):
            raise DimensionError(f"operator shape {op.shape} does not act on a dim-{psi.size} state")


SIGMA_X = HermitianOperator([[0, 1], [1, 0]])
SIGMA_Y = HermitianOperator([[0, -1j], [1j, 0]])
SIGMA_Z = HermitianOperator([[1, 0], [0, -1]])
IDENTITY_2 = HermitianOperator(np.eye(2))


def commutator(a, b) -> np.ndarray:
    a, b = _mat(a), _mat(b)
    return a @ b - b @ a


def expectation(state, a) -> float:
    """<psi|A|psi>, real part only."""
    psi, a = _vec(state), _mat(a)
    _check_dims(psi, a)
    return float(np.vdot(psi, a @ psi).real)


def _centered(psi: np.ndarray, a: np.ndarray) -> np.ndarray:
    # (A - <A>) psi
    a_psi = a @ psi
    return a_psi - np.vdot(psi, a_psi).real * psi


def covariance(state, a, b) -> float:
    """Symmetrized covariance ``(1/2)<AB + BA> - <A><B>``.

    Evaluated as ``Re <(A - <A>)psi | (B - <B>)psi>``, which equals the
    textbook form for a normalized state and makes ``covariance(psi, A, A)``
    identical to :func:`variance`.
    """
    psi, a, b = _vec(state), _mat(a), _mat(b)
    _check_dims(psi, a, b)
    u = _centered(psi, a)
    v = u if b is a else _centered(psi, b)
    return float(np.sum(u.conj() * v).real)


def variance(state, a) -> float:
    """Squared fluctuation ``<A^2> - <A>^2`` (not its square root)."""
    var = covariance(state, a, a)
    if var < 0.0:
        # only round-off can produce this; anything larger is a bug upstream
        if var < -VARIANCE_CLAMP:
            raise ArithmeticError(f"variance {var!r} is negative beyond round-off")
        var = 0.0
    return var


def uncertainty(state, a) -> float:
    return float(np.sqrt(variance(state, a)))


def commutator_mean(state, a, b) -> complex:
    psi, a, b = _vec(state), _mat(a), _mat(b)
    _check_dims(psi, a, b)
    return complex(np.vdot(psi, commutator(a, b) @ psi))


def commutator_mean_abs(state, a, b) -> float:
    """|<[A, B]>|. The mean is purely imaginary for Hermitian A and B."""
    c = commutator_mean(state, a, b)
    scale = max(1.0, np.linalg.norm(_mat(a), 2) * np.linalg.norm(_mat(b), 2))
    if abs(c.real) > COMMUTATOR_REAL_TOL * scale:
        raise NotHermitianError(f"<[A,B]> has real part {c.real:.3e}; are A and B Hermitian?")
    return abs(c.imag)


def check_schrodinger_robertson(state, a, b, *, context=None) -> BoundReport:
    """``dA^2 dB^2 >= Cov(A,B)^2 + |<[A,B]>|^2 / 4``."""
    var_a, var_b = variance(state, a), variance(state, b)
    cov = covariance(state, a, b)
    comm = commutator_mean_abs(state, a, b)
    return BoundReport("schrodinger-robertson", var_a * var_b, cov**2 + 0.25 * comm**2,
                       relation=">=", context=context)


def check_sum_uncertainty(state, a, b, *, context=None) -> BoundReport:
    """``Delta(A - B) <= Delta A + Delta B``."""
    diff = _mat(a) - _mat(b)
    return BoundReport("sum-uncertainty", uncertainty(state, diff),
                       uncertainty(state, a) + uncertainty(state, b), context=context)
