import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaccel.ensembles import random_hermitian, random_state
from qaccel.operators import (SIGMA_X, SIGMA_Y, SIGMA_Z, DimensionError, HermitianOperator,
                              NormalizationError, NotHermitianError, QuantumState,
                              check_schrodinger_robertson, check_sum_uncertainty, commutator_mean_abs,
                              covariance, expectation, variance)


def naive_expectation(psi, a):
    n = len(psi)
    total = 0j
    for i in range(n):
        for j in range(n):
            total += np.conj(psi[i]) * a[i, j] * psi[j]
    return total


def naive_matmul(a, b):
    n = a.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[i, j] += a[i, k] * b[k, j]
    return out


def spectral_variance(psi, a):
    w, v = np.linalg.eigh(a)
    p = np.abs(v.conj().T @ psi) ** 2
    mean = np.sum(p * w)
    return np.sum(p * (w - mean) ** 2)


def theta_state(theta):
    return np.array([np.cos(theta), -1j * np.sin(theta)])


class TestConstruction:
    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            HermitianOperator([[0, 1], [0, 0]])

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            HermitianOperator(np.zeros((2, 3)))

    def test_relative_tolerance(self):
        m = 1e6 * np.array([[1.0, 2.0], [2.0, -1.0]])
        m[1, 0] += 1e-7
        HermitianOperator(m)  # asymmetry 1e-7 is below 1e-12 * 2e6
        with pytest.raises(NotHermitianError):
            HermitianOperator(m + np.array([[0, 0], [1e-4, 0]]))

    def test_immutable(self):
        op = HermitianOperator(np.eye(2))
        with pytest.raises(ValueError):
            op.matrix[0, 0] = 3
        with pytest.raises(AttributeError):
            op.matrix = np.eye(2)

    def test_dim_one_accepted(self):
        assert HermitianOperator([[2.0]]).dim == 1

    def test_state_normalization(self):
        with pytest.raises(NormalizationError):
            QuantumState([1, 1])
        s = QuantumState([1, 1], normalize=True)
        assert np.isclose(np.linalg.norm(s.amplitudes), 1.0)
        QuantumState([1 + 5e-11, 0])

    def test_arithmetic_stays_hermitian(self):
        op = 2 * SIGMA_X - SIGMA_Z
        assert isinstance(op, HermitianOperator)
        np.testing.assert_array_equal(op.matrix, [[-1, 2], [2, 1]])
        with pytest.raises(NotHermitianError):
            SIGMA_X * 1j


class TestExpectation:
    def test_eigenstate(self):
        assert expectation([1, 0], SIGMA_Z) == 1.0

    @pytest.mark.parametrize("theta", [0.0, 0.3, 1.1, 2.5])
    def test_sigma_x_vanishes_on_drive_states(self, theta):
        assert abs(expectation(theta_state(theta), SIGMA_X)) < 1e-15

    def test_naive_oracle(self, rng):
        psi, a = random_state(rng, 4), random_hermitian(rng, 4)
        assert abs(expectation(psi, a) - naive_expectation(psi, a).real) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            expectation([1, 0, 0], SIGMA_Z)


class TestVariance:
    def test_eigenstate_zero(self):
        assert variance([1, 0], SIGMA_Z) == 0.0

    @pytest.mark.parametrize("theta", [0.2, 0.9, 2.0])
    def test_drive_fluctuation_is_coupling(self, theta):
        assert variance(theta_state(theta), 0.5 * SIGMA_X) == pytest.approx(0.25, abs=1e-15)

    def test_spectral_oracle(self, rng):
        psi, a = random_state(rng, 6), random_hermitian(rng, 6)
        assert abs(variance(psi, a) - spectral_variance(psi, a)) < 1e-10

    def test_textbook_form(self, rng):
        psi, a = random_state(rng, 5), random_hermitian(rng, 5)
        textbook = naive_expectation(psi, naive_matmul(a, a)).real - naive_expectation(psi, a).real ** 2
        assert abs(variance(psi, a) - textbook) < 1e-12

    def test_zero_iff_eigenvector(self, rng):
        a = random_hermitian(rng, 5)
        w, v = np.linalg.eigh(a)
        for k in range(5):
            psi = v[:, k]
            assert variance(psi, a) <= 1e-16 * max(1, np.max(np.abs(w))) ** 2 * 10
            residual = np.linalg.norm((a - expectation(psi, a) * np.eye(5)) @ psi)
            assert residual <= 1e-8
        assert variance(random_state(rng, 5), a) > 1e-6


class TestCovariance:
    def test_self_covariance_is_variance(self):
        assert covariance([1, 0], SIGMA_X, SIGMA_X) == variance([1, 0], SIGMA_X) == 1.0

    def test_pauli_pair(self):
        assert abs(covariance([1, 0], SIGMA_X, SIGMA_Y)) < 1e-15

    def test_naive_oracle(self, rng):
        psi, a, b = random_state(rng, 4), random_hermitian(rng, 4), random_hermitian(rng, 4)
        sym = 0.5 * (naive_expectation(psi, naive_matmul(a, b)) + naive_expectation(psi, naive_matmul(b, a)))
        oracle = sym.real - naive_expectation(psi, a).real * naive_expectation(psi, b).real
        assert abs(covariance(psi, a, b) - oracle) < 1e-12

    def test_symmetric(self, rng):
        for _ in range(50):
            d = int(rng.integers(2, 9))
            psi, a, b = random_state(rng, d), random_hermitian(rng, d), random_hermitian(rng, d)
            assert abs(covariance(psi, a, b) - covariance(psi, b, a)) <= 1e-14


class TestCommutator:
    def test_self_commutator(self, rng):
        a = random_hermitian(rng, 3)
        assert commutator_mean_abs(random_state(rng, 3), a, a) == 0.0

    def test_pauli_pair(self):
        assert commutator_mean_abs([1, 0], SIGMA_X, SIGMA_Y) == pytest.approx(2.0, abs=1e-15)

    def test_naive_oracle(self, rng):
        psi, a, b = random_state(rng, 5), random_hermitian(rng, 5), random_hermitian(rng, 5)
        oracle = naive_expectation(psi, naive_matmul(a, b) - naive_matmul(b, a))
        assert abs(oracle.real) < 1e-10
        assert abs(commutator_mean_abs(psi, a, b) - abs(oracle)) < 1e-11

    def test_non_hermitian_input_detected(self):
        a = np.array([[0, 1], [0, 0]], dtype=complex)
        with pytest.raises(NotHermitianError):
            commutator_mean_abs(np.array([1.0, 0.0]), a, a.T)


class TestUncertaintyRelations:
    def test_robertson_pauli_saturated(self):
        rep = check_schrodinger_robertson([1, 0], SIGMA_X, SIGMA_Y)
        assert rep.lhs == pytest.approx(1.0) and rep.rhs == pytest.approx(1.0)
        assert abs(rep.slack) < 1e-15 and rep.saturated and rep.relation == ">="

    def test_robertson_self_pair_exact(self, rng):
        psi, a = random_state(rng, 6), random_hermitian(rng, 6)
        assert check_schrodinger_robertson(psi, a, a).slack == 0.0

    def test_robertson_zero_variance_legal(self):
        rep = check_schrodinger_robertson([1, 0], SIGMA_Z, SIGMA_X)
        assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.holds()

    def test_sum_uncertainty_degenerate(self, rng):
        psi, a = random_state(rng, 3), random_hermitian(rng, 3)
        rep = check_sum_uncertainty(psi, a, np.zeros((3, 3)))
        assert rep.lhs == pytest.approx(rep.rhs, abs=1e-15)

    def test_sum_uncertainty_identical(self, rng):
        psi = random_state(rng, 2)
        rep = check_sum_uncertainty(psi, SIGMA_X, SIGMA_X)
        assert rep.lhs == 0.0 and rep.rhs == pytest.approx(2 * np.sqrt(variance(psi, SIGMA_X)))

    @pytest.mark.parametrize("checker", [check_schrodinger_robertson, check_sum_uncertainty])
    def test_randomized_suite(self, checker):
        rng = np.random.default_rng(42)
        worst = np.inf
        for i in range(1000):
            d = 2 + i % 7
            rep = checker(random_state(rng, d), random_hermitian(rng, d), random_hermitian(rng, d))
            worst = min(worst, rep.slack / rep.scale)
        assert worst >= -1e-10

    def test_weak_robertson(self, rng):
        for _ in range(200):
            d = int(rng.integers(2, 9))
            psi, a, b = random_state(rng, d), random_hermitian(rng, d), random_hermitian(rng, d)
            lhs = np.sqrt(variance(psi, a) * variance(psi, b))
            assert lhs >= 0.5 * commutator_mean_abs(psi, a, b) - 1e-10


@st.composite
def instances(draw):
    d = draw(st.integers(2, 8))
    seed = draw(st.integers(0, 2**32 - 1))
    scale = draw(st.floats(1e-3, 1e3))
    rng = np.random.default_rng(seed)
    return random_state(rng, d), scale * random_hermitian(rng, d), random_hermitian(rng, d)


@settings(max_examples=200, deadline=None)
@given(instances())
def test_property_moments(inst):
    psi, a, b = inst
    assert variance(psi, a) >= 0.0
    assert covariance(psi, a, b) == covariance(psi, b, a)
    c = np.vdot(psi, (a @ b - b @ a) @ psi)
    assert abs(c.real) <= 1e-10 * max(1.0, np.linalg.norm(a, 2) * np.linalg.norm(b, 2))
    assert check_schrodinger_robertson(psi, a, b).holds(1e-10)
    assert check_sum_uncertainty(psi, a, b).holds(1e-10)
