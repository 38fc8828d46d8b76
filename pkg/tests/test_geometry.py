import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian, random_rest_schedule, random_schedule, random_state
from qaccel.geometry import (UnreachableTargetError, ZeroSpeedError, acceleration_analytic, acceleration_bound_series,
                             acceleration_numeric, covariance_identity_residual, fs_geodesic_distance,
                             fs_overlap_ratio, geometry_series, integrate_samples, mean_delta_h, mt_qsl_report,
                             mt_qsl_time, path_geodesic_report, path_length, qal_pointwise_check, qal_time,
                             qal_time_corrected_report, qal_time_report, quadrature_refinement,
                             rate_fluctuation_mean, speed)
from qaccel.operators import SIGMA_X, SIGMA_Y, SIGMA_Z
from qaccel.propagator import TimeGrid, propagate
from qaccel.schedules import ScalarSchedule, make_constant, make_linear_parametric, make_two_level_drive

PLUS = np.array([1, 1]) / np.sqrt(2)


def drive_run(T, n=4096, stride=1, hbar=1.0):
    sched = make_two_level_drive(ScalarSchedule.sine(), T)
    return propagate(sched, [1, 0], TimeGrid(T, n, stride), hbar=hbar)


class TestGeodesic:
    def test_examples(self):
        assert fs_geodesic_distance([1, 0], [0, 1]) == pytest.approx(math.pi)
        assert fs_geodesic_distance([1, 0], [1, 0]) == 0.0
        assert fs_geodesic_distance([1, 0], PLUS) == pytest.approx(math.pi / 2)

    def test_phase_invariant(self, rng):
        a, b = random_state(rng, 4), random_state(rng, 4)
        assert fs_geodesic_distance(a, b) == pytest.approx(fs_geodesic_distance(np.exp(0.7j) * a, b), abs=1e-14)

    def test_overlap_clipping(self):
        assert fs_geodesic_distance([1 + 1e-16, 0], [1, 0]) == 0.0

    def test_triangle_inequality(self, rng):
        for _ in range(100):
            a, b, c = (random_state(rng, 3) for _ in range(3))
            assert fs_geodesic_distance(a, c) <= fs_geodesic_distance(a, b) + fs_geodesic_distance(b, c) + 1e-12


class TestSpeedAndPath:
    def test_speed_examples(self):
        assert speed([1, 0], SIGMA_X) == pytest.approx(2.0)
        assert speed([1, 0], SIGMA_Z) == 0.0
        assert speed([1, 0], SIGMA_X, hbar=2.0) == pytest.approx(1.0)

    def test_drive_path_length(self):
        traj = drive_run(math.pi)
        assert path_length(traj) == pytest.approx(4.0, abs=1e-10)

    def test_constant_path_length(self):
        traj = propagate(make_constant(SIGMA_Z, 3.0), PLUS, TimeGrid(3.0, 64))
        assert path_length(traj) == pytest.approx(6.0, abs=1e-12)

    def test_cumulative_series(self):
        traj = drive_run(math.pi, n=1024)
        series = geometry_series(traj)
        np.testing.assert_allclose(series.path, 2 * (1 - np.cos(traj.times)), atol=1e-8)

    def test_integrate_samples(self):
        t = np.linspace(0, 1, 5)
        assert integrate_samples(t**3, t) == pytest.approx(0.25, abs=1e-15)
        assert integrate_samples([1.0, 3.0], [0.0, 2.0]) == 4.0
        with pytest.raises(ValueError):
            integrate_samples([1.0], [0.0])

    def test_quadrature_refinement(self):
        t = np.linspace(0, math.pi, 1025)
        assert quadrature_refinement(np.sin(t), t) < 1e-10
        assert math.isnan(quadrature_refinement(np.sin(t[:4]), t[:4]))

    def test_path_never_shorter_than_geodesic(self, rng):
        for _ in range(5):
            sched = random_schedule(rng, 3, T=1.0)
            rep = path_geodesic_report(propagate(sched, random_state(rng, 3), TimeGrid(1.0, 256)))
            assert rep.relation == ">=" and rep.holds(1e-10)

    def test_geodesic_evolution_saturates(self):
        # sigma_z rotates |+> along a great circle: path = geodesic until antipode
        T = math.pi / 2
        rep = path_geodesic_report(propagate(make_constant(SIGMA_Z, T), PLUS, TimeGrid(T, 256)))
        assert rep.slack == pytest.approx(0.0, abs=1e-10) and rep.saturated


class TestAcceleration:
    def test_analytic_example(self):
        # H = sigma_x, Hdot = sigma_x on |0>: V = 2, Cov = 1, a = 2
        assert acceleration_analytic([1, 0], SIGMA_X, SIGMA_X) == pytest.approx(2.0)
        assert acceleration_analytic([1, 0], SIGMA_X, SIGMA_Y) == pytest.approx(0.0, abs=1e-15)

    def test_zero_speed_raises(self):
        with pytest.raises(ZeroSpeedError):
            acceleration_analytic([1, 0], SIGMA_Z, SIGMA_X)

    def test_numeric_second_order(self):
        for n, tol in [(101, 1e-3), (1001, 1e-5)]:
            t = np.linspace(0, 1, n)
            assert np.abs(acceleration_numeric(np.sin(t), t[1] - t[0]) - np.cos(t)).max() < tol

    def test_drive_acceleration_matches_closed_form(self):
        traj = drive_run(math.pi / 2)
        expected = 2 * np.cos(traj.times)
        moving = np.isfinite(traj.accel_analytic)
        assert np.abs(traj.accel_analytic[moving] - expected[moving]).max() < 1e-12
        assert np.abs(traj.accel - expected).max() < 1e-6

    def test_analytic_vs_numeric_noncommuting(self, rng):
        sched = random_schedule(rng, 3, T=1.0)
        traj = propagate(sched, random_state(rng, 3), TimeGrid(1.0, 4096))
        numeric = acceleration_numeric(traj.speed, traj.grid.sample_dt)
        assert np.abs(numeric - traj.accel_analytic)[1:-1].max() < 1e-5

    def test_pointwise_check_saturated_qubit(self):
        squared, plain = qal_pointwise_check([1, 0], SIGMA_X, SIGMA_X)
        assert plain.lhs == pytest.approx(2.0) and plain.rhs == pytest.approx(2.0)
        assert squared.saturated and plain.saturated

    def test_pointwise_commutator_term(self):
        squared, plain = qal_pointwise_check([1, 0], SIGMA_X, SIGMA_Y)
        # a = 0, dHdot = 1, |<[X,Y]>| = 2, dH = 1: rhs = 4 - 4 = 0
        assert squared.rhs == pytest.approx(0.0, abs=1e-14) and squared.lhs == pytest.approx(0.0, abs=1e-28)
        assert squared.extra["commutator_term"] == pytest.approx(4.0)

    def test_pointwise_zero_speed(self):
        squared, plain = qal_pointwise_check([1, 0], SIGMA_Z, SIGMA_X)
        assert not squared.applicable and not plain.applicable
        squared, plain = qal_pointwise_check([1, 0], SIGMA_Z, SIGMA_X, accel=1.5)
        assert not squared.applicable and plain.holds() and plain.lhs == 1.5

    def test_series_matches_pointwise(self, rng):
        sched = random_schedule(rng, 4, T=1.0)
        traj = propagate(sched, random_state(rng, 4), TimeGrid(1.0, 64, 16))
        series = acceleration_bound_series(traj)
        for k, t in enumerate(traj.times):
            sq, pl = qal_pointwise_check(traj.states[k], sched.evaluate(t), sched.derivative(t))
            assert sq.rhs == pytest.approx(series.sq_rhs[k], rel=1e-10, abs=1e-12)
            assert pl.lhs == pytest.approx(series.lhs[k], rel=1e-10)
        assert (series.sq_slack >= -1e-10 * series.sq_scale).all()
        assert (series.slack >= -1e-10 * series.scale).all()

    def test_squared_form_dominates(self, rng):
        sched = random_schedule(rng, 5, T=1.0)
        traj = propagate(sched, random_state(rng, 5), TimeGrid(1.0, 64, 8))
        s = acceleration_bound_series(traj)
        assert (s.rhs**2 - s.sq_rhs >= -1e-12).all()


class TestMandelstamTamm:
    def test_prefactor_oracle(self):
        # sigma_z from |+>: dH = 1 and S0 = 2t, so hbar S0 / (2 dH) equals the elapsed time
        for T in [0.3, 1.0, math.pi / 2]:
            traj = propagate(make_constant(SIGMA_Z, T), PLUS, TimeGrid(T, 128))
            rep = mt_qsl_report(traj)
            assert rep.lhs == pytest.approx(T, abs=1e-12)
            assert rep.holds(1e-10)

    def test_printed_prefactor_would_exceed_elapsed_time(self):
        T = 1.0
        traj = propagate(make_constant(SIGMA_Z, T), PLUS, TimeGrid(T, 128))
        s0 = fs_geodesic_distance(traj.initial_state, traj.final_state)
        assert s0 / mean_delta_h(traj) == pytest.approx(2 * T) and 2 * T > T

    def test_unreachable(self):
        with pytest.raises(UnreachableTargetError):
            mt_qsl_time([1, 0], [0, 1], 0.0)
        assert mt_qsl_time([1, 0], [1, 0], 0.0) == 0.0

    def test_holds_on_random_runs(self, rng):
        for d in (2, 3, 6):
            sched = random_schedule(rng, d, T=1.0)
            assert mt_qsl_report(propagate(sched, random_state(rng, d), TimeGrid(1.0, 512))).holds(1e-8)


class TestAccelerationTime:
    @pytest.mark.parametrize("T", [0.5, 1.0, math.pi / 2])
    def test_two_level_saturation(self, T):
        traj = drive_run(T)
        assert rate_fluctuation_mean(traj) == pytest.approx(math.sin(T) / T, rel=1e-12)
        assert qal_time(traj) == pytest.approx(T, rel=1e-6)
        rep = qal_time_report(traj)
        assert rep.holds(1e-8) and rep.saturated and rep.note == ""

    def test_two_level_past_turnaround_is_strict(self):
        traj = drive_run(math.pi)
        assert qal_time(traj) < math.pi - 0.1

    def test_linear_parametric_saturation(self, rng):
        h0 = random_hermitian(rng, 4)
        w, v = np.linalg.eigh(h0)
        psi0 = (v[:, 0] + v[:, -1]) / np.sqrt(2)
        sched = make_linear_parametric(ScalarSchedule.quadratic(1.0), h0, T=1.0)
        traj = propagate(sched, psi0, TimeGrid(1.0, 4096))
        assert abs(qal_time(traj) - 1.0) <= 1e-6

    def test_constant_hamiltonian_undefined(self):
        traj = propagate(make_constant(SIGMA_Z, 1.0), PLUS, TimeGrid(1.0, 16))
        assert qal_time_report(traj).status == "undefined"
        assert qal_time_corrected_report(traj).status == "undefined"
        with pytest.raises(ZeroDivisionError):
            qal_time(traj)
        assert math.isnan(geometry_series(traj).t_qal)

    def test_running_gamma(self):
        traj = drive_run(1.0, n=1024)
        series = geometry_series(traj)
        t = traj.times[1:]
        np.testing.assert_allclose(series.gamma_running[1:], np.sin(t) / t, rtol=1e-8)
        assert series.gamma_running[0] == pytest.approx(1.0)

    def test_moving_start_noted(self, rng):
        sched = random_schedule(rng, 3)
        rep = qal_time_report(propagate(sched, random_state(rng, 3), TimeGrid(1.0, 64)))
        assert "V(0)" in rep.note

    def test_corrected_form_universal(self, rng):
        for _ in range(10):
            d = int(rng.integers(2, 6))
            sched = random_schedule(rng, d, T=float(rng.uniform(0.3, 2.0)))
            traj = propagate(sched, random_state(rng, d), TimeGrid(sched.T, 512))
            assert qal_time_corrected_report(traj).holds(1e-8)


class TestCovarianceIdentity:
    def test_residual_second_order(self, rng):
        sched = random_schedule(rng, 3, T=1.0)
        psi = random_state(rng, 3)
        r = [covariance_identity_residual(propagate(sched, psi, TimeGrid(1.0, n))) for n in (128, 256, 512)]
        assert math.log2(r[0] / r[2]) / 2 >= 1.9

    def test_two_level_exact_form(self):
        traj = drive_run(1.0, n=1024)
        assert covariance_identity_residual(traj) < 1e-5


class TestOverlapRatio:
    def test_first_order_convergence(self, rng):
        sched = random_schedule(rng, 3, T=1.0)
        psi = random_state(rng, 3)
        errs = [abs(fs_overlap_ratio(sched, psi, 0.3, dt) - 1) for dt in (1e-2, 5e-3, 2.5e-3)]
        assert errs[0] > errs[1] > errs[2]
        assert math.log2(errs[0] / errs[2]) / 2 >= 0.9

    def test_constant_sigma_z(self):
        ratio = fs_overlap_ratio(make_constant(SIGMA_Z, 1.0), PLUS, 0.0, 1e-3)
        # 4 sin^2(dt) / (4 dt^2) for this rotation
        assert ratio == pytest.approx(math.sin(1e-3) ** 2 / 1e-6, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 5), st.floats(0.2, 2.0))
def test_property_acceleration_time_from_rest(seed, dim, T):
    rng = np.random.default_rng(seed)
    sched, psi0 = random_rest_schedule(rng, dim, T)
    traj = propagate(sched, psi0, TimeGrid(T, 512))
    assert traj.speed[0] < 1e-6
    assert qal_time_report(traj).holds(1e-7)
    assert qal_time_corrected_report(traj).holds(1e-7)
    assert path_geodesic_report(traj).holds(1e-7)
    assert mt_qsl_report(traj).holds(1e-7)
