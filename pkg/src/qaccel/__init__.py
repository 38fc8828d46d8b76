"""Numerical checks of speed and acceleration limits for driven quantum systems.

The package propagates pure states under time-dependent Hamiltonians and
evaluates, along the resulting trajectories, the Fubini-Study speed and
acceleration, the bounds that limit them, and run-time certificates for
adiabatic sweeps.
"""

from .adiabatic import AdiabaticSpec, audit, fidelity_curve, ground_state
from .bounds import BoundReport
from .geometry import (acceleration_bound_series, fs_geodesic_distance, geometry_series, mt_qsl_report,
                       path_geodesic_report, path_length, qal_pointwise_check, qal_time, qal_time_corrected_report,
                       qal_time_report)
from .operators import (SIGMA_X, SIGMA_Y, SIGMA_Z, HermitianOperator, QuantumState, commutator, covariance,
                        expectation, uncertainty, variance)
from .propagator import TimeGrid, Trajectory, propagate, propagate_commuting_oracle
from .schedules import (HamiltonianSchedule, ScalarSchedule, make_adiabatic, make_constant, make_linear_parametric,
                        make_two_level_drive)

__version__ = "0.1.0"

__all__ = [
    "AdiabaticSpec", "BoundReport", "HamiltonianSchedule", "HermitianOperator", "QuantumState",
    "SIGMA_X", "SIGMA_Y", "SIGMA_Z", "ScalarSchedule", "TimeGrid", "Trajectory",
    "acceleration_bound_series", "audit", "commutator", "covariance", "expectation", "fidelity_curve",
    "fs_geodesic_distance", "geometry_series", "ground_state", "make_adiabatic", "make_constant",
    "make_linear_parametric", "make_two_level_drive", "mt_qsl_report", "path_geodesic_report", "path_length",
    "propagate", "propagate_commuting_oracle", "qal_pointwise_check", "qal_time", "qal_time_corrected_report",
    "qal_time_report", "uncertainty", "variance",
]
