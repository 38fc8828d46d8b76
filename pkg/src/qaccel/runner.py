"""
Scenario execution and report emission.

Every entry point returns a ``RunArtifacts`` holding plain tables and a
summary dict; ``write`` renders them as CSV (17 significant digits), JSON and
a short text block. Nothing time- or host-dependent is written, so the same
inputs reproduce the same bytes.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import adiabatic, geometry
from .bounds import BoundReport
from .config import ScenarioConfig
from .ensembles import random_hermitian, random_state
from .operators import check_schrodinger_robertson, check_sum_uncertainty
from .propagator import TimeGrid, convergence_order, propagate, reference_final_state, step_errors

DEFAULT_TOLERANCE = 1e-8
# zero-speed samples take the acceleration from finite differences, which is only O(dt^2) accurate
NUMERIC_ACCEL_TOL = 1e-6
SWEEP_CHECKS = ("schrodinger-robertson", "sum-uncertainty", "accel-limit-squared", "accel-limit")
SERIES_HEADER = ("t", "deltaH", "deltaHdot", "V", "a_analytic", "a_numeric", "S_cum",
                 "sq_limit_slack", "limit_slack")
EXPECTED_ORDER = {"midpoint": 1.9, "rk4": 3.8}

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else format(float(x), ".17g")
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, complex):
        return {"real": obj.real, "imag": obj.imag}
    return obj


@dataclass
class Table:
    header: tuple
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.header) + "\n")
        for row in self.rows:
            buf.write(",".join(fmt(v) for v in row) + "\n")
        return buf.getvalue()


@dataclass
class RunArtifacts:
    name: str
    tables: dict
    summary: dict
    exit_code: int = EXIT_OK
    worst: str | None = None

    def text(self) -> str:
        lines = [f"== {self.name} =="]
        for line in self.summary.get("lines", []):
            lines.append("  " + line)
        lines.append(f"  status: {'OK' if self.exit_code == EXIT_OK else 'BOUND VIOLATION'}"
                     + (f" (worst: {self.worst})" if self.worst else ""))
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for key, table in self.tables.items():
            p = out / f"{self.name}_{key}.csv"
            p.write_text(table.to_csv())
            written.append(p)
        p = out / f"{self.name}_summary.json"
        doc = dict(self.summary, exit_code=self.exit_code, worst_offender=self.worst)
        p.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
        written.append(p)
        p = out / f"{self.name}_summary.txt"
        p.write_text(self.text())
        written.append(p)
        return written


class _Gate:
    """Collects gated slacks; remembers the worst violation relative to its tolerance."""

    def __init__(self):
        self.violated = False
        self.worst = None
        self._worst_excess = 0.0

    def add(self, label: str, slack: float, scale: float, tol: float):
        if math.isnan(slack):
            return
        limit = tol * scale
        if slack < -limit:
            self.violated = True
            excess = -slack / limit if limit > 0 else math.inf
            if self.worst is None or excess > self._worst_excess:
                self.worst, self._worst_excess = label, excess

    def add_report(self, rep: BoundReport, tol: float):
        if rep.applicable:
            self.add(f"{rep.label} (slack {rep.slack:.3e})", rep.slack, rep.scale, tol)

    def fail(self, label: str):
        self.violated = True
        if self.worst is None:
            self.worst, self._worst_excess = label, math.inf


def _report_row(rep: BoundReport, context="") -> list:
    return [rep.label, rep.relation, rep.lhs, rep.rhs, rep.slack, rep.saturated, rep.status, context, rep.note]


BOUND_HEADER = ("label", "relation", "lhs", "rhs", "slack", "saturated", "status", "context", "note")


def run_scenario(cfg: ScenarioConfig, *, tolerance: float | None = None, n_steps: int | None = None,
                 method: str | None = None) -> RunArtifacts:
    """Simulate one scenario and evaluate the requested checks."""
    tol = tolerance if tolerance is not None else (cfg.tolerance or DEFAULT_TOLERANCE)
    steps = n_steps or cfg.n_steps
    stride = cfg.stride if steps % cfg.stride == 0 else 1
    schedule = cfg.build_schedule()
    psi0 = cfg.initial_state()
    traj = propagate(schedule, psi0, TimeGrid(cfg.T, steps, stride), method or cfg.method, hbar=cfg.hbar)
    checks = cfg.default_checks()
    gate = _Gate()
    bounds = Table(BOUND_HEADER)
    geo = geometry.geometry_series(traj)
    acc = geometry.acceleration_bound_series(traj)
    lines = [f"family {cfg.family}, dim {schedule.dim}, T = {cfg.T:.10g}, {steps} steps, "
             f"method {traj.method}, hbar = {cfg.hbar:g}"]
    diagnostics = {
        "path_length": float(geo.path[-1]),
        "geodesic_distance": geometry.fs_geodesic_distance(traj.initial_state, traj.final_state),
        "final_norm": float(np.linalg.norm(traj.final_state)),
        "gamma": geometry.rate_fluctuation_mean(traj),
        "T_QAL": geo.t_qal,
        "max_abs_accel": float(np.max(np.abs(traj.accel))),
    }

    if "accel-limit" in checks:
        numeric_pts = ~np.isfinite(traj.accel_analytic)
        for k in range(len(traj)):
            ptol = NUMERIC_ACCEL_TOL if numeric_pts[k] else tol
            gate.add(f"accel-limit at t = {traj.times[k]:.6g} (slack {acc.slack[k]:.3e})", acc.slack[k], acc.scale[k], ptol)
            if not numeric_pts[k]:
                gate.add(f"accel-limit-squared at t = {traj.times[k]:.6g} (slack {acc.sq_slack[k]:.3e})", acc.sq_slack[k], acc.sq_scale[k], tol)
        for label, slack, scale, lhs, rhs in (
                ("accel-limit", acc.slack, acc.scale, acc.lhs, acc.rhs),
                ("accel-limit-squared", acc.sq_slack, acc.sq_scale, acc.sq_lhs, acc.sq_rhs)):
            rel = slack / scale
            if np.all(np.isnan(rel)):
                bounds.rows.append([label, "<=", math.nan, math.nan, math.nan, False, "not-applicable", "", ""])
                continue
            k = int(np.nanargmin(rel))
            saturated = np.abs(rel) <= 1e-6
            n_sat = int(np.sum(saturated))
            n_eval = int(np.sum(~np.isnan(rel)))
            rep = BoundReport(label, float(lhs[k]), float(rhs[k]))
            bounds.rows.append(_report_row(rep, f"worst at t = {fmt(traj.times[k])}")
                               [:-1] + [f"saturated at {n_sat}/{n_eval} samples"])
            diagnostics[f"{label}_min_slack"] = float(np.nanmin(slack))
            diagnostics[f"{label}_saturated_samples"] = n_sat
            diagnostics[f"{label}_evaluated_samples"] = n_eval
            lines.append(f"{label}: min slack {np.nanmin(slack):.3e}, saturated at {n_sat}/{n_eval} samples")

    if "qal-time" in checks:
        printed = geometry.qal_time_report(traj)
        corrected = geometry.qal_time_corrected_report(traj)
        qtol = max(tol, 1e-6)
        # the printed form assumes the run starts at rest; it is only gated when V(0) = 0
        if printed.applicable and not printed.note:
            gate.add_report(printed, qtol)
        gate.add_report(corrected, qtol)
        for rep in (printed, corrected):
            bounds.rows.append(_report_row(rep, "run"))
            lines.append(str(rep))
        if printed.applicable and printed.note:
            diagnostics["qal_time_forms_differ"] = True

    if "mt-qsl" in checks:
        rep = geometry.mt_qsl_report(traj)
        gate.add_report(rep, tol)
        bounds.rows.append(_report_row(rep, "run"))
        lines.append(str(rep))

    if "path-geodesic" in checks:
        rep = geometry.path_geodesic_report(traj)
        gate.add_report(rep, tol)
        bounds.rows.append(_report_row(rep, "run"))
        lines.append(str(rep))

    if "covariance-identity" in checks and len(traj) >= 3:
        resid = geometry.covariance_identity_residual(traj)
        diagnostics["covariance_identity_residual"] = resid
        lines.append(f"covariance identity residual (central differences): {resid:.3e}")

    tables = {}
    series = Table(SERIES_HEADER)
    gaps = None
    if cfg.family == "adiabatic":
        series = Table(SERIES_HEADER + ("gap",))
        spec = cfg.adiabatic_spec()
        gaps = adiabatic.gap_series(spec, traj.times)
        if "audit" in checks:
            lower = adiabatic.runtime_lower_certificate(spec, traj)
            upper = adiabatic.runtime_upper_certificate(spec, traj)
            ident = adiabatic.rate_fluctuation_identity_check(spec, traj)
            comm_dev = adiabatic.commutator_reduction_deviation(spec, traj.times)
            atol = max(tol, 1e-6)
            gate.add_report(lower, atol)
            gate.add_report(upper, atol)
            gate.add("rate-fluctuation-identity", -ident.lhs, 1.0, 1e-10)
            gate.add("commutator-reduction", -comm_dev, 1.0, 1e-10)
            gate.add("sum-uncertainty", upper.extra["sum_uncertainty_min_slack"], 1.0, tol)
            for rep in (lower, upper, ident):
                bounds.rows.append(_report_row(rep, "run"))
                lines.append(str(rep))
            diagnostics.update({
                "fidelity": adiabatic.ground_space_fidelity(spec.HF, traj.final_state),
                "commutator_reduction_deviation": comm_dev,
                "lower_excluded_samples": lower.extra.get("n_excluded", 0),
                "sum_uncertainty_min_slack": upper.extra["sum_uncertainty_min_slack"],
                "min_gap": float(np.min(gaps)),
            })
            lines.append(f"final ground-state fidelity {diagnostics['fidelity']:.10g}, min gap {np.min(gaps):.10g}")

    for k in range(len(traj)):
        row = [traj.times[k], traj.delta_h[k], traj.delta_hdot[k], traj.speed[k], traj.accel_analytic[k],
               geo.accel_numeric[k], geo.path[k], acc.sq_slack[k], acc.slack[k]]
        if gaps is not None:
            row.append(gaps[k])
        series.rows.append(row)
    tables["series"] = series
    tables["bounds"] = bounds
    summary = {"scenario": cfg.describe(), "diagnostics": diagnostics, "lines": lines}
    return RunArtifacts(cfg.name, tables, summary, EXIT_VIOLATION if gate.violated else EXIT_OK, gate.worst)


def _sweep_instance(check: str, rng: np.random.Generator, dim: int, hbar: float):
    psi = random_state(rng, dim)
    a = random_hermitian(rng, dim)
    b = random_hermitian(rng, dim)
    if check == "schrodinger-robertson":
        return check_schrodinger_robertson(psi, a, b), psi, a, b, None
    if check == "sum-uncertainty":
        return check_sum_uncertainty(psi, a, b), psi, a, b, None
    squared, plain = geometry.qal_pointwise_check(psi, a, b, hbar=hbar)
    rep = squared if check == "accel-limit-squared" else plain
    # dominance: the squared bound's right side never exceeds the square of the plain bound's
    dominance = plain.rhs**2 - squared.rhs
    return rep, psi, a, b, dominance


def random_sweep(seed: int, dims, count: int, checks=SWEEP_CHECKS, *, hbar: float = 1.0,
                 tolerance: float = DEFAULT_TOLERANCE) -> RunArtifacts:
    """Evaluate each inequality on ``count`` seeded random instances per check.

    Instance ``i`` uses dimension ``dims[i % len(dims)]``; every check draws
    from its own generator seeded by ``(seed, check index)``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    dims = [int(d) for d in dims]
    if not dims or min(dims) < 1:
        raise ValueError("dims must be a non-empty list of positive integers")
    instances = Table(("check", "index", "dim", "lhs", "rhs", "slack", "scale", "relative_slack", "dominance"))
    per_check = {}
    gate = _Gate()
    logged = []
    for ci, check in enumerate(checks):
        if check not in SWEEP_CHECKS:
            raise ValueError(f"unknown sweep check {check!r}")
        rng = np.random.default_rng([seed, ci])
        rel = []
        dom = []
        for i in range(count):
            dim = dims[i % len(dims)]
            rep, psi, a, b, dominance = _sweep_instance(check, rng, dim, hbar)
            gate.add(f"{check} instance {i} (dim {dim})", rep.slack, rep.scale, tolerance)
            rel.append(rep.slack / rep.scale)
            if dominance is not None:
                dom.append(dominance)
            instances.rows.append([check, i, dim, rep.lhs, rep.rhs, rep.slack, rep.scale, rep.slack / rep.scale,
                                   dominance])
            if count == 1:
                logged.append({"check": check, "dim": dim, "state": psi, "A": a, "B": b, "report": rep.as_dict()})
        rel = np.array(rel)
        stats = {
            "count": count,
            "min_relative_slack": float(rel.min()),
            "mean_relative_slack": float(rel.mean()),
            "quantiles": {str(q): float(np.quantile(rel, q)) for q in (0.0, 0.01, 0.5, 0.99, 1.0)},
            "violations": int(np.sum(rel < -tolerance)),
        }
        if dom:
            stats["min_dominance_gap"] = float(min(dom))
            if min(dom) < -tolerance:
                gate.fail(f"{check}: dominance of the plain bound fails")
        per_check[check] = stats
    lines = [f"{c}: min relative slack {s['min_relative_slack']:.3e}, violations {s['violations']}"
             for c, s in per_check.items()]
    summary = {"seed": seed, "dims": dims, "count": count, "tolerance": tolerance, "checks": per_check,
               "lines": lines}
    if logged:
        summary["instances"] = logged
    return RunArtifacts("sweep", {"instances": instances}, summary,
                        EXIT_VIOLATION if gate.violated else EXIT_OK, gate.worst)


def run_audit(cfg: ScenarioConfig, runtimes, *, n_steps: int | None = None, method: str | None = None,
              tolerance: float = 1e-6) -> RunArtifacts:
    """Adiabatic certificates for each run time in ``runtimes``."""
    spec = cfg.adiabatic_spec()
    table = Table(("T", "n_steps", "fidelity", "lower_certificate", "lower_status", "lower_excluded",
                   "upper_certificate", "upper_status", "rate_identity_deviation", "commutator_deviation",
                   "sum_uncertainty_min_slack", "min_gap", "sandwich_holds"))
    gate = _Gate()
    results = []
    for T in runtimes:
        sp = spec.with_runtime(float(T))
        rep = adiabatic.audit(sp, n_steps, 1, method or cfg.method, hbar=cfg.hbar)
        s = rep.summary()
        results.append(s)
        table.rows.append([sp.T, len(rep.trajectory) - 1, rep.fidelity,
                           rep.lower.lhs if rep.lower.applicable else math.nan, rep.lower.status,
                           rep.lower.extra.get("n_excluded", 0),
                           rep.upper.rhs if rep.upper.applicable else math.nan, rep.upper.status,
                           rep.rate_identity.lhs, rep.commutator_deviation, rep.sum_uncertainty_min_slack,
                           rep.min_gap, rep.sandwich_holds])
        gate.add_report(BoundReport(f"runtime-lower T={T:g}", rep.lower.lhs, sp.T, status=rep.lower.status),
                        tolerance)
        gate.add_report(BoundReport(f"runtime-upper T={T:g}", sp.T, rep.upper.rhs, status=rep.upper.status),
                        tolerance)
        gate.add(f"rate-fluctuation-identity T={T:g}", -rep.rate_identity.lhs, 1.0, 1e-10)
        gate.add(f"commutator-reduction T={T:g}", -rep.commutator_deviation, 1.0, 1e-10)
    lines = [f"T = {r['T']:g}: fidelity {r['fidelity']:.8f}, lower {fmt(r['lower_certificate'])}, "
             f"upper {fmt(r['upper_certificate'])}" for r in results]
    summary = {"scenario": cfg.describe(), "runtimes": [float(t) for t in runtimes], "audits": results,
               "lines": lines}
    return RunArtifacts(f"{cfg.name}_audit", {"runtimes": table}, summary,
                        EXIT_VIOLATION if gate.violated else EXIT_OK, gate.worst)


def run_convergence(cfg: ScenarioConfig, *, n_base: int = 64, methods=("midpoint", "rk4")) -> RunArtifacts:
    """Observed order of each stepper against the commuting oracle or a fine RK4 reference."""
    schedule = cfg.build_schedule()
    psi0 = cfg.initial_state()
    steps = [n_base, 2 * n_base, 4 * n_base]
    reference = reference_final_state(schedule, psi0, cfg.T, 64 * steps[-1], hbar=cfg.hbar)
    table = Table(("method", "n_steps", "error"))
    orders = {}
    gate = _Gate()
    for m in methods:
        errs = step_errors(schedule, psi0, cfg.T, steps, m, reference=reference, hbar=cfg.hbar)
        for n, e in zip(steps, errs):
            table.rows.append([m, n, e])
        order = convergence_order(schedule, psi0, cfg.T, m, n_base=n_base, reference=reference, hbar=cfg.hbar)
        orders[m] = order
        if not math.isnan(order):
            gate.add(f"{m} order {order:.3f}", order - EXPECTED_ORDER[m], 1.0, 0.0)
    lines = [f"{m}: observed order {fmt(o)} (expected >= {EXPECTED_ORDER[m]})" for m, o in orders.items()]
    summary = {"scenario": cfg.describe(), "steps": steps, "orders": orders,
               "reference": "commuting oracle" if schedule.commuting_family else "rk4, 64x finest grid",
               "lines": lines}
    return RunArtifacts(f"{cfg.name}_convergence", {"orders": table}, summary,
                        EXIT_VIOLATION if gate.violated else EXIT_OK, gate.worst)
