"""
Scenario files.

Two interchangeable formats are accepted. JSON objects::

    {"name": "two_level_sine", "family": "two-level-drive",
     "scalar": {"form": "sine", "coeffs": [1, 1]},
     "T": 1.5707963267948966, "n_steps": 4096,
     "matrices": {"H0": {"real": [[1, 0], [0, -1]], "imag": [[0, 0], [0, 0]]}}}

and a line-oriented ``key = value`` text format with matrix blocks::

    # comment
    family = linear-parametric
    scalar = quadratic 0 0 1
    matrix H0
      1   0
      0  -1
    end

Matrix entries in text blocks are Python complex literals (``0.5``, ``-1j``,
``0.3+0.1j``). See the README for the full key list.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .adiabatic import AdiabaticSpec, DegenerateGroundStateError, ground_state
from .operators import SIGMA_X, HermitianOperator, NotHermitianError
from .schedules import (HamiltonianSchedule, ScalarSchedule, ScheduleError, make_constant,
                        make_linear_parametric, make_two_level_drive)

FAMILIES = ("two-level-drive", "linear-parametric", "adiabatic", "tabulated", "constant")
CHECKS = ("accel-limit", "qal-time", "mt-qsl", "path-geodesic", "covariance-identity", "audit")
_REQUIRED_MATRICES = {
    "two-level-drive": (),
    "linear-parametric": ("H0",),
    "adiabatic": ("HI", "HF"),
    "tabulated": (),
    "constant": ("H",),
}
_SCALAR_KEYS = ("name", "family", "scalar", "table", "T", "n_steps", "stride", "method", "hbar",
                "psi0", "checks", "seed", "tolerance")


class ConfigError(ValueError):
    """Malformed scenario; the message names the file, line or field."""


@dataclass
class ScenarioConfig:
    name: str
    family: str
    T: float
    n_steps: int = 4096
    stride: int = 1
    method: str = "midpoint"
    hbar: float = 1.0
    scalar: tuple | None = None
    table: Path | None = None
    matrices: dict = field(default_factory=dict)
    psi0: object = None
    checks: tuple = ()
    seed: int | None = None
    tolerance: float | None = None
    source: str = "<memory>"

    def __post_init__(self):
        self.validate()

    def _fail(self, msg: str):
        raise ConfigError(f"{self.source}: {msg}")

    def validate(self):
        if self.family not in FAMILIES:
            self._fail(f"field 'family': unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if not (isinstance(self.T, (int, float)) and math.isfinite(self.T) and self.T > 0):
            self._fail(f"field 'T': must be a positive number, got {self.T!r}")
        if self.n_steps < 1 or self.stride < 1 or self.n_steps % self.stride:
            self._fail(f"fields 'n_steps'/'stride': need positive n_steps divisible by stride, "
                       f"got {self.n_steps}/{self.stride}")
        if not self.hbar > 0:
            self._fail(f"field 'hbar': must be positive, got {self.hbar!r}")
        if self.method not in ("midpoint", "midpoint-exponential", "rk4"):
            self._fail(f"field 'method': unknown method {self.method!r}")
        for name in _REQUIRED_MATRICES[self.family]:
            if name not in self.matrices:
                self._fail(f"family {self.family!r} needs matrix {name!r}")
        for name, m in self.matrices.items():
            try:
                self.matrices[name] = HermitianOperator(m).matrix
            except (NotHermitianError, ValueError) as exc:
                self._fail(f"matrix {name!r}: {exc}")
        dims = {m.shape[0] for m in self.matrices.values()}
        if len(dims) > 1:
            self._fail(f"matrices have inconsistent dimensions {sorted(dims)}")
        if self.family in ("two-level-drive", "linear-parametric") and self.scalar is None and self.table is None:
            self._fail(f"family {self.family!r} needs a 'scalar' descriptor or a 'table'")
        if self.family == "tabulated" and self.table is None:
            self._fail("family 'tabulated' needs a 'table' path")
        bad = [c for c in self.checks if c not in CHECKS]
        if bad:
            self._fail(f"field 'checks': unknown check(s) {', '.join(bad)}; choose from {', '.join(CHECKS)}")

    @property
    def dim(self) -> int:
        if self.family in ("two-level-drive",):
            return 2
        if self.matrices:
            return next(iter(self.matrices.values())).shape[0]
        return 2

    def scalar_schedule(self) -> ScalarSchedule | None:
        try:
            if self.table is not None:
                return ScalarSchedule.from_table(self.table)
            if self.scalar is not None:
                form, coeffs = self.scalar
                return ScalarSchedule.from_descriptor(form, coeffs)
        except (ScheduleError, OSError) as exc:
            self._fail(f"scalar schedule: {exc}")
        return None

    def adiabatic_spec(self) -> AdiabaticSpec:
        if self.family != "adiabatic":
            self._fail("not an adiabatic scenario")
        try:
            return AdiabaticSpec(self.matrices["HI"], self.matrices["HF"], self.T, self.scalar_schedule())
        except (ScheduleError, DegenerateGroundStateError, ValueError) as exc:
            self._fail(str(exc))

    def build_schedule(self) -> HamiltonianSchedule:
        fam = self.family
        try:
            if fam == "constant":
                return make_constant(self.matrices["H"], self.T)
            if fam == "adiabatic":
                return self.adiabatic_spec().schedule()
            lam = self.scalar_schedule()
            if fam == "two-level-drive":
                return make_two_level_drive(lam, self.T)
            h0 = self.matrices.get("H0", SIGMA_X.matrix)
            return make_linear_parametric(lam, h0, self.T)
        except ScheduleError as exc:
            self._fail(str(exc))

    def initial_state(self) -> np.ndarray:
        dim = self.dim
        spec = self.psi0
        if spec is None:
            spec = "ground" if self.family == "adiabatic" else "basis 0"
        if isinstance(spec, str):
            words = spec.split()
            kind = words[0] if words else ""
            if kind == "ground":
                try:
                    if self.family == "adiabatic":
                        return self.adiabatic_spec().initial_state()
                    return ground_state(self.build_schedule().evaluate(0.0))[0]
                except DegenerateGroundStateError as exc:
                    self._fail(f"field 'psi0': {exc}")
            if kind == "basis" and len(words) == 2 and words[1].isdigit() and int(words[1]) < dim:
                v = np.zeros(dim, dtype=complex)
                v[int(words[1])] = 1.0
                return v
            if kind == "uniform" and len(words) == 1:
                return np.ones(dim, dtype=complex) / math.sqrt(dim)
            if kind == "amplitudes":
                try:
                    spec = [complex(w) for w in words[1:]]
                except ValueError:
                    self._fail(f"field 'psi0': cannot parse amplitudes {spec!r}")
            else:
                self._fail(f"field 'psi0': expected 'ground', 'basis k', 'uniform' or 'amplitudes ...', got {spec!r}")
        v = np.asarray(spec, dtype=complex).reshape(-1)
        if v.size != dim or not np.all(np.isfinite(v)) or np.linalg.norm(v) == 0:
            self._fail(f"field 'psi0': need {dim} finite amplitudes, not all zero")
        return v / np.linalg.norm(v)

    def default_checks(self) -> tuple:
        if self.checks:
            return self.checks
        base = ("accel-limit", "qal-time", "mt-qsl", "path-geodesic", "covariance-identity")
        return base + (("audit",) if self.family == "adiabatic" else ())

    def describe(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "T": self.T,
            "n_steps": self.n_steps,
            "stride": self.stride,
            "method": self.method,
            "hbar": self.hbar,
            "scalar": None if self.scalar is None else {"form": self.scalar[0], "coeffs": list(self.scalar[1])},
            "table": None if self.table is None else self.table.name,
            "dim": self.dim,
            "checks": list(self.default_checks()),
        }


def _number(source, key, text, kind=float):
    try:
        value = kind(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{source}: field {key!r}: cannot parse {text!r} as {kind.__name__}") from None
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"{source}: field {key!r}: must be finite")
    return value


def _matrix_from_json(source, name, obj):
    if isinstance(obj, dict):
        if "real" not in obj:
            raise ConfigError(f"{source}: matrix {name!r}: expected keys 'real' and optional 'imag'")
        try:
            re_ = np.asarray(obj["real"], dtype=float)
            im = np.asarray(obj.get("imag", np.zeros_like(re_)), dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: matrix {name!r}: {exc}") from None
        if re_.shape != im.shape:
            raise ConfigError(f"{source}: matrix {name!r}: real/imag shapes differ")
        return re_ + 1j * im
    try:
        return np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: matrix {name!r}: {exc}") from None


def parse_json(text: str, source: str = "<json>", base_dir: Path | None = None) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be an object")
    unknown = set(data) - set(_SCALAR_KEYS) - {"matrices"}
    if unknown:
        raise ConfigError(f"{source}: unknown field(s) {', '.join(sorted(unknown))}")
    kw = _common_fields(source, data, base_dir)
    scalar = data.get("scalar")
    if scalar is not None:
        if isinstance(scalar, str):
            kw["scalar"] = _scalar_descriptor(source, scalar)
        elif isinstance(scalar, dict) and "form" in scalar:
            kw["scalar"] = (str(scalar["form"]), tuple(_number(source, "scalar", c) for c in scalar.get("coeffs", [])))
        else:
            raise ConfigError(f"{source}: field 'scalar': expected {{'form': ..., 'coeffs': [...]}}")
    psi0 = data.get("psi0")
    if isinstance(psi0, dict):
        psi0 = np.asarray(psi0.get("real", []), dtype=float) + 1j * np.asarray(psi0.get("imag", 0.0), dtype=float)
    kw["psi0"] = psi0
    kw["matrices"] = {k: _matrix_from_json(source, k, v) for k, v in data.get("matrices", {}).items()}
    return ScenarioConfig(source=source, **kw)


def _scalar_descriptor(source, text):
    words = text.split()
    if not words:
        raise ConfigError(f"{source}: field 'scalar': empty descriptor")
    return words[0], tuple(_number(source, "scalar", w) for w in words[1:])


def _common_fields(source, data, base_dir):
    if "family" not in data:
        raise ConfigError(f"{source}: missing required field 'family'")
    if "T" not in data:
        raise ConfigError(f"{source}: missing required field 'T'")
    kw = {
        "name": str(data.get("name", Path(source).stem)),
        "family": str(data["family"]),
        "T": _number(source, "T", data["T"]),
        "n_steps": _number(source, "n_steps", data.get("n_steps", 4096), int),
        "stride": _number(source, "stride", data.get("stride", 1), int),
        "method": str(data.get("method", "midpoint")),
        "hbar": _number(source, "hbar", data.get("hbar", 1.0)),
    }
    checks = data.get("checks", ())
    if isinstance(checks, str):
        checks = checks.replace(",", " ").split()
    kw["checks"] = tuple(checks)
    if data.get("seed") is not None:
        kw["seed"] = _number(source, "seed", data["seed"], int)
    if data.get("tolerance") is not None:
        kw["tolerance"] = _number(source, "tolerance", data["tolerance"])
    if data.get("table") is not None:
        table = Path(data["table"])
        if not table.is_absolute() and base_dir is not None:
            table = base_dir / table
        kw["table"] = table
    return kw


def parse_text(text: str, source: str = "<text>", base_dir: Path | None = None) -> ScenarioConfig:
    data: dict = {}
    matrices: dict = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        lineno = i + 1
        line = lines[i].split("#", 1)[0].strip()
        i += 1
        if not line:
            continue
        if line.startswith("matrix"):
            words = line.split()
            if len(words) != 2:
                raise ConfigError(f"{source}: line {lineno}: expected 'matrix NAME'")
            name = words[1]
            rows = []
            while True:
                if i >= len(lines):
                    raise ConfigError(f"{source}: line {lineno}: matrix {name!r} is missing 'end'")
                row_no = i + 1
                row = lines[i].split("#", 1)[0].strip()
                i += 1
                if not row:
                    continue
                if row == "end":
                    break
                try:
                    rows.append([complex(w) for w in row.split()])
                except ValueError:
                    raise ConfigError(f"{source}: line {row_no}: cannot parse matrix row {row!r}") from None
            if not rows or any(len(r) != len(rows) for r in rows):
                raise ConfigError(f"{source}: line {lineno}: matrix {name!r} must be square")
            if name in matrices:
                raise ConfigError(f"{source}: line {lineno}: matrix {name!r} defined twice")
            matrices[name] = np.array(rows)
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: line {lineno}: expected 'key = value' or 'matrix NAME'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _SCALAR_KEYS:
            raise ConfigError(f"{source}: line {lineno}: unknown key {key!r}")
        if key in data:
            raise ConfigError(f"{source}: line {lineno}: key {key!r} given twice")
        data[key] = value
    kw = _common_fields(source, data, base_dir)
    if "scalar" in data:
        kw["scalar"] = _scalar_descriptor(source, data["scalar"])
    kw["psi0"] = data.get("psi0")
    kw["matrices"] = matrices
    return ScenarioConfig(source=source, **kw)


def bundled_scenarios() -> list[str]:
    root = resources.files("qaccel") / "scenarios"
    return sorted(p.name.rsplit(".", 1)[0] for p in root.iterdir() if p.name.endswith((".cfg", ".json")))


def load_config(path_or_name) -> ScenarioConfig:
    """Load a scenario from a file path, or by name from the bundled scenarios."""
    path = Path(path_or_name)
    if not path.exists():
        root = resources.files("qaccel") / "scenarios"
        for ext in (".cfg", ".json"):
            candidate = root / f"{path_or_name}{ext}"
            if candidate.is_file():
                path = Path(str(candidate))
                break
        else:
            raise ConfigError(f"{path_or_name}: no such file or bundled scenario "
                              f"(bundled: {', '.join(bundled_scenarios())})")
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        return parse_json(text, path.name, path.parent)
    return parse_text(text, path.name, path.parent)
