"""Inequality reports shared by every checker in the package."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

SATURATION_RTOL = 1e-6


@dataclass(frozen=True)
class BoundReport:
    """One evaluated instance of an inequality.

    ``relation`` is ``"<="`` for bounds of the form ``lhs <= rhs`` and ``">="``
    for ``lhs >= rhs``. The slack is signed so that a non-negative value always
    means the inequality holds.

    ``status`` is ``"ok"`` for an evaluated bound, ``"not-applicable"`` when a
    precondition of the bound fails at this point (zero speed, vanishing
    radicand), and ``"undefined"`` when the bound itself has no finite value
    (e.g. the acceleration time of a time-independent Hamiltonian).
    """

    label: str
    lhs: float
    rhs: float
    relation: str = "<="
    context: Any = None
    status: str = "ok"
    note: str = ""
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.relation not in ("<=", ">="):
            raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def applicable(self) -> bool:
        return self.status == "ok"

    @property
    def slack(self) -> float:
        if not self.applicable:
            return math.nan
        if self.relation == "<=":
            return self.rhs - self.lhs
        return self.lhs - self.rhs

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), abs(self.rhs), 1.0)

    @property
    def saturated(self) -> bool:
        return self.applicable and abs(self.slack) <= SATURATION_RTOL * self.scale

    def holds(self, tol: float = 1e-10) -> bool:
        """True unless the bound was evaluated and violated beyond ``tol * scale``."""
        if not self.applicable:
            return True
        return self.slack >= -tol * self.scale

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "relation": self.relation,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "saturated": self.saturated,
            "status": self.status,
            "context": self.context,
            "note": self.note,
        }

    def __str__(self) -> str:
        if not self.applicable:
            return f"{self.label}: {self.status}" + (f" ({self.note})" if self.note else "")
        return (f"{self.label}: {self.lhs:.10g} {self.relation} {self.rhs:.10g} "
                f"(slack {self.slack:.3e}{', saturated' if self.saturated else ''})")
