"""Pass/fail bookkeeping shared by every verifier."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable

PASS = "pass"
FAIL = "fail"
INFO = "info"
SKIPPED = "skipped"


class StructuralError(ValueError):
    """Inputs do not fit together (shapes, sources/targets, index sets)."""


@dataclass
class Check:
    name: str
    status: str
    measured: Any = None
    bound: Any = None
    witness: Any = None
    detail: str = ""

    def to_dict(self) -> dict:
        out: dict = {"name": self.name, "status": self.status}
        for key in ("measured", "bound", "witness"):
            value = getattr(self, key)
            if value is not None:
                out[key] = jsonable(value)
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class VerificationReport:
    """An ordered list of named checks.

    ``info`` and ``skipped`` entries never make a report fail.
    """

    title: str = ""
    checks: list[Check] = field(default_factory=list)

    def add(self, name, status, measured=None, bound=None, witness=None, detail=""):
        self.checks.append(Check(name, status, measured, bound, witness, detail))
        return self.checks[-1]

    def expect(self, name, ok, measured=None, bound=None, witness=None, detail=""):
        """Record an asserted check; the witness is kept only on failure."""
        return self.add(name, PASS if ok else FAIL, measured, bound,
                        None if ok else witness, detail)

    def info(self, name, measured=None, detail=""):
        return self.add(name, INFO, measured, detail=detail)

    def extend(self, other: VerificationReport, prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.status, c.measured,
                                     c.bound, c.witness, c.detail))

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == FAIL]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_text(self) -> str:
        lines = [f"== {self.title} ==" if self.title else "== report =="]
        for c in self.checks:
            line = f"[{c.status.upper():>7}] {c.name}"
            if c.measured is not None:
                line += f"  measured={_short(c.measured)}"
            if c.bound is not None:
                line += f"  bound={_short(c.bound)}"
            if c.witness is not None:
                line += f"  witness={_short(c.witness)}"
            if c.detail:
                line += f"  ({c.detail})"
            lines.append(line)
        lines.append("RESULT: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


# The metric module names its report type after what it does.
ValidationReport = VerificationReport


def _short(value: Any) -> str:
    text = repr(jsonable(value))
    return text if len(text) <= 120 else text[:117] + "..."


def jsonable(value: Any) -> Any:
    """Convert numpy scalars, tuples and complex numbers into JSON-ready data."""
    import numpy as np

    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v) or math.isinf(v):
            return repr(v)
        return v
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items: Iterable = value
        if isinstance(value, (set, frozenset)):
            items = sorted(value, key=repr)
        return [jsonable(v) for v in items]
    return value
