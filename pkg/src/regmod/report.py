"""Shared report containers for audits and modulus computations.

Every checker in the package returns one of the two dataclasses below
instead of a bare bool or float, so that callers (tests, CLI, sweep
writers) always get the witness data alongside the verdict.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

__all__ = [
    "AuditReport",
    "ModulusReport",
    "VERDICT_PASS",
    "VERDICT_FAIL",
    "VERDICT_VACUOUS",
    "VERDICT_NOT_APPLICABLE",
    "jsonable",
]

VERDICT_PASS = "pass"
VERDICT_FAIL = "fail"
VERDICT_VACUOUS = "vacuous"
VERDICT_NOT_APPLICABLE = "not-applicable"


def jsonable(value: Any) -> Any:
    """Convert report payloads to plain JSON-encodable values.

    Fractions become "p/q" strings (exactness survives a round trip),
    infinities become the string "inf", tuples become lists.
    """
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = list(value)
        if isinstance(value, (set, frozenset)):
            items = sorted(items, key=repr)
        return [jsonable(v) for v in items]
    if hasattr(value, "to_json"):
        return value.to_json()
    return value


@dataclass(frozen=True)
class AuditReport:
    """Outcome of a single named check.

    verdict is one of pass/fail/vacuous/not-applicable.  "vacuous" means
    the window contained nothing to check; "not-applicable" means the
    check's hypotheses are not met (which is not a failure).
    """

    kind: str
    verdict: str
    value: Any = None
    witnesses: tuple = ()
    constants: dict = field(default_factory=dict)
    window: dict | None = None
    notes: tuple[str, ...] = ()

    def ok(self) -> bool:
        return self.verdict in (VERDICT_PASS, VERDICT_VACUOUS)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "value": jsonable(self.value),
            "witnesses": jsonable(self.witnesses),
            "constants": jsonable(self.constants),
            "window": jsonable(self.window),
            "notes": list(self.notes),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class ModulusReport:
    """Value of a regularity-style modulus measured on a finite window.

    kind identifies the modulus (for example "reg", "lip", "lop" or a
    partial variant).  witnesses hold the argmax/argmin data that
    realizes the value; flags carry conditions such as "vacuous" or
    "scale-mismatch" that qualify how the value may be used.
    """

    kind: str
    value: Any
    basepoint: tuple
    window: dict
    witnesses: tuple = ()
    flags: tuple[str, ...] = ()
    constants: dict = field(default_factory=dict)

    @property
    def vacuous(self) -> bool:
        return "vacuous" in self.flags

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "value": jsonable(self.value),
            "basepoint": jsonable(self.basepoint),
            "window": jsonable(self.window),
            "witnesses": jsonable(self.witnesses),
            "flags": list(self.flags),
            "constants": jsonable(self.constants),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)
