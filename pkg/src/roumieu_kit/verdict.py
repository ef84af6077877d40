"""Three-valued outcome of a condition checked on a finite prefix."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"


def _plain(value):
    # numpy scalars and tuples -> json-friendly python objects
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        try:
            return value.item()
        except (ValueError, AttributeError):
            pass
    if hasattr(value, "to_dict"):
        return value.to_dict()
    return value


@dataclass
class Verdict:
    """Outcome of a truncation-aware check.

    ``witness`` holds named constants for a *holds* verdict, ``counterexample``
    the offending index/values for a *fails* verdict, and ``checked_up_to`` the
    depth that was inspected. ``parts`` collects sub-verdicts of compound checks.
    """

    status: str
    checked_up_to: int | None = None
    witness: dict[str, Any] = field(default_factory=dict)
    counterexample: dict[str, Any] = field(default_factory=dict)
    trace: str = ""
    parts: dict[str, "Verdict"] = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (HOLDS, FAILS, INCONCLUSIVE):
            raise ValueError(f"unknown verdict status {self.status!r}")

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS

    @property
    def inconclusive(self) -> bool:
        return self.status == INCONCLUSIVE

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"status": self.status}
        if self.checked_up_to is not None:
            out["checked_up_to"] = int(self.checked_up_to)
        if self.witness:
            out["witness"] = _plain(self.witness)
        if self.counterexample:
            out["counterexample"] = _plain(self.counterexample)
        if self.trace:
            out["trace"] = self.trace
        if self.parts:
            out["parts"] = {k: v.to_dict() for k, v in self.parts.items()}
        return out

    def __str__(self):
        bits = [self.status]
        if self.witness:
            bits.append(", ".join(f"{k}={_fmt(v)}" for k, v in self.witness.items()))
        if self.counterexample:
            bits.append("counterexample: " + ", ".join(
                f"{k}={_fmt(v)}" for k, v in self.counterexample.items()))
        if self.checked_up_to is not None:
            bits.append(f"P={self.checked_up_to}")
        if self.trace:
            bits.append(self.trace)
        return " | ".join(bits)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(_plain(v))


def combine(parts: dict[str, Verdict], checked_up_to=None, trace="") -> Verdict:
    """All-of combination: fails if any part fails, holds if all hold."""
    status = HOLDS
    counter = {}
    for name, v in parts.items():
        if v.fails:
            status = FAILS
            counter = {"condition": name, **v.counterexample}
            break
        if v.inconclusive:
            status = INCONCLUSIVE
    witness = {}
    if status == HOLDS:
        for name, v in parts.items():
            for k, val in v.witness.items():
                witness[f"{name}.{k}"] = val
    return Verdict(status, checked_up_to, witness, counter, trace, dict(parts))
