"""Residual reports and deterministic JSON emission.

Stdout JSON must be byte-identical across runs for fixed inputs, so floats
are printed with 17 significant digits (exact double round-trip) and wall
times are kept out of the structured output (they go to stderr only).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .calculus import EPoint

__all__ = ["CheckResult", "ResidualTracker", "emit_json", "fmt_float"]


@dataclass
class CheckResult:
    """One named residual check: max residual over samples vs a tolerance."""

    name: str
    max_residual: float
    tol: float
    worst_point: EPoint | None = None
    passed: bool = field(init=False)
    wall_time: float = 0.0  # stderr-only; never serialized to stdout

    def __post_init__(self):
        self.passed = self.max_residual <= self.tol

    def to_json_obj(self):
        obj = {
            "name": self.name,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "passed": self.passed,
        }
        if self.worst_point is not None:
            obj["worst_point"] = {
                "x": list(self.worst_point.x),
                "y0": self.worst_point.y,
            }
        return obj


class ResidualTracker:
    """Accumulates |residual| values tagged with the sample they came from."""

    def __init__(self, name: str, tol: float):
        self.name = name
        self.tol = tol
        self.max_residual = 0.0
        self.worst_point = None

    def update(self, value: float, point: EPoint | None = None):
        value = abs(value)
        if value >= self.max_residual:
            self.max_residual = value
            self.worst_point = point

    def result(self) -> CheckResult:
        return CheckResult(self.name, self.max_residual, self.tol, self.worst_point)


def fmt_float(x: float) -> str:
    if x != x:
        return '"nan"'
    if x == float("inf"):
        return '"inf"'
    if x == float("-inf"):
        return '"-inf"'
    return format(float(x), ".17g")


def emit_json(obj, indent: int = 0) -> str:
    """Recursive JSON emitter with pinned float formatting and key order
    as built (insertion order), so output is reproducible byte-for-byte."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}{json.dumps(str(k))}: {emit_json(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        flat = all(isinstance(v, (int, float, bool)) or v is None for v in seq)
        if flat:
            return "[" + ", ".join(emit_json(v, 0) for v in seq) + "]"
        items = [f"{inner}{emit_json(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    return json.dumps(str(obj))
