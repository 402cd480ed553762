"""Verification records and their deterministic JSON encoding."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

_RELATIONS = {
    "<=": lambda v, b, tol: v <= b + tol,
    ">=": lambda v, b, tol: v >= b - tol,
    "==": lambda v, b, tol: abs(v - b) <= tol,
}


@dataclass
class GadgetReport:
    """Measured quantities of one lemma check, each compared with its bound.

    Checks flagged ``informational`` are recorded but do not affect ``passed``.
    """

    lemma_id: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    measured: dict[str, Any] = field(default_factory=dict)
    bounds: dict[str, dict[str, Any]] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def record(self, name: str, value) -> None:
        self.measured[name] = value

    def check(
        self,
        name: str,
        value: float,
        relation: str,
        bound: float,
        tol: float = 0.0,
        informational: bool = False,
    ) -> bool:
        ok = bool(_RELATIONS[relation](float(value), float(bound), tol))
        self.measured[name] = float(value)
        self.bounds[name] = {
            "relation": relation,
            "bound": float(bound),
            "tol": tol,
            "ok": ok,
            "informational": informational,
        }
        return ok

    def require(self, name: str, condition: bool) -> bool:
        """A boolean check with no numeric bound."""
        self.measured[name] = bool(condition)
        self.bounds[name] = {"relation": "is", "bound": True, "tol": 0.0, "ok": bool(condition), "informational": False}
        return bool(condition)

    @property
    def passed(self) -> bool:
        return all(b["ok"] for b in self.bounds.values() if not b["informational"])

    def failures(self) -> list[str]:
        return [k for k, b in self.bounds.items() if not b["ok"] and not b["informational"]]

    def merge(self, other: "GadgetReport", prefix: str) -> None:
        for k, v in other.measured.items():
            self.measured[f"{prefix}.{k}"] = v
        for k, b in other.bounds.items():
            self.bounds[f"{prefix}.{k}"] = b
        self.notes.extend(f"{prefix}: {n}" for n in other.notes)

    def to_dict(self) -> dict:
        return {
            "lemma_id": self.lemma_id,
            "params": self.params,
            "seed": self.seed,
            "measured": self.measured,
            "bounds": self.bounds,
            "notes": self.notes,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return "null"
        return format(obj, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if hasattr(obj, "item") and not hasattr(obj, "__len__"):
        return _encode(obj.item(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, level + 1)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)) or hasattr(obj, "tolist"):
        seq = obj.tolist() if hasattr(obj, "tolist") else obj
        if not seq:
            return "[]"
        return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"
