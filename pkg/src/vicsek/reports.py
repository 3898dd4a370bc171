"""Pass/fail reports shared by the verification suites."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

SCHEMA_VERSION = 1
MAX_WITNESSES = 100


@dataclass
class PropertyResult:
    name: str
    passed: bool
    witnesses: list = field(default_factory=list)
    extremes: dict = field(default_factory=dict)
    detail: str = ""

    def to_dict(self):
        return {
            "name": self.name,
            "pass": bool(self.passed),
            "witnesses": _jsonable(self.witnesses),
            "extremes": _jsonable(self.extremes),
            "detail": self.detail,
        }


@dataclass
class Report:
    suite: str
    config: dict = field(default_factory=dict)
    seed: Optional[int] = None
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def add(self, result: PropertyResult) -> PropertyResult:
        self.results.append(result)
        return result

    def extend(self, other: "Report"):
        self.results.extend(other.results)
        return self

    def failures(self):
        return [r for r in self.results if not r.passed]

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "config": _jsonable(self.config),
            "seed": self.seed,
            "pass": self.passed,
            "results": [r.to_dict() for r in self.results],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _jsonable(x: Any):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "tolist"):
        return _jsonable(x.tolist())
    if hasattr(x, "item") and callable(x.item):
        return x.item()
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    try:
        return float(x)
    except (TypeError, ValueError):
        return str(x)
