"""Check reports with deterministic JSON serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SCHEMA = 1


def jsonable(x):
    """Convert witnesses to plain JSON values.  Matrices become hex strings."""
    from .matgrp import AbelianGroupInv, Mat
    if isinstance(x, Mat):
        return x.hex()
    if isinstance(x, AbelianGroupInv):
        return x.to_json()
    if hasattr(x, "to_json"):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    return x


@dataclass
class CheckResult:
    check_id: str
    status: str  # pass | fail | skipped
    witness: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status == "pass"

    def to_json(self):
        out = {"check_id": self.check_id, "pass": self.status == "pass"}
        if self.status == "skipped":
            out["skipped"] = True
        if self.witness:
            out["witness"] = jsonable(self.witness)
        return out


class Report:
    """Ordered list of named checks plus computed values."""

    def __init__(self, name, params=None):
        self.name = name
        self.params = dict(params or {})
        self.checks: list[CheckResult] = []
        self.values: dict = {}

    def check(self, check_id, ok, *extra, **witness):
        if extra:
            # allow check(id, ok, witness_dict)
            for d in extra:
                witness.update(d)
        self.checks.append(CheckResult(check_id, "pass" if ok else "fail", witness))
        return bool(ok)

    def skip(self, check_id, reason):
        self.checks.append(CheckResult(check_id, "skipped", {"reason": reason}))

    def value(self, key, val):
        self.values[key] = val

    def extend(self, other: "Report", prefix=None):
        prefix = other.name if prefix is None else prefix
        for c in other.checks:
            self.checks.append(CheckResult(f"{prefix}/{c.check_id}" if prefix else c.check_id,
                                           c.status, c.witness))
        for k, v in other.values.items():
            self.values[f"{prefix}/{k}" if prefix else k] = v

    @property
    def passed(self):
        return all(c.status != "fail" for c in self.checks)

    def failures(self):
        return [c for c in self.checks if c.status == "fail"]

    def to_json(self):
        return {
            "schema": SCHEMA,
            "report": self.name,
            "params": jsonable(self.params),
            "pass": self.passed,
            "checks": [c.to_json() for c in self.checks],
            "values": jsonable(self.values),
        }

    def dumps(self):
        return dumps(self.to_json())

    def text(self):
        lines = [f"{self.name} {jsonable(self.params)}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            mark = {"pass": "ok  ", "fail": "FAIL", "skipped": "skip"}[c.status]
            extra = f"  {jsonable(c.witness)}" if c.witness else ""
            lines.append(f"  [{mark}] {c.check_id}{extra}")
        for k, v in self.values.items():
            lines.append(f"  {k} = {jsonable(v)}")
        return "\n".join(lines)

    def __repr__(self):
        return f"Report({self.name}, pass={self.passed}, {len(self.checks)} checks)"


def dumps(obj):
    """Canonical JSON: sorted keys, no whitespace variance."""
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))
