"""Scenario reports: check records, JSON/CSV emission and plot-data export."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

SCHEMA_VERSION = 1
EXPECTATIONS = ("pass", "fail", "measured")

log = logging.getLogger(__name__)


def _clean(v: Any):
    """JSON-safe, deterministic conversion of numpy values."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


@dataclass
class Check:
    """One measured quantity against a tolerance.

    ``expect`` says what the scenario predicts: ``pass`` (the condition must hold),
    ``fail`` (a deliberate probe of a degenerate case, which must be rejected) or
    ``measured`` (reported only).
    """

    id: str
    anchor: str
    value: Any
    tol: Any
    passed: bool
    expect: str = "pass"
    note: str = ""

    def __post_init__(self):
        if self.expect not in EXPECTATIONS:
            raise ValueError(f"expect must be one of {EXPECTATIONS}")
        self.passed = bool(self.passed)

    @property
    def ok(self) -> bool:
        if self.expect == "measured":
            return True
        return self.passed == (self.expect == "pass")

    def to_dict(self) -> dict:
        return _clean({"id": self.id, "anchor": self.anchor, "value": self.value,
                       "tol": self.tol, "passed": self.passed, "expect": self.expect,
                       "ok": self.ok, "note": self.note})


def check_le(id: str, anchor: str, value: float, tol: float, expect: str = "pass",
             note: str = "") -> Check:
    return Check(id, anchor, float(value), float(tol), bool(value <= tol), expect, note)


def check_true(id: str, anchor: str, flag: bool, value: Any = None, expect: str = "pass",
               note: str = "") -> Check:
    return Check(id, anchor, flag if value is None else value, None, bool(flag), expect, note)


@dataclass
class Payload:
    """Tabular plot data: header plus rows."""

    columns: list
    rows: Any

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": _clean(np.asarray(self.rows))}


@dataclass
class Report:
    scenario: str
    anchor: str
    description: str
    env: dict
    checks: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    payloads: dict = field(default_factory=dict)
    wall_time: float = 0.0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and bool(self.checks) and all(c.ok for c in self.checks)

    def sorted_checks(self) -> list:
        return sorted(self.checks, key=lambda c: c.id)

    def to_dict(self, include_payloads: bool = False) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "anchor": self.anchor,
            "description": self.description,
            "env": _clean(self.env),
            "checks": [c.to_dict() for c in self.sorted_checks()],
            "provenance": _clean(self.provenance),
            "payloads": sorted(self.payloads),
            "ok": self.ok,
            "error": self.error,
            "wall_time": round(float(self.wall_time), 6),
        }
        if include_payloads:
            d["payload_data"] = {k: self.payloads[k].to_dict() for k in sorted(self.payloads)}
        return d

    def to_json(self, include_payloads: bool = False) -> str:
        return json.dumps(self.to_dict(include_payloads), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scenario", "check", "anchor", "value", "tol", "passed", "expect", "ok"])
        for c in self.sorted_checks():
            d = c.to_dict()
            w.writerow([self.scenario, d["id"], d["anchor"], json.dumps(d["value"]),
                        json.dumps(d["tol"]), d["passed"], d["expect"], d["ok"]])
        return buf.getvalue()


def strip_wall_time(text: str) -> str:
    """Report JSON with the wall-time field removed (for determinism comparisons)."""
    d = json.loads(text)
    d.pop("wall_time", None)
    return json.dumps(d, indent=2, sort_keys=True)


def export_plotdata(report: Report, target) -> list:
    """Write one CSV per payload into directory ``target``; returns the written paths.

    Files are UTF-8 with LF line endings and a header row.  A report without
    payloads writes nothing and logs a warning.
    """
    target = Path(target)
    if not report.payloads:
        log.warning("report %s has no plot payloads; nothing written", report.scenario)
        return []
    target.mkdir(parents=True, exist_ok=True)
    if not os.access(target, os.W_OK):
        raise PermissionError(f"cannot write to {target}")
    written = []
    for name in sorted(report.payloads):
        p = report.payloads[name]
        path = target / f"{report.scenario}__{name}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(p.columns)
            for row in np.atleast_2d(np.asarray(p.rows, dtype=float)):
                w.writerow([repr(float(x)) for x in row])
        written.append(path)
    return written
