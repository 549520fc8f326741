"""Machine-readable verification reports (JSON, CSV, text)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

SCHEMA = 1


def _clean(x):
    # JSON has no inf/nan; keep them readable and deterministic
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


@dataclass
class Report:
    command: str
    mode: str
    params: dict
    records: list[dict] = field(default_factory=list)
    version: str = "0.1.0"

    def add(self, check: str, params: dict, value, threshold, passed: bool, **detail) -> dict:
        rec = {
            "check": check,
            "params": params,
            "value": value,
            "threshold": threshold,
            "pass": bool(passed),
        }
        if detail:
            rec["detail"] = detail
        self.records.append(rec)
        return rec

    @property
    def passed(self) -> int:
        return sum(r["pass"] for r in self.records)

    @property
    def ok(self) -> bool:
        return bool(self.records) and self.passed == len(self.records)

    def as_dict(self) -> dict:
        return _clean(
            {
                "schema": SCHEMA,
                "tool": {"name": "holonomy-lab", "version": self.version, "mode": self.mode},
                "command": self.command,
                "params": self.params,
                "records": self.records,
                "summary": {"total": len(self.records), "passed": self.passed},
            }
        )

    def render(self, fmt: str = "json") -> str:
        if fmt == "json":
            return json.dumps(self.as_dict(), indent=2) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["check", "params", "value", "threshold", "pass"])
            for rec in self.as_dict()["records"]:
                w.writerow(
                    [
                        rec["check"],
                        json.dumps(rec["params"], sort_keys=True),
                        json.dumps(rec["value"]),
                        json.dumps(rec["threshold"]),
                        "true" if rec["pass"] else "false",
                    ]
                )
            return buf.getvalue()
        if fmt == "text":
            lines = [f"{self.command} ({self.mode})"]
            for rec in self.as_dict()["records"]:
                tag = "PASS" if rec["pass"] else "FAIL"
                p = " ".join(f"{k}={v}" for k, v in rec["params"].items())
                lines.append(f"  {tag} {rec['check']} [{p}] value={rec['value']} threshold={rec['threshold']}")
            lines.append(f"{self.passed}/{len(self.records)} passed")
            return "\n".join(lines) + "\n"
        raise ValueError(f"unknown format {fmt!r}")
