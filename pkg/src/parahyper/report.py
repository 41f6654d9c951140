"""Verification reports: named residual checks with tolerances."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

SCHEMA_VERSION = 1


@dataclass
class Check:
    name: str
    max: float
    mean: float
    tol: float
    passed: bool
    samples: int = 1
    seed: int | None = None
    expect: str = "below"  # "below": max <= tol passes; "above": max > tol passes

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "max": _num(self.max),
            "mean": _num(self.mean),
            "tol": self.tol,
            "pass": self.passed,
            "expect": self.expect,
            "samples": self.samples,
            "seed": self.seed,
        }


def _num(x):
    x = float(x)
    return None if math.isnan(x) else x


@dataclass
class VerificationReport:
    suite: str = ""
    checks: list[Check] = field(default_factory=list)
    seed: int | None = None
    samples: int = 0
    metadata: dict = field(default_factory=dict)

    def add(self, name: str, residuals, tol: float, expect: str = "below", samples: int | None = None) -> Check:
        """Record a check from an array of residuals (absolute values are taken)."""
        r = np.abs(np.asarray(residuals, dtype=complex if np.iscomplexobj(residuals) else float)).ravel()
        if r.size == 0:
            r = np.zeros(1)
        mx = float(np.max(r)) if not np.any(np.isnan(r)) else math.nan
        mean = float(np.mean(r)) if not np.isnan(mx) else math.nan
        if math.isnan(mx):
            ok = False
        elif expect == "below":
            ok = mx <= tol
        elif expect == "above":
            ok = mx > tol
        else:
            raise ValueError(f"unknown expectation {expect!r}")
        chk = Check(name, mx, mean, float(tol), bool(ok), samples if samples is not None else r.size, self.seed, expect)
        self.checks.append(chk)
        return chk

    def add_flag(self, name: str, ok: bool, value: float = 0.0, tol: float = 0.0) -> Check:
        chk = Check(name, float(value), float(value), float(tol), bool(ok), 1, self.seed, "flag")
        self.checks.append(chk)
        return chk

    def extend(self, other: "VerificationReport", prefix: str = "") -> "VerificationReport":
        for c in other.checks:
            self.checks.append(
                Check(prefix + c.name, c.max, c.mean, c.tol, c.passed, c.samples, c.seed, c.expect)
            )
        return self

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def names(self) -> list[str]:
        return [c.name for c in self.checks]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "suite": self.suite,
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
            "seed": self.seed,
            "samples": self.samples,
        }
        if self.metadata:
            out["metadata"] = self.metadata
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        rep = cls(d.get("suite", ""), [], d.get("seed"), d.get("samples", 0), d.get("metadata", {}))
        for c in d.get("checks", []):
            rep.checks.append(
                Check(
                    c["name"],
                    math.nan if c.get("max") is None else c["max"],
                    math.nan if c.get("mean") is None else c["mean"],
                    c.get("tol", 0.0),
                    bool(c["pass"]),
                    c.get("samples", 1),
                    c.get("seed"),
                    c.get("expect", "below"),
                )
            )
        return rep


def render_table(report: VerificationReport) -> str:
    """Aligned plain-text table, one row per check."""
    header = ("check", "max", "mean", "tol", "expect", "result")
    rows = [
        (
            c.name,
            f"{c.max:.3e}",
            f"{c.mean:.3e}",
            f"{c.tol:.1e}",
            c.expect,
            "PASS" if c.passed else "FAIL",
        )
        for c in report.checks
    ]
    widths = [max(len(r[i]) for r in rows + [header]) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    verdict = "PASS" if report.passed else "FAIL"
    title = f"suite {report.suite or '-'}: {verdict} (samples={report.samples}, seed={report.seed})"
    return "\n".join([title] + lines) + "\n"


def merge(reports: Iterable[VerificationReport], suite: str = "") -> VerificationReport:
    out = VerificationReport(suite)
    for r in reports:
        out.extend(r)
    return out
