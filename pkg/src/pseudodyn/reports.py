"""Structured results of identity checks, with JSON and CSV emission."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def _jsonify(value):
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.complexfloating):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.ndarray):
        return [_jsonify(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return value


@dataclass
class ResidualReport:
    """Outcome of one identity check.

    verdict is "pass" exactly when every judged residual sits below its
    declared tolerance; quantities the identity only reports (such as the
    constant term of an up-to-constant identity) are never judged.
    """

    identity: str
    max_q2: float | None = None
    max_q1: float | None = None
    q0: complex | None = None
    numeric_spread: float | None = None
    fd_residual: float | None = None
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    verdict: str = "pass"
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "max_q2": self.max_q2,
            "max_q1": self.max_q1,
            "q0": _jsonify(self.q0) if self.q0 is not None else None,
            "numeric_spread": self.numeric_spread,
            "fd_residual": self.fd_residual,
            "params": _jsonify(self.params),
            "tolerances": _jsonify(self.tolerances),
            "verdict": self.verdict,
            "note": self.note,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def summary_line(self) -> str:
        parts = [f"{self.identity}: {self.verdict.upper()}"]
        if self.max_q2 is not None:
            parts.append(f"max|Q2|={self.max_q2:.3e}")
        if self.max_q1 is not None:
            parts.append(f"max|Q1|={self.max_q1:.3e}")
        if self.numeric_spread is not None:
            parts.append(f"spread={self.numeric_spread:.3e}")
        if self.fd_residual is not None:
            parts.append(f"fd={self.fd_residual:.3e}")
        if self.note:
            parts.append(self.note)
        return "  ".join(parts)


SWEEP_CSV_COLUMNS = [
    "identity", "num_modes", "mass", "box_length", "hbar", "t",
    "lambda_re", "lambda_im", "sigma", "seed",
    "max_q2", "max_q1", "q0_re", "q0_im",
    "numeric_spread", "fd_residual", "verdict",
]


def sweep_csv_row(report: ResidualReport) -> str:
    p = report.params
    q0 = report.q0 if report.q0 is not None else complex("nan")

    def num(x):
        return "" if x is None else repr(float(x))

    fields = [
        report.identity,
        str(p.get("num_modes", "")),
        num(p.get("mass")), num(p.get("box_length")), num(p.get("hbar")),
        num(p.get("t")),
        num(p.get("lambda_re")), num(p.get("lambda_im")),
        str(p.get("sigma", "")), str(p.get("seed", "")),
        num(report.max_q2), num(report.max_q1),
        num(q0.real), num(q0.imag),
        num(report.numeric_spread), num(report.fd_residual),
        report.verdict,
    ]
    return ",".join(fields)
