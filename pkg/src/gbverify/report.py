"""Shared check report: ``{check, lhs, rhs, abs_error, tolerance, pass, seed}``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into JSON-native values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value) or math.isinf(value):
            return repr(value)
        return value
    return value


@dataclass
class Report:
    check: str
    lhs: float
    rhs: float
    abs_error: float = 0.0
    tolerance: float = 0.0
    seed: Optional[int] = None
    details: Dict[str, Any] = field(default_factory=dict)
    passed: Optional[bool] = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(abs(self.lhs - self.rhs) <= self.abs_error + self.tolerance)

    @property
    def discrepancy(self) -> float:
        return abs(float(self.lhs) - float(self.rhs))

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "check": self.check,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_error": self.abs_error,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "seed": self.seed,
        }
        out.update(self.details)
        return _plain(out)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        case = f" ({self.details['case']})" if "case" in self.details else ""
        return (
            f"[{status}] {self.check}{case}: lhs={self.lhs:.12g} rhs={self.rhs:.12g} "
            f"|diff|={self.discrepancy:.3g} <= {self.abs_error:.3g}+{self.tolerance:.3g}"
        )
