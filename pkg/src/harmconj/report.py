"""Check results shared by the verification modules and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GOODLAMBDA_COLUMNS = ("check", "node", "lambda", "alpha", "gamma", "lhs", "rhs", "margin")


@dataclass
class CheckReport:
    """Outcome of one named check.

    ``rows`` hold failing items plus the tightest passing item, as tuples
    matching :data:`GOODLAMBDA_COLUMNS`.  ``worst_margin`` is the smallest
    ``rhs - lhs`` seen (negative means violated).
    """

    name: str
    passed: bool
    worst_margin: float
    rows: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)

    @property
    def violations(self) -> list:
        return [r for r in self.rows if r[-1] < 0]

    def summary(self) -> dict:
        return {
            "pass": bool(self.passed),
            "worst_margin": _jsonable(self.worst_margin),
            "params": {k: _jsonable(v) for k, v in self.params.items()},
        }


def _jsonable(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if np.isnan(x):
            return None
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x + 0.0
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def node_label(level: int, index: int) -> str:
    return f"{level}:{index}"
