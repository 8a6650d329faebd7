"""Utilitarian welfare scores and the cross-network comparison report.

A panel's social welfare for an alternative is simply the sum of the experts'
utilities for it.  Because every utility matrix here has rows summing to one,
total welfare across alternatives is always the panel size -- switching the
empathy network only moves welfare between alternatives, it never creates any.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError
from .network import EmpathicMatrix, UtilityMatrix, local_utilities

__all__ = [
    "WelfareRow",
    "WelfareReport",
    "social_welfare",
    "best_alternative",
    "compare_networks",
    "welfare_report_to_csv",
    "welfare_report_to_json",
]


@dataclass(frozen=True)
class WelfareRow:
    """One network's welfare profile: score per alternative plus the winner."""

    label: str
    sw: tuple
    best: int


@dataclass(frozen=True)
class WelfareReport:
    """Baseline row first, then one row per supplied network."""

    m: int
    rows: tuple


def social_welfare(U: UtilityMatrix) -> np.ndarray:
    """Per-alternative welfare: column sums of the utility matrix."""
    return U.entries.sum(axis=0)


def best_alternative(U: UtilityMatrix) -> int:
    """1-based index of the welfare-maximal alternative (ties: lowest index)."""
    return int(np.argmax(social_welfare(U))) + 1


def _utilities_for(entry, U_I: UtilityMatrix) -> UtilityMatrix:
    """Resolve a network entry to the utilities it induces over U_I.

    Accepts a weight matrix (local ones are mixed with U_I, global ones are
    applied directly since they already encode the propagation) or an
    already-computed utility matrix, which is used as-is.
    """
    if isinstance(entry, UtilityMatrix):
        if entry.n != U_I.n or entry.m != U_I.m:
            raise DimensionError(
                f"utilities are {entry.n}x{entry.m} but the baseline is "
                f"{U_I.n}x{U_I.m}")
        return entry
    if isinstance(entry, EmpathicMatrix):
        if entry.kind == "local":
            return local_utilities(entry, U_I)
        if entry.n != U_I.n:
            raise DimensionError(
                f"weight matrix is {entry.n}x{entry.n} but utilities have "
                f"{U_I.n} rows")
        return UtilityMatrix(n=entry.n, m=U_I.m,
                             entries=entry.entries @ U_I.entries,
                             kind="global-empathic")
    raise ValidationError(
        f"expected an EmpathicMatrix or UtilityMatrix, got {type(entry).__name__}")


def _row(label: str, U: UtilityMatrix) -> WelfareRow:
    sw = social_welfare(U)
    return WelfareRow(label=str(label), sw=tuple(float(v) for v in sw),
                      best=int(np.argmax(sw)) + 1)


def compare_networks(U_I: UtilityMatrix, networks) -> WelfareReport:
    """Welfare table over the given networks, with a no-network baseline.

    networks is a sequence of (label, entry) pairs where each entry is an
    EmpathicMatrix or a UtilityMatrix (see _utilities_for).  The baseline row
    scores U_I itself and always comes first.
    """
    rows = [_row("baseline", U_I)]
    for label, entry in networks:
        rows.append(_row(label, _utilities_for(entry, U_I)))
    return WelfareReport(m=U_I.m, rows=tuple(rows))


def welfare_report_to_csv(report: WelfareReport) -> str:
    header = "network," + ",".join(f"a{s}" for s in range(1, report.m + 1)) + ",best"
    lines = [header]
    for row in report.rows:
        cells = ",".join(f"{v:.4f}" for v in row.sw)
        lines.append(f"{row.label},{cells},{row.best}")
    return "\n".join(lines) + "\n"


def welfare_report_to_json(report: WelfareReport) -> dict:
    return {
        "m": report.m,
        "rows": [{"label": row.label, "sw": list(row.sw), "best": row.best}
                 for row in report.rows],
    }
