"""Classify every directed expert pair as a necessary or possible arc.

Two probe programs answer, for a pair (i, j), whether every network
compatible with the statements must carry weight on w_ij (pin the cell to
zero and see the slack die) and whether at least one such network can carry
it (force the cell up to the minimum weight and see the slack survive).
Cells where even that fails are impossible arcs.
"""

import logging
from dataclasses import dataclass

from .constraints import feasible
from .errors import PreconditionError, ValidationError

log = logging.getLogger(__name__)

RELATION_TOL = 1e-9
CACHE_LIMIT = 4096

NECESSARY = "necessary"
POSSIBLE_ONLY = "possible-only"
IMPOSSIBLE = "impossible"
SELF_ALWAYS = "self-always"

_CACHE = {}


@dataclass(frozen=True)
class PairProbe:
    """Slack optima of the two probe programs for one ordered pair.

    eps values are None when the probe program is infeasible, or when the
    system has no strict statements and the slack is unconstrained."""

    i: int
    j: int
    eps_model2: float = None
    eps_model3: float = None
    model2_infeasible: bool = False
    model3_infeasible: bool = False


@dataclass(frozen=True)
class RelationMatrix:
    n: int
    cells: tuple          # n x n of the class constants above
    eps_model2: tuple     # n x n of float | None
    eps_model3: tuple
    borderline: tuple = ()


def _check_pair(system, i, j):
    if not (1 <= i <= system.n and 1 <= j <= system.n):
        raise ValidationError(f"pair ({i}, {j}) outside 1..{system.n}")
    if i == j:
        raise ValidationError("self-empathy is fixed by the diagonal floor; "
                              f"pair ({i}, {j}) has no probe")


def probe_pair(system, i, j):
    """Run (or recall) both probe programs for the ordered pair (i, j)."""
    _check_pair(system, i, j)
    key = (system.fingerprint(), i, j)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit

    pinned = feasible(system, ub_overrides={(i, j): 0.0})
    floored = feasible(system, lb_overrides={(i, j): system.thresholds.eps_prime})
    pr = PairProbe(
        i=i, j=j,
        eps_model2=pinned.eps_star,
        eps_model3=floored.eps_star,
        model2_infeasible=pinned.status == "infeasible",
        model3_infeasible=floored.status == "infeasible",
    )
    if pr.eps_model2 is not None and abs(pr.eps_model2) <= RELATION_TOL:
        log.info("pair (%d, %d): zero-pin slack sits exactly at 0; "
                 "classified not-necessary", i, j)
    if len(_CACHE) >= CACHE_LIMIT:
        _CACHE.pop(next(iter(_CACHE)))
    _CACHE[key] = pr
    return pr


def necessary(system, i, j):
    """True when no compatible network can set w_ij to zero."""
    pr = probe_pair(system, i, j)
    if pr.model2_infeasible:
        return True
    if pr.eps_model2 is None:  # no strict statements: slack unconstrained
        return False
    return pr.eps_model2 < -RELATION_TOL


def possible(system, i, j):
    """True when some compatible network carries at least eps' on w_ij."""
    pr = probe_pair(system, i, j)
    if pr.model3_infeasible:
        return False
    if pr.eps_model3 is None:
        return True
    return pr.eps_model3 > RELATION_TOL


def relation_matrix(system):
    """Classify all ordered pairs. The base system must have live slack."""
    base = feasible(system)
    if base.status == "infeasible":
        raise PreconditionError(
            "system is infeasible; run inconsistency analysis before relations")
    if base.status == "optimal" and base.eps_star <= RELATION_TOL:
        raise PreconditionError(
            f"system slack {base.eps_star:.3g} is not positive; "
            "run inconsistency analysis before relations")

    n = system.n
    cells, e2, e3, borderline = [], [], [], []
    for i in range(1, n + 1):
        crow, row2, row3 = [], [], []
        for j in range(1, n + 1):
            if i == j:
                crow.append(SELF_ALWAYS)
                row2.append(None)
                row3.append(None)
                continue
            pr = probe_pair(system, i, j)
            if necessary(system, i, j):
                crow.append(NECESSARY)
            elif possible(system, i, j):
                crow.append(POSSIBLE_ONLY)
            else:
                crow.append(IMPOSSIBLE)
            if pr.eps_model2 is not None and abs(pr.eps_model2) <= RELATION_TOL:
                borderline.append((i, j))
            row2.append(pr.eps_model2)
            row3.append(pr.eps_model3)
        cells.append(tuple(crow))
        e2.append(tuple(row2))
        e3.append(tuple(row3))
    return RelationMatrix(n=n, cells=tuple(cells), eps_model2=tuple(e2),
                          eps_model3=tuple(e3), borderline=tuple(borderline))


def _fmt(eps):
    return "" if eps is None else f"{eps:.4f}"


def relation_matrix_to_csv(rm):
    lines = ["i,j,class,eps_model2,eps_model3"]
    for i in range(rm.n):
        for j in range(rm.n):
            lines.append(f"{i + 1},{j + 1},{rm.cells[i][j]},"
                         f"{_fmt(rm.eps_model2[i][j])},{_fmt(rm.eps_model3[i][j])}")
    return "\n".join(lines) + "\n"


def relation_matrix_to_json(rm):
    return {
        "n": rm.n,
        "cells": [list(row) for row in rm.cells],
        "eps_model2": [list(row) for row in rm.eps_model2],
        "eps_model3": [list(row) for row in rm.eps_model3],
        "borderline": [list(p) for p in rm.borderline],
    }


if __name__ == "__main__":
    import numpy as np

    from .constraints import EmpathicStatement, assemble
    from .network import Thresholds, UtilityMatrix

    u = UtilityMatrix(n=3, m=2, entries=np.array([[0.7, 0.3], [0.2, 0.8], [0.5, 0.5]]),
                      kind="intrinsic")
    sts = [EmpathicStatement(id="s1", source="d1", kind="preference",
                             dm=1, better=1, worse=2)]
    rm = relation_matrix(assemble(u, sts, Thresholds()))
    print(relation_matrix_to_csv(rm))
