"""Find the smallest sets of statements whose removal restores feasibility.

Each tagged statement group gets one binary switch; switched-on groups have
their rows slackened by a big-M term. Minimizing the number of switches
yields a minimum repair set, and exclusion cuts enumerate the alternatives
at the same cardinality so a human can choose which statements to drop.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .constraints import assemble, feasible
from .errors import PreconditionError, SolverFailure, ValidationError
from .solver import INFEASIBLE, OPTIMAL, MathProgram, solve_milp

log = logging.getLogger(__name__)

SET_LIMIT = 64
DEAD_TOL = 1e-9


@dataclass(frozen=True)
class InconsistencyReport:
    sets: tuple        # tuples of statement ids, discovery order
    exhausted: bool    # enumeration completed vs. stopped at the limit

    @property
    def cardinality(self):
        return len(self.sets[0]) if self.sets else 0


def report_to_json(report):
    return {
        "sets": [list(s) for s in report.sets],
        "cardinality": report.cardinality,
        "exhausted": report.exhausted,
    }


def _gate(system):
    res = feasible(system)
    if res.status == "infeasible":
        return
    if res.status == "optimal" and res.eps_star <= DEAD_TOL:
        return
    raise PreconditionError(
        "system is satisfiable with positive slack; nothing to repair")


def relaxed_program(system, thresholds=None, extra_cuts=()):
    """Big-M relaxation with one binary per statement group.

    Returns (program, group_ids) where the ids index the trailing binary
    columns in order. `extra_cuts` are (ids, rhs) exclusion rows.
    """
    t = thresholds if thresholds is not None else system.thresholds
    group_ids = system.tags()
    n_w = system.nvars
    nv = n_w + len(group_ids)
    big_m = t.big_m_for(system.n)

    def widen(row):
        out = np.zeros(nv)
        out[:n_w] = row
        return out

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for row, rhs in system.base_eq_rows:
        a_eq.append(widen(row))
        b_eq.append(rhs)
    for g, tag in enumerate(group_ids):
        nu_col = n_w + g
        for relation, row, rhs in system.rows_for(tag):
            if relation == "ge":
                wide = widen(-row)
                wide[nu_col] = -big_m
                a_ub.append(wide)
                b_ub.append(-rhs)
            elif relation == "le":
                wide = widen(row)
                wide[nu_col] = -big_m
                a_ub.append(wide)
                b_ub.append(rhs)
            else:  # eq: a slackened band around the target value
                hi = widen(row)
                hi[nu_col] = -big_m
                a_ub.append(hi)
                b_ub.append(rhs)
                lo = widen(-row)
                lo[nu_col] = -big_m
                a_ub.append(lo)
                b_ub.append(-rhs)
    index_of = {tag: n_w + g for g, tag in enumerate(group_ids)}
    for ids, rhs in extra_cuts:
        row = np.zeros(nv)
        for tag in ids:
            row[index_of[tag]] = 1.0
        a_ub.append(row)
        b_ub.append(rhs)

    lb = np.zeros(nv)
    ub = np.ones(nv)
    lb[:n_w] = system.lb
    ub[:n_w] = system.ub
    lb[system.eps_index] = t.eps_min   # slack pinned: repairs must leave room
    ub[system.eps_index] = t.eps_min
    binary = np.zeros(nv, bool)
    binary[n_w:] = True
    c = np.zeros(nv)
    c[n_w:] = 1.0

    names = system.names + tuple(f"nu_{tag}" for tag in group_ids)
    program = MathProgram(
        names=names, sense="min", c=c,
        A_ub=np.array(a_ub) if a_ub else np.zeros((0, nv)),
        b_ub=np.array(b_ub) if b_ub else np.zeros(0),
        A_eq=np.array(a_eq), b_eq=np.array(b_eq),
        lb=lb, ub=ub, binary=binary)
    return program, group_ids


def _solve_repair(system, thresholds, extra_cuts):
    program, group_ids = relaxed_program(system, thresholds, extra_cuts)
    res = solve_milp(program)
    if res.status == INFEASIBLE:
        return None, None
    if res.status != OPTIMAL:
        raise SolverFailure(f"repair search ended with status {res.status}")
    chosen = tuple(sorted(
        tag for g, tag in enumerate(group_ids)
        if res.x[system.nvars + g] > 0.5))
    return chosen, int(round(res.objective))


def min_inconsistent_set(system, thresholds=None):
    """One minimum-cardinality set of statement ids blocking feasibility."""
    _gate(system)
    chosen, size = _solve_repair(system, thresholds, ())
    if chosen is None:
        raise SolverFailure(
            "relaxed repair program is infeasible although every statement "
            "group carries a switch; the base block should always admit the "
            "diagonal network")
    if size != len(chosen):
        raise SolverFailure("repair objective disagrees with switch count")
    return set(chosen)


def enumerate_sets(system, thresholds=None, limit=SET_LIMIT):
    """All minimum repair sets, up to `limit`, via exclusion cuts."""
    _gate(system)
    sets = []
    cuts = []
    first_size = None
    exhausted = False
    while True:
        chosen, size = _solve_repair(system, thresholds, cuts)
        if chosen is None:
            exhausted = True
            break
        if first_size is None:
            first_size = size
        elif size > first_size:
            exhausted = True
            break
        sets.append(chosen)
        if len(sets) >= limit:
            break
        cuts.append((chosen, len(chosen) - 1))
    return InconsistencyReport(sets=tuple(sets), exhausted=exhausted)


def apply_resolution(system, chosen):
    """Drop the chosen statements and re-assemble the system."""
    chosen = set(chosen)
    known = {st.id for st in system.statements}
    missing = chosen - known
    if missing:
        raise ValidationError(f"unknown statement ids: {sorted(missing)}")
    kept = [st for st in system.statements if st.id not in chosen]
    rebuilt = assemble(system.u_intrinsic, kept, system.thresholds)
    res = feasible(rebuilt)
    if res.status == "infeasible" or (
            res.status == "optimal" and res.eps_star <= DEAD_TOL):
        log.warning("resolution removed %s but the system is still "
                    "unsatisfiable", sorted(chosen))
    return rebuilt


if __name__ == "__main__":
    from .constraints import EmpathicStatement
    from .network import Thresholds, UtilityMatrix

    u = UtilityMatrix(n=3, m=2, entries=np.array([[0.7, 0.3], [0.2, 0.8], [0.5, 0.5]]),
                      kind="intrinsic")
    sts = [
        EmpathicStatement(id="p", source="x", kind="weight-dominance",
                          i=1, j=2, k=1, h=3, factor=1.0, strict=True),
        EmpathicStatement(id="q", source="x", kind="weight-dominance",
                          i=1, j=3, k=1, h=2, factor=1.0, strict=True),
    ]
    report = enumerate_sets(assemble(u, sts, Thresholds()), Thresholds())
    print(report_to_json(report))
