"""Empathic statements and their translation into a tagged linear system.

Statements are the raw material of the empathic-network stage: experts (or
the analyst) assert things like "expert 2 prefers a1 to a3" or "the arc from
2 to 3 must carry at least the minimum weight".  Each statement compiles to
one or two linear relations over the n*n weight variables plus a shared
slack variable ``eps`` that measures how strongly the strict statements can
be satisfied simultaneously.  Every row keeps the id of the statement that
produced it, so downstream repair models can switch individual statements
off again.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .network import Thresholds, UtilityMatrix
from .solver import INFEASIBLE, OPTIMAL, UNBOUNDED, MathProgram, solve_lp

STATEMENT_KINDS = (
    "preference",
    "indifference",
    "intensity",
    "intensity-indifference",
    "zero-weight",
    "weight-floor",
    "weight-dominance",
    "half-share",
    "centrality-gap",
)

_UTILITY_KINDS = ("preference", "indifference", "intensity", "intensity-indifference")
_PAIRED_KINDS = ("indifference", "intensity-indifference")
_NODE_FIELDS = {
    "zero-weight": ("i", "j"),
    "weight-floor": ("i", "j"),
    "weight-dominance": ("i", "j", "k", "h"),
    "half-share": ("i", "j"),
    "centrality-gap": ("i", "j", "k", "h"),
}


@dataclass(frozen=True)
class EmpathicStatement:
    """One atomic piece of information about the empathic network."""

    id: str
    source: str
    kind: str
    dm: int = None
    better: int = None
    worse: int = None
    high: tuple = None
    low: tuple = None
    i: int = None
    j: int = None
    k: int = None
    h: int = None
    factor: float = 1.0
    strict: bool = True

    def __post_init__(self):
        if self.kind not in STATEMENT_KINDS:
            raise ValidationError(f"statement {self.id}: unknown kind {self.kind!r}")
        if self.kind in ("preference", "indifference"):
            if self.dm is None or self.better is None or self.worse is None:
                raise ValidationError(f"statement {self.id}: needs dm, better, worse")
        elif self.kind in ("intensity", "intensity-indifference"):
            if self.dm is None or self.high is None or self.low is None:
                raise ValidationError(f"statement {self.id}: needs dm, high, low")
            object.__setattr__(self, "high", tuple(int(x) for x in self.high))
            object.__setattr__(self, "low", tuple(int(x) for x in self.low))
            if len(self.high) != 2 or len(self.low) != 2:
                raise ValidationError(f"statement {self.id}: high/low must be pairs")
        else:
            for name in _NODE_FIELDS[self.kind]:
                if getattr(self, name) is None:
                    raise ValidationError(f"statement {self.id}: needs field {name}")
        if self.kind == "weight-dominance" and not self.factor > 0:
            raise ValidationError(f"statement {self.id}: factor must be positive")


def empathic_statement_from_json(blob):
    known = ("id", "source", "kind", "dm", "better", "worse", "high", "low",
             "i", "j", "k", "h", "factor", "strict")
    kwargs = {k: blob[k] for k in known if k in blob}
    return EmpathicStatement(**kwargs)


def empathic_statement_to_json(st):
    out = {"id": st.id, "source": st.source, "kind": st.kind}
    for name in ("dm", "better", "worse", "high", "low", "i", "j", "k", "h"):
        val = getattr(st, name)
        if val is not None:
            out[name] = list(val) if isinstance(val, tuple) else val
    if st.kind == "weight-dominance":
        out["factor"] = st.factor
    if st.kind in ("preference", "intensity", "weight-dominance", "centrality-gap"):
        out["strict"] = st.strict
    return out


@dataclass(frozen=True)
class ConstraintSystem:
    """Assembled base block plus one tagged row group per statement.

    Variables are the weights w_ij laid out row-major (``var_index``) and a
    trailing free slack ``eps``.  Nonnegativity of the off-diagonal weights
    and the diagonal floors w_jj >= eps' live in the variable bounds; the
    row-sum equalities form the untagged base block.
    """

    n: int
    m: int
    u_intrinsic: UtilityMatrix
    thresholds: Thresholds
    statements: tuple
    base_eq_rows: tuple
    tag_rows: dict
    lb: np.ndarray
    ub: np.ndarray
    names: tuple = field(default=())

    @property
    def nvars(self):
        return self.n * self.n + 1

    @property
    def eps_index(self):
        return self.n * self.n

    def var_index(self, i, j):
        """Column of w_ij for 1-based expert indices."""
        return (i - 1) * self.n + (j - 1)

    def tags(self):
        return tuple(st.id for st in self.statements)

    def rows_for(self, tag):
        return self.tag_rows[tag]

    def statement_for(self, tag):
        for st in self.statements:
            if st.id == tag:
                return st
        raise KeyError(tag)

    @property
    def has_strict_rows(self):
        eps = self.eps_index
        return any(row[eps] != 0.0
                   for rows in self.tag_rows.values()
                   for _, row, _ in rows)

    def fingerprint(self):
        digest = hashlib.sha256()
        digest.update(str(self.n).encode())
        digest.update(repr(self.thresholds).encode())
        digest.update(self.u_intrinsic.entries.tobytes())
        for st in self.statements:
            digest.update(json.dumps(empathic_statement_to_json(st),
                                     sort_keys=True).encode())
        return digest.hexdigest()


@dataclass(frozen=True)
class FeasibilityResult:
    status: str            # "optimal" | "infeasible" | "unbounded"
    eps_star: float = None
    w: np.ndarray = None


def _check_indices(st, n, m):
    def expert(val, what):
        if not 1 <= val <= n:
            raise ValidationError(
                f"statement {st.id}: {what} index {val} outside 1..{n}",
                field=what.split()[-1])

    def alternative(val):
        if not 1 <= val <= m:
            raise ValidationError(
                f"statement {st.id}: alternative index {val} outside 1..{m}",
                field="alternative")

    if st.kind in _UTILITY_KINDS:
        expert(st.dm, "expert")
        if st.kind in ("preference", "indifference"):
            alternative(st.better)
            alternative(st.worse)
            if st.better == st.worse:
                raise ValidationError(f"statement {st.id}: compares an alternative to itself")
        else:
            for val in (*st.high, *st.low):
                alternative(val)
    else:
        for name in _NODE_FIELDS[st.kind]:
            expert(getattr(st, name), f"node {name}")


def _rows_for_statement(st, u, n, eps_prime):
    """Compile one statement to [(relation, row, rhs)] over n*n+1 columns."""
    nv = n * n + 1
    eps_col = n * n

    def var(i, j):
        return (i - 1) * n + (j - 1)

    def utility_gap_row(dm, plus, minus):
        row = np.zeros(nv)
        gaps = u[:, plus - 1] - u[:, minus - 1]
        row[var(dm, 1):var(dm, n) + 1] = gaps
        return row

    if st.kind == "preference":
        row = utility_gap_row(st.dm, st.better, st.worse)
        if st.strict:
            row[eps_col] = -1.0
        return [("ge", row, 0.0)]
    if st.kind == "indifference":
        row = utility_gap_row(st.dm, st.better, st.worse)
        return [("ge", row.copy(), 0.0), ("le", row, 0.0)]
    if st.kind in ("intensity", "intensity-indifference"):
        row = utility_gap_row(st.dm, st.high[0], st.high[1])
        row -= utility_gap_row(st.dm, st.low[0], st.low[1])
        if st.kind == "intensity":
            if st.strict:
                row[eps_col] = -1.0
            return [("ge", row, 0.0)]
        return [("ge", row.copy(), 0.0), ("le", row, 0.0)]
    if st.kind == "zero-weight":
        row = np.zeros(nv)
        row[var(st.i, st.j)] = 1.0
        return [("eq", row, 0.0)]
    if st.kind == "weight-floor":
        row = np.zeros(nv)
        row[var(st.i, st.j)] = 1.0
        return [("ge", row, eps_prime)]
    if st.kind == "weight-dominance":
        row = np.zeros(nv)
        row[var(st.i, st.j)] += 1.0
        row[var(st.k, st.h)] -= st.factor
        if st.strict:
            row[eps_col] = -1.0
        return [("ge", row, 0.0)]
    if st.kind == "half-share":
        row = np.zeros(nv)
        row[var(st.i, st.j)] += 2.0
        for r in range(1, n + 1):
            row[var(r, st.j)] -= 1.0
        return [("ge", row, 0.0)]
    if st.kind == "centrality-gap":
        row = np.zeros(nv)
        for r in range(1, n + 1):
            row[var(r, st.i)] += 1.0
            row[var(r, st.j)] -= 1.0
            row[var(r, st.k)] -= 1.0
            row[var(r, st.h)] += 1.0
        if st.strict:
            row[eps_col] = -1.0
        return [("ge", row, 0.0)]
    raise ValidationError(f"statement {st.id}: unknown kind {st.kind!r}")


def assemble(u_intrinsic, statements, thresholds):
    """Build the tagged constraint system over the weight variables.

    u_intrinsic : UtilityMatrix of kind "intrinsic" (n experts x m options)
    statements  : iterable of EmpathicStatement
    thresholds  : Thresholds (eps_prime feeds the diagonal floors)
    """
    if u_intrinsic.kind != "intrinsic":
        raise ValidationError("empathic statements expand against intrinsic utilities")
    n, m = u_intrinsic.n, u_intrinsic.m
    thresholds.validate_for(n)

    statements = tuple(statements)
    seen = set()
    for st in statements:
        if st.id in seen:
            raise ValidationError(f"duplicate statement id {st.id!r}")
        seen.add(st.id)
        _check_indices(st, n, m)

    nv = n * n + 1
    base = []
    for i in range(1, n + 1):
        row = np.zeros(nv)
        row[(i - 1) * n:(i - 1) * n + n] = 1.0
        row.setflags(write=False)
        base.append((row, 1.0))

    lb = np.zeros(nv)
    ub = np.ones(nv)
    for j in range(n):
        lb[j * n + j] = thresholds.eps_prime
    lb[n * n] = -np.inf
    ub[n * n] = np.inf
    lb.setflags(write=False)
    ub.setflags(write=False)

    tag_rows = {}
    for st in statements:
        rows = _rows_for_statement(st, u_intrinsic.entries, n, thresholds.eps_prime)
        for _, row, _ in rows:
            row.setflags(write=False)
        tag_rows[st.id] = tuple(rows)

    names = tuple(f"w_{i}_{j}" for i in range(1, n + 1) for j in range(1, n + 1)) + ("eps",)
    return ConstraintSystem(
        n=n, m=m, u_intrinsic=u_intrinsic, thresholds=thresholds,
        statements=statements, base_eq_rows=tuple(base), tag_rows=tag_rows,
        lb=lb, ub=ub, names=names,
    )


def system_program(system, lb_overrides=None, ub_overrides=None,
                   maximize_eps=True, extra_rows=()):
    """Stack the system into a MathProgram.

    lb_overrides / ub_overrides : {(i, j): value} with 1-based indices
    extra_rows                  : iterable of (relation, row, rhs) to append
    maximize_eps                : False gives a pure feasibility objective
    """
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for row, rhs in system.base_eq_rows:
        a_eq.append(row)
        b_eq.append(rhs)
    all_rows = [r for tag in system.tags() for r in system.rows_for(tag)]
    all_rows.extend(extra_rows)
    for relation, row, rhs in all_rows:
        if relation == "eq":
            a_eq.append(row)
            b_eq.append(rhs)
        elif relation == "le":
            a_ub.append(row)
            b_ub.append(rhs)
        elif relation == "ge":
            a_ub.append(-row)
            b_ub.append(-rhs)
        else:
            raise ValidationError(f"unknown relation {relation!r}")

    lb = np.array(system.lb)
    ub = np.array(system.ub)
    for (i, j), val in (lb_overrides or {}).items():
        lb[system.var_index(i, j)] = val
    for (i, j), val in (ub_overrides or {}).items():
        ub[system.var_index(i, j)] = val

    nv = system.nvars
    c = np.zeros(nv)
    if maximize_eps:
        c[system.eps_index] = 1.0
    return MathProgram(
        names=system.names, sense="max", c=c,
        A_ub=np.array(a_ub) if a_ub else np.zeros((0, nv)),
        b_ub=np.array(b_ub) if b_ub else np.zeros(0),
        A_eq=np.array(a_eq), b_eq=np.array(b_eq),
        lb=lb, ub=ub, binary=np.zeros(nv, bool),
    )


def feasible(system, lb_overrides=None, ub_overrides=None, extra_rows=()):
    """Maximal common slack of the strict statements, or a verdict.

    Systems without any strict row leave eps unconstrained; those are
    reported as "unbounded" together with a witness network.
    """
    want_eps = system.has_strict_rows
    program = system_program(system, lb_overrides=lb_overrides,
                             ub_overrides=ub_overrides,
                             maximize_eps=want_eps, extra_rows=extra_rows)
    res = solve_lp(program)
    if res.status == INFEASIBLE:
        return FeasibilityResult(status="infeasible")
    if res.status == UNBOUNDED or not want_eps:
        w = None
        if res.status == OPTIMAL:
            w = res.x[:system.n * system.n].reshape(system.n, system.n)
        return FeasibilityResult(status="unbounded", w=w)
    w = res.x[:system.n * system.n].reshape(system.n, system.n)
    return FeasibilityResult(status="optimal", eps_star=float(res.objective), w=w)


def system_to_text(system):
    """Human-auditable dump: one relation per line, tag up front."""
    from .solver import _terms

    symbol = {"ge": ">=", "le": "<=", "eq": "="}
    lines = [f"empathic constraint system: n={system.n}, "
             f"eps'={system.thresholds.eps_prime:g}"]
    for row, rhs in system.base_eq_rows:
        lines.append(f"[base] {_terms(system.names, row)} = {rhs:g}")
    for tag in system.tags():
        for relation, row, rhs in system.rows_for(tag):
            lines.append(f"[{tag}] {_terms(system.names, row)} {symbol[relation]} {rhs:g}")
    lines.append(f"bounds: off-diagonal w >= 0, diagonal w >= "
                 f"{system.thresholds.eps_prime:g}, eps free")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    u = UtilityMatrix(n=3, m=2, entries=np.array([[0.7, 0.3], [0.2, 0.8], [0.5, 0.5]]),
                      kind="intrinsic")
    sts = [
        EmpathicStatement(id="s1", source="d1", kind="preference", dm=1, better=1, worse=2),
        EmpathicStatement(id="s2", source="analyst", kind="weight-floor", i=1, j=2),
    ]
    system = assemble(u, sts, Thresholds())
    print(system_to_text(system))
    print("feasible:", feasible(system))
