"""Fuzzy judgment matrices: completion under additive consistency,
judgment-level inconsistency repair, and eigenvector intrinsic utilities.

A fuzzy judgment matrix holds pairwise strength-of-preference values in
[0, 1] with r_ss = 0.5 and r_st + r_ts = 1. Experts may leave reciprocal
pairs blank and add indirect statements ("I like a1 over a3", "the gap
a1-a4 exceeds the gap a1-a3"); completion fills the blanks by maximizing
the shared statement slack subject to additive consistency.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConflictError, ConvergenceError, ValidationError
from .network import UtilityMatrix
from .solver import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    MathProgram,
    SolveResult,
    solve_lp,
    solve_milp,
)

RECIP_TOL = 1e-9
# big-M for statement relaxation rows: every judgment expression lives in
# [-1, 1], so 3 dominates any gap
RELAX_M = 3.0
# slack pinned into the repair program (the objective there counts removals)
EPS_FIXED = 1e-4
SET_LIMIT = 64


@dataclass(frozen=True)
class FuzzyJudgmentMatrix:
    """m x m pairwise judgments; None marks a missing cell."""

    m: int
    cells: tuple

    def __post_init__(self):
        cells = tuple(
            tuple(None if v is None else float(v) for v in row) for row in self.cells
        )
        if len(cells) != self.m or any(len(row) != self.m for row in cells):
            raise ValidationError(f"expected {self.m}x{self.m} cells")
        for row in cells:
            for v in row:
                if v is not None and not (0.0 <= v <= 1.0):
                    raise ValidationError(f"judgment {v} outside [0, 1]")
        object.__setattr__(self, "cells", cells)

    def is_complete(self):
        return all(v is not None for row in self.cells for v in row)


@dataclass(frozen=True)
class IntrinsicStatement:
    """Indirect preference information from one expert about their own
    alternatives: either a (strict) preference or a gap comparison."""

    dm: int
    kind: str
    better: int | None = None
    worse: int | None = None
    high: tuple | None = None
    low: tuple | None = None
    strict: bool = True

    def __post_init__(self):
        if self.kind == "preference":
            if self.better is None or self.worse is None:
                raise ValidationError("preference statement needs better/worse")
            if self.better == self.worse:
                raise ValidationError("preference must compare two alternatives")
        elif self.kind == "intensity":
            if self.high is None or self.low is None:
                raise ValidationError("intensity statement needs high/low pairs")
            object.__setattr__(self, "high", tuple(self.high))
            object.__setattr__(self, "low", tuple(self.low))
            for pair in (self.high, self.low):
                if len(pair) != 2 or pair[0] == pair[1]:
                    raise ValidationError("intensity pairs must name two alternatives")
        else:
            raise ValidationError(f"unknown statement kind {self.kind!r}")

    def indices(self):
        if self.kind == "preference":
            return (self.better, self.worse)
        return self.high + self.low


def statement_from_json(blob: dict) -> IntrinsicStatement:
    kind = blob.get("kind")
    if kind == "preference":
        return IntrinsicStatement(
            dm=int(blob["dm"]), kind=kind,
            better=int(blob["better"]), worse=int(blob["worse"]),
            strict=bool(blob.get("strict", True)),
        )
    if kind == "intensity":
        return IntrinsicStatement(
            dm=int(blob["dm"]), kind=kind,
            high=tuple(int(v) for v in blob["high"]),
            low=tuple(int(v) for v in blob["low"]),
            strict=bool(blob.get("strict", True)),
        )
    raise ValidationError(f"unknown statement kind {kind!r}")


def statement_to_json(s: IntrinsicStatement) -> dict:
    if s.kind == "preference":
        return {"dm": s.dm, "kind": s.kind, "better": s.better, "worse": s.worse,
                "strict": s.strict}
    return {"dm": s.dm, "kind": s.kind, "high": list(s.high), "low": list(s.low),
            "strict": s.strict}


@dataclass(frozen=True)
class CompletionResult:
    completed: FuzzyJudgmentMatrix | None
    eps_star: float
    status: str  # completed | inconsistent


def validate(R: FuzzyJudgmentMatrix) -> list:
    """Invariant violations as (code, row, col) tuples, 1-based; empty means
    the matrix is well-formed (possibly still incomplete)."""
    out = []
    for s in range(R.m):
        v = R.cells[s][s]
        if v is None or abs(v - 0.5) > RECIP_TOL:
            out.append(("diagonal", s + 1, s + 1))
    for s in range(R.m):
        for t in range(s + 1, R.m):
            a, b = R.cells[s][t], R.cells[t][s]
            if (a is None) != (b is None):
                out.append(("pairing", s + 1, t + 1))
            elif a is not None and abs(a + b - 1.0) > RECIP_TOL:
                out.append(("reciprocity", s + 1, t + 1))
    return out


def _check_statements(stmts, m):
    for st in stmts:
        for idx in st.indices():
            if not 1 <= idx <= m:
                raise ValidationError(f"statement names alternative {idx}, panel has {m}")


def _upper_index(m):
    pairs = [(s, t) for s in range(m) for t in range(s + 1, m)]
    return pairs, {p: k for k, p in enumerate(pairs)}


def _cell_expr(idx, nv, s, t):
    """(coefficient vector, constant) for r_st in upper-triangle variables."""
    vec = np.zeros(nv)
    if s == t:
        return vec, 0.5
    if s < t:
        vec[idx[(s, t)]] = 1.0
        return vec, 0.0
    vec[idx[(t, s)]] = -1.0
    return vec, 1.0


def _statement_rows(stmts, idx, nv, eps_col):
    """One inequality per statement, as (lhs_row, rhs, position) with the
    convention lhs_row . x <= rhs; eps_col < 0 means the slack is absent."""
    rows = []
    for pos, st in enumerate(stmts):
        if st.kind == "preference":
            vec, const = _cell_expr(idx, nv, st.better - 1, st.worse - 1)
            # vec.x + const >= 0.5 + strict*eps
            row = -vec
            rhs = const - 0.5
        else:
            (s, t), (p, q) = st.high, st.low
            vh, ch = _cell_expr(idx, nv, s - 1, t - 1)
            vl, cl = _cell_expr(idx, nv, p - 1, q - 1)
            # (vh.x + ch) - (vl.x + cl) >= strict*eps
            row = vl - vh
            rhs = ch - cl
        if st.strict and eps_col >= 0:
            row = row.copy()
            row[eps_col] = 1.0
        rows.append((row, rhs, pos))
    return rows


def _completion_program(R, stmts, with_eps, extra_binaries=0):
    m = R.m
    pairs, idx = _upper_index(m)
    nv = len(pairs) + (1 if with_eps else 0) + extra_binaries
    eps_col = len(pairs) if with_eps else -1
    names = [f"r{s + 1}{t + 1}" for s, t in pairs]
    if with_eps:
        names.append("eps")
    names += [f"nu{r + 1}" for r in range(extra_binaries)]

    lb = np.zeros(nv)
    ub = np.ones(nv)
    for k, (s, t) in enumerate(pairs):
        v = R.cells[s][t]
        if v is not None:
            lb[k] = ub[k] = v
    if with_eps:
        lb[eps_col], ub[eps_col] = -np.inf, np.inf

    A_eq, b_eq = [], []
    for s, t, p in itertools.combinations(range(m), 3):
        row = np.zeros(nv)
        row[idx[(s, t)]] += 1.0
        row[idx[(t, p)]] += 1.0
        row[idx[(s, p)]] -= 1.0
        A_eq.append(row)
        b_eq.append(0.5)

    rows = _statement_rows(stmts, idx, nv, eps_col)
    return names, nv, eps_col, lb, ub, A_eq, b_eq, rows, pairs, idx


def _matrix_from_solution(R, pairs, x):
    cells = [[0.5] * R.m for _ in range(R.m)]
    for k, (s, t) in enumerate(pairs):
        v = min(max(float(x[k]), 0.0), 1.0)
        cells[s][t] = v
        cells[t][s] = 1.0 - v
    return FuzzyJudgmentMatrix(m=R.m, cells=tuple(tuple(r) for r in cells))


def complete(R: FuzzyJudgmentMatrix, stmts, eps_prime: float = 0.01) -> CompletionResult:
    """Fill the missing cells, maximizing the shared statement slack.

    The completed matrix keeps every known entry, satisfies additive
    consistency on all triples, and honors each strict statement with margin
    eps*. eps_prime is accepted for interface uniformity with the rest of
    the toolkit's thresholds; the completion program has no weight variables,
    so nothing here depends on it.
    """
    bad = validate(R)
    if bad:
        raise ValidationError(f"judgment matrix is malformed: {bad[0]}")
    _check_statements(stmts, R.m)
    strict_any = any(st.strict for st in stmts)
    names, nv, eps_col, lb, ub, A_eq, b_eq, rows, pairs, idx = _completion_program(
        R, stmts, with_eps=strict_any
    )
    c = np.zeros(nv)
    if strict_any:
        c[eps_col] = 1.0
    p = MathProgram(
        names=tuple(names), sense="max", c=c,
        A_ub=np.array([r for r, _, _ in rows]) if rows else np.zeros((0, nv)),
        b_ub=np.array([b for _, b, _ in rows]),
        A_eq=np.array(A_eq) if A_eq else np.zeros((0, nv)),
        b_eq=np.array(b_eq),
        lb=lb, ub=ub, binary=np.zeros(nv, bool),
    )
    r = solve_lp(p)
    if r.status == INFEASIBLE:
        return CompletionResult(completed=None, eps_star=float("-inf"), status="inconsistent")
    if r.status == UNBOUNDED:
        # possible only when eps appears in no row; re-solve as feasibility
        raise RuntimeError("unexpected unbounded completion")  # pragma: no cover
    if not strict_any:
        return CompletionResult(
            completed=_matrix_from_solution(R, pairs, r.x),
            eps_star=np.inf,
            status="completed",
        )
    if r.objective <= 1e-9:
        return CompletionResult(completed=None, eps_star=float(r.objective), status="inconsistent")
    return CompletionResult(
        completed=_matrix_from_solution(R, pairs, r.x),
        eps_star=float(r.objective),
        status="completed",
    )


def judgment_inconsistency(R: FuzzyJudgmentMatrix, stmts) -> list:
    """Minimum-cardinality statement subsets whose removal restores a
    positive completion slack.

    Big-M relaxation with one binary per statement, then exclusion cuts to
    sweep alternate optima. Returns sorted tuples of 0-based statement
    positions; empty when the statements already complete. A persisting
    infeasibility with everything relaxed means the known cells clash."""
    if complete(R, stmts).status == "completed":
        return []
    _check_statements(stmts, R.m)
    names, nv, _, lb, ub, A_eq, b_eq, rows, pairs, idx = _completion_program(
        R, stmts, with_eps=False, extra_binaries=len(stmts)
    )
    base = len(pairs)
    A_ub, b_ub = [], []
    for row, rhs, pos in rows:
        row = row.copy()
        row[base + pos] = -RELAX_M
        A_ub.append(row)
        b_ub.append(rhs - (EPS_FIXED if stmts[pos].strict else 0.0))
    c = np.zeros(nv)
    c[base:] = 1.0
    binary = np.zeros(nv, bool)
    binary[base:] = True

    cuts_A, cuts_b = [], []
    found = []
    best = None
    while len(found) < SET_LIMIT:
        p = MathProgram(
            names=tuple(names), sense="min", c=c,
            A_ub=np.array(A_ub + cuts_A),
            b_ub=np.array(b_ub + cuts_b),
            A_eq=np.array(A_eq) if A_eq else np.zeros((0, nv)),
            b_eq=np.array(b_eq),
            lb=lb, ub=ub, binary=binary,
        )
        r = solve_milp(p)
        if r.status != OPTIMAL:
            if best is None:
                raise ConflictError(
                    "known judgment cells are themselves inconsistent; "
                    "no statement removal can help"
                )
            break
        k = int(round(r.objective))
        if best is None:
            if k == 0:
                return []
            best = k
        if k > best:
            break
        chosen = tuple(sorted(pos for pos in range(len(stmts)) if r.x[base + pos] > 0.5))
        found.append(chosen)
        cut = np.zeros(nv)
        for pos in chosen:
            cut[base + pos] = 1.0
        cuts_A.append(cut)
        cuts_b.append(float(len(chosen) - 1))
    return sorted(found)


def principal_eigenvector(R: FuzzyJudgmentMatrix, tol: float = 1e-10, max_iter: int = 10000):
    """Dominant eigenpair by power iteration from the uniform vector.

    Returns (lambda_max, u) with u scaled to sum 1."""
    if not R.is_complete():
        raise ValidationError("matrix has missing cells; complete it first")
    A = np.array(R.cells, dtype=float)
    v = np.full(R.m, 1.0 / R.m)
    for it in range(max_iter):
        w = A @ v
        s = w.sum()
        if s <= 0:
            raise ConvergenceError("iterate collapsed to zero", diagnostics={"iteration": it})
        w = w / s
        if np.max(np.abs(w - v)) <= tol:
            lam = float(v @ (A @ v) / (v @ v))
            return lam, w
        v = w
    raise ConvergenceError(
        f"power iteration did not settle in {max_iter} steps",
        diagnostics={"iterations": max_iter, "last": v},
    )


def intrinsic_matrix(matrices) -> UtilityMatrix:
    """Stack each expert's eigenvector into the intrinsic utility matrix."""
    rows = []
    for j, R in enumerate(matrices, start=1):
        if not R.is_complete():
            raise ValidationError(f"expert {j}: matrix has missing cells")
        try:
            _, u = principal_eigenvector(R)
        except ConvergenceError as exc:
            raise ConvergenceError(f"expert {j}: {exc}", diagnostics=exc.diagnostics)
        rows.append(u)
    U = np.vstack(rows)
    return UtilityMatrix(n=U.shape[0], m=U.shape[1], entries=U, kind="intrinsic")


def completion_report_csv(original: FuzzyJudgmentMatrix, result: CompletionResult) -> str:
    """One row per upper-triangle pair: value and whether it was given or
    inferred by completion."""
    if result.completed is None:
        raise ValidationError("no completed matrix to report")
    lines = ["s,t,value,origin"]
    for s in range(original.m):
        for t in range(s + 1, original.m):
            origin = "fixed" if original.cells[s][t] is not None else "inferred"
            lines.append(f"{s + 1},{t + 1},{result.completed.cells[s][t]:.4f},{origin}")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    R = FuzzyJudgmentMatrix(
        m=3, cells=((0.5, 0.7, None), (0.3, 0.5, 0.6), (None, 0.4, 0.5))
    )
    res = complete(R, [], 0.01)
    print("status:", res.status, "eps*:", res.eps_star)
    print(np.array(res.completed.cells))
    print(completion_report_csv(R, res))
