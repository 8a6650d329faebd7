"""Mathematical-program representation and the solving contract.

Desk-scale programs only (a few hundred variables). LPs and binary MILPs go
through scipy's HiGHS bindings, which are deterministic for a fixed program.
The entropy family gets its own routines: maximization is convex (entropy of
affine arguments is concave, we maximize it) and solved by an interior
trust-region scheme; minimization is concave minimization, so we multistart
a vertex-hopping descent and keep the best local optimum.
"""

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize as sopt

from .errors import PreconditionError, SolverFailure, ValidationError

FEAS_TOL = 1e-7
OPT_TOL = 1e-8
INT_TOL = 1e-6

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
LOCAL_OPTIMUM = "local-optimum"
ITERATION_LIMIT = "iteration-limit"


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EntropyForm:
    """Objective sum_j phi(l_j(x)) with phi(y) = -(y/scale) ln(y/scale) and
    l_j(x) = (L x + offset)_j. In network programs the rows of L pick out
    column sums of the weight matrix, so the arguments are centralities."""

    L: np.ndarray
    offset: np.ndarray
    scale: int

    def __post_init__(self):
        object.__setattr__(self, "L", _frozen(self.L))
        object.__setattr__(self, "offset", _frozen(self.offset))
        if self.L.shape[0] != self.offset.shape[0]:
            raise ValidationError("entropy terms and offsets disagree in count")
        if self.scale <= 0:
            raise ValidationError("entropy scale must be positive")


@dataclass(frozen=True)
class MathProgram:
    names: tuple
    sense: str
    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray
    entropy: EntropyForm | None = None

    def __post_init__(self):
        n = len(self.names)
        object.__setattr__(self, "c", _frozen(self.c))
        object.__setattr__(self, "A_ub", _frozen(self.A_ub))
        object.__setattr__(self, "b_ub", _frozen(self.b_ub))
        object.__setattr__(self, "A_eq", _frozen(self.A_eq))
        object.__setattr__(self, "b_eq", _frozen(self.b_eq))
        object.__setattr__(self, "lb", _frozen(self.lb))
        object.__setattr__(self, "ub", _frozen(self.ub))
        object.__setattr__(self, "binary", _frozen(self.binary, dtype=bool))
        if self.sense not in ("max", "min"):
            raise ValidationError(f"unknown sense {self.sense!r}")
        for name, arr, shape in (
            ("c", self.c, (n,)),
            ("b_ub", self.b_ub, (self.A_ub.shape[0],)),
            ("b_eq", self.b_eq, (self.A_eq.shape[0],)),
            ("lb", self.lb, (n,)),
            ("ub", self.ub, (n,)),
            ("binary", self.binary, (n,)),
        ):
            if arr.shape != shape:
                raise ValidationError(f"{name} has shape {arr.shape}, expected {shape}")
        for name, A in (("A_ub", self.A_ub), ("A_eq", self.A_eq)):
            if A.ndim != 2 or A.shape[1] != n:
                raise ValidationError(f"{name} must have {n} columns")
        if self.entropy is not None:
            if self.entropy.L.shape[1] != n:
                raise ValidationError("entropy map must cover all variables")
            if np.any(self.binary):
                raise ValidationError("entropy programs are continuous")

    @property
    def nvars(self):
        return len(self.names)


@dataclass(frozen=True)
class SolveResult:
    status: str
    objective: float | None = None
    x: np.ndarray | None = None
    duals: dict | None = None
    metadata: dict = field(default_factory=dict)


def _dump(p: MathProgram) -> str:
    fd, path = tempfile.mkstemp(suffix=".lp.txt", prefix="empathnet-")
    with os.fdopen(fd, "w") as fh:
        fh.write(program_to_text(p))
    return path


def _terms(names, coefs):
    parts = []
    for name, c in zip(names, coefs):
        if c == 0.0:
            continue
        sign = "+" if c >= 0 else "-"
        parts.append(f"{sign} {abs(c):g} {name}")
    return " ".join(parts) if parts else "0"


def program_to_text(p: MathProgram) -> str:
    """Plain-text dump, one relation per line; the debugging artifact every
    solver failure points at."""
    lines = ["maximize" if p.sense == "max" else "minimize"]
    if p.entropy is not None:
        lines.append(f"  entropy of {p.entropy.L.shape[0]} terms (scale {p.entropy.scale})")
        for j in range(p.entropy.L.shape[0]):
            lines.append(f"  h{j + 1}: {_terms(p.names, p.entropy.L[j])} + {p.entropy.offset[j]:g}")
    else:
        lines.append(f"  {_terms(p.names, p.c)}")
    if p.A_eq.shape[0] or p.A_ub.shape[0]:
        lines.append("subject to")
        for i in range(p.A_eq.shape[0]):
            lines.append(f"  eq{i + 1}: {_terms(p.names, p.A_eq[i])} = {p.b_eq[i]:g}")
        for i in range(p.A_ub.shape[0]):
            lines.append(f"  le{i + 1}: {_terms(p.names, p.A_ub[i])} <= {p.b_ub[i]:g}")
    lines.append("bounds")
    for j, name in enumerate(p.names):
        lo, hi = p.lb[j], p.ub[j]
        if np.isfinite(lo) and np.isfinite(hi):
            lines.append(f"  {name} in [{lo:g}, {hi:g}]")
        elif np.isfinite(lo):
            lines.append(f"  {name} >= {lo:g}")
        elif np.isfinite(hi):
            lines.append(f"  {name} <= {hi:g}")
        else:
            lines.append(f"  {name} free")
    if np.any(p.binary):
        lines.append("binary")
        lines.append("  " + " ".join(n for n, b in zip(p.names, p.binary) if b))
    lines.append("end")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- LP/MILP


def _linprog_parts(p: MathProgram):
    c = -p.c if p.sense == "max" else p.c
    A_ub = p.A_ub if p.A_ub.shape[0] else None
    b_ub = p.b_ub if p.A_ub.shape[0] else None
    A_eq = p.A_eq if p.A_eq.shape[0] else None
    b_eq = p.b_eq if p.A_eq.shape[0] else None
    bounds = list(zip(p.lb, p.ub))
    return c, A_ub, b_ub, A_eq, b_eq, bounds


def solve_lp(p: MathProgram) -> SolveResult:
    """Exact LP solve (HiGHS dual simplex); duals included on optimal."""
    if np.any(p.binary):
        raise PreconditionError("LP solve got binary variables; use solve_milp")
    if p.entropy is not None:
        raise PreconditionError("LP solve got an entropy objective")
    c, A_ub, b_ub, A_eq, b_eq, bounds = _linprog_parts(p)
    res = sopt.linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                       bounds=bounds, method="highs")
    if res.status == 2:
        return SolveResult(status=INFEASIBLE)
    if res.status == 3:
        return SolveResult(status=UNBOUNDED)
    if res.status != 0:
        raise SolverFailure(f"LP solve failed: {res.message}", dump_path=_dump(p))
    duals = {
        "ineq": np.array(res.ineqlin.marginals) if A_ub is not None else np.zeros(0),
        "eq": np.array(res.eqlin.marginals) if A_eq is not None else np.zeros(0),
        "lower": np.array(res.lower.marginals),
        "upper": np.array(res.upper.marginals),
    }
    objective = -res.fun if p.sense == "max" else res.fun
    return SolveResult(status=OPTIMAL, objective=float(objective), x=np.array(res.x),
                       duals=duals, metadata={"iterations": int(res.nit)})


def dual_objective(p: MathProgram, r: SolveResult) -> float:
    """Dual objective reconstructed from the marginals of the canonical
    minimization; equals the primal objective at an optimum (strong duality)."""
    if r.duals is None:
        raise PreconditionError("result carries no duals")
    d = r.duals
    val = 0.0
    if d["ineq"].size:
        val += float(p.b_ub @ d["ineq"])
    if d["eq"].size:
        val += float(p.b_eq @ d["eq"])
    lb = np.where(np.isfinite(p.lb), p.lb, 0.0)
    ub = np.where(np.isfinite(p.ub), p.ub, 0.0)
    val += float(lb @ d["lower"] + ub @ d["upper"])
    return -val if p.sense == "max" else val


def solve_milp(p: MathProgram) -> SolveResult:
    """Branch-and-bound over the declared binaries (HiGHS)."""
    if p.entropy is not None:
        raise PreconditionError("MILP solve got an entropy objective")
    c = -p.c if p.sense == "max" else p.c
    constraints = []
    if p.A_ub.shape[0]:
        constraints.append(sopt.LinearConstraint(p.A_ub, -np.inf, p.b_ub))
    if p.A_eq.shape[0]:
        constraints.append(sopt.LinearConstraint(p.A_eq, p.b_eq, p.b_eq))
    res = sopt.milp(
        c,
        constraints=constraints,
        integrality=p.binary.astype(int),
        bounds=sopt.Bounds(p.lb, p.ub),
    )
    if res.status == 2:
        return SolveResult(status=INFEASIBLE)
    if res.status == 3:
        return SolveResult(status=UNBOUNDED)
    if res.status == 1:
        incumbent = np.array(res.x) if res.x is not None else None
        obj = None
        if incumbent is not None:
            obj = float(p.c @ incumbent)
        return SolveResult(status=ITERATION_LIMIT, objective=obj, x=incumbent)
    if res.status != 0 or res.x is None:
        raise SolverFailure(f"MILP solve failed: {res.message}", dump_path=_dump(p))
    objective = -res.fun if p.sense == "max" else res.fun
    return SolveResult(status=OPTIMAL, objective=float(objective), x=np.array(res.x))


# ---------------------------------------------------------------- entropy


def entropy_value_and_grad(p: MathProgram, x):
    """H(x) and its gradient for the program's entropy form.

    Arguments are guarded below 1e-12 inside the logs; the feasible regions
    used by the models keep them positive anyway."""
    ent = p.entropy
    y = ent.L @ np.asarray(x, dtype=float) + ent.offset
    s = float(ent.scale)
    safe = np.maximum(y, 1e-12)
    q = safe / s
    value = float(-np.sum(np.where(y > 1e-15, q * np.log(q), 0.0)))
    dphi = -(np.log(q) + 1.0) / s
    grad = ent.L.T @ dphi
    return value, grad


def _entropy_hessian_neg(p: MathProgram, x):
    ent = p.entropy
    y = np.maximum(ent.L @ np.asarray(x, dtype=float) + ent.offset, 1e-12)
    return ent.L.T @ (ent.L / (float(ent.scale) * y)[:, None])


def _interior_point(p: MathProgram):
    """Feasible (preferably interior) start: maximize the common slack t."""
    n = p.nvars
    rows, rhs = [], []
    for i in range(p.A_ub.shape[0]):
        rows.append(np.append(p.A_ub[i], 1.0))
        rhs.append(p.b_ub[i])
    for j in range(n):
        if np.isfinite(p.lb[j]):
            r = np.zeros(n + 1)
            r[j], r[n] = -1.0, 1.0
            rows.append(r)
            rhs.append(-p.lb[j])
        if np.isfinite(p.ub[j]):
            r = np.zeros(n + 1)
            r[j], r[n] = 1.0, 1.0
            rows.append(r)
            rhs.append(p.ub[j])
    A_eq = np.hstack([p.A_eq, np.zeros((p.A_eq.shape[0], 1))]) if p.A_eq.shape[0] else np.zeros((0, n + 1))
    probe = MathProgram(
        names=tuple(p.names) + ("slack",),
        sense="max",
        c=np.append(np.zeros(n), 1.0),
        A_ub=np.array(rows) if rows else np.zeros((0, n + 1)),
        b_ub=np.array(rhs),
        A_eq=A_eq,
        b_eq=p.b_eq,
        lb=np.append(np.full(n, -np.inf), 0.0),
        ub=np.append(np.full(n, np.inf), 1.0),
        binary=np.zeros(n + 1, bool),
    )
    r = solve_lp(probe)
    if r.status != OPTIMAL:
        return None
    return r.x[:n]


def maximize_entropy(p: MathProgram) -> SolveResult:
    """Convex entropy maximization; first-order stationarity below 1e-8."""
    if p.entropy is None or p.sense != "max":
        raise PreconditionError("expected a maximization with an entropy objective")
    x0 = _interior_point(p)
    if x0 is None:
        return SolveResult(status=INFEASIBLE)
    constraints = []
    if p.A_eq.shape[0]:
        constraints.append(sopt.LinearConstraint(p.A_eq, p.b_eq, p.b_eq))
    if p.A_ub.shape[0]:
        constraints.append(sopt.LinearConstraint(p.A_ub, -np.inf, p.b_ub))

    def fun(x):
        v, g = entropy_value_and_grad(p, x)
        return -v, -g

    res = sopt.minimize(
        fun,
        x0,
        jac=True,
        hess=lambda x: _entropy_hessian_neg(p, x),
        method="trust-constr",
        bounds=sopt.Bounds(p.lb, p.ub),
        constraints=constraints,
        options={"gtol": 1e-12, "xtol": 1e-14, "maxiter": 3000},
    )
    if res.optimality > OPT_TOL and not res.success:
        raise SolverFailure(
            f"entropy maximization stalled (optimality {res.optimality:.2e})",
            dump_path=_dump(p),
        )
    value, _ = entropy_value_and_grad(p, res.x)
    return SolveResult(
        status=OPTIMAL,
        objective=value,
        x=np.array(res.x),
        metadata={"iterations": int(res.nit), "stationarity": float(res.optimality)},
    )


def minimize_entropy(p: MathProgram, starts: int = 16, seed: int = 0) -> SolveResult:
    """Concave minimization by multistart vertex descent.

    Each start solves an LP for a vertex, then hops to the vertex minimizing
    the local linearization while that strictly lowers the entropy; the
    minimum of a concave function over a polytope sits at a vertex, so the
    walk stays on vertices. Best local optimum over all starts wins.
    """
    if p.entropy is None or p.sense != "min":
        raise PreconditionError("expected a minimization with an entropy objective")
    rng = np.random.default_rng(seed)
    t = p.entropy.L.shape[0]

    def vertex_for(c_obj):
        probe = MathProgram(
            names=p.names, sense="max", c=c_obj,
            A_ub=p.A_ub, b_ub=p.b_ub, A_eq=p.A_eq, b_eq=p.b_eq,
            lb=p.lb, ub=p.ub, binary=p.binary,
        )
        r = solve_lp(probe)
        return r.x if r.status == OPTIMAL else None

    seeds = []
    for j in range(min(starts, t)):
        seeds.append(p.entropy.L[j])  # push mass onto argument j
    while len(seeds) < starts:
        seeds.append(rng.normal(size=p.nvars))

    best = None
    trace = []
    done = 0
    for c_obj in seeds:
        x = vertex_for(np.asarray(c_obj, dtype=float))
        if x is None:
            continue
        done += 1
        val, grad = entropy_value_and_grad(p, x)
        for _ in range(200):
            x_next = vertex_for(-grad)  # max -grad = min grad.x
            if x_next is None:
                break
            v_next, g_next = entropy_value_and_grad(p, x_next)
            if v_next < val - 1e-12:
                x, val, grad = x_next, v_next, g_next
            else:
                break
        trace.append(val)
        if best is None or val < best[0]:
            best = (val, x)
    if best is None:
        if done == 0 and vertex_for(np.zeros(p.nvars)) is None:
            return SolveResult(status=INFEASIBLE)
        raise SolverFailure("no multistart made progress", dump_path=_dump(p))
    return SolveResult(
        status=LOCAL_OPTIMUM,
        objective=float(best[0]),
        x=np.array(best[1]),
        metadata={"starts": done, "seed": seed, "trace": trace},
    )


if __name__ == "__main__":
    demo = MathProgram(
        names=("x", "y"), sense="max", c=np.array([1.0, 2.0]),
        A_ub=np.array([[1.0, 1.0]]), b_ub=np.array([4.0]),
        A_eq=np.zeros((0, 2)), b_eq=np.zeros(0),
        lb=np.zeros(2), ub=np.full(2, np.inf), binary=np.zeros(2, bool),
    )
    out = solve_lp(demo)
    print(out.status, out.objective, out.x)
    print(program_to_text(demo))
