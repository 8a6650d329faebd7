"""Selecting one representative network per decision context.

A feasible statement system usually admits infinitely many empathic
networks.  Each selector here picks the one that optimizes a structural or
informational criterion: separate the stated preferences as strongly as
possible, use as few arcs as possible, concentrate or spread influence,
survive arc failures, or realize a prescribed shape (star, bus/chain, tree).

Every selector returns a SelectionResult carrying the network, the achieved
objective, the standard diagnostics, and a small audit certificate.  Before
returning, the chosen weights are substituted back into the original system;
a violation there is a solver bug, not user error, and raises SolverFailure.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .constraints import feasible, system_program
from .errors import ConflictError, SolverFailure, ValidationError
from .network import (
    EmpathicMatrix,
    NetworkDiagnostics,
    centrality_entropy,
    classify_network,
    global_weight_matrix,
)
from .solver import (
    INFEASIBLE,
    ITERATION_LIMIT,
    EntropyForm,
    MathProgram,
    maximize_entropy,
    minimize_entropy,
    solve_milp,
)

log = logging.getLogger(__name__)

DUST = 1e-12          # anything this small in a returned weight is solver dust
CHECK_TOL = 1e-6      # substitution tolerance for the final re-validation
SNAP_TOL = 1e-6       # bound violations below this are solver dust; snap them
# box widths for re-anchoring interior-point solutions onto clean vertices
ANCHOR_SLACKS = (1e-7, 1e-5)
CENTRAL_STARTS = 32


@dataclass(frozen=True)
class SelectionResult:
    """A selected network plus the evidence that it is the right one.

    objective is None when the system has no strict statement, so the slack
    being optimized is unbounded; the certificate says so and W is a witness.
    global_matrix is filled only by selectors that argue about propagated
    (any-path) empathy.
    """

    W: EmpathicMatrix
    objective: float | None
    diagnostics: NetworkDiagnostics
    certificate: dict
    global_matrix: EmpathicMatrix | None = None


# --------------------------------------------------------------- plumbing


def _weights_to_matrix(system, w, lb_overrides=None, ub_overrides=None):
    """Clean a solver's weight block into a row-stochastic matrix.

    Solvers report values up to their feasibility tolerance off the variable
    bounds (floors come back at 0.00999993, pinned zeros at 6e-8).  Entries
    are clipped onto the bounds that were actually imposed -- a violation
    beyond dust magnitude is a solver bug and raises -- and row sums are then
    repaired on each row's largest entry, which never sits on a tight bound.
    """
    n = system.n
    W = np.array(w, dtype=float).reshape(n, n)
    lo = np.empty((n, n))
    hi = np.empty((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            lo[i - 1, j - 1] = system.lb[system.var_index(i, j)]
            hi[i - 1, j - 1] = system.ub[system.var_index(i, j)]
    for (i, j), val in (lb_overrides or {}).items():
        lo[i - 1, j - 1] = val
    for (i, j), val in (ub_overrides or {}).items():
        hi[i - 1, j - 1] = val
    worst = max(float((lo - W).max()), float((W - hi).max()))
    if worst > SNAP_TOL:
        raise SolverFailure(f"solver left a weight {worst:.3e} outside its bounds")
    W = np.clip(W, lo, hi)
    W[np.abs(W) < DUST] = 0.0
    for i in range(n):
        W[i, int(np.argmax(W[i]))] += 1.0 - W[i].sum()
    return EmpathicMatrix(n=n, entries=W, kind="local")


def _revalidate(system, W, eps_value, dropped_floors=()):
    """Substitute W back into every original row and bound.

    dropped_floors lists experts whose diagonal floor the selector lifted on
    purpose (tree interiors); those diagonals are checked against 0 instead.
    """
    x = np.append(W.entries.ravel(), eps_value if eps_value is not None else 0.0)
    for row, rhs in system.base_eq_rows:
        if abs(row @ x - rhs) > CHECK_TOL:
            raise SolverFailure(f"selected network breaks a row-sum by {row @ x - rhs:.2e}")
    for tag in system.tags():
        for relation, row, rhs in system.rows_for(tag):
            v = row @ x
            bad = ((relation == "ge" and v < rhs - CHECK_TOL)
                   or (relation == "le" and v > rhs + CHECK_TOL)
                   or (relation == "eq" and abs(v - rhs) > CHECK_TOL))
            if bad:
                raise SolverFailure(
                    f"selected network violates statement {tag}: "
                    f"{v:.6f} vs {relation} {rhs:.6f}")
    dropped = set(dropped_floors)
    for i in range(1, system.n + 1):
        for j in range(1, system.n + 1):
            v = W.entries[i - 1, j - 1]
            lo = system.lb[system.var_index(i, j)]
            if i == j and i in dropped:
                lo = 0.0
            hi = system.ub[system.var_index(i, j)]
            if v < lo - CHECK_TOL or v > hi + CHECK_TOL:
                raise SolverFailure(f"w_{i}{j}={v:.6f} escapes its bounds [{lo}, {hi}]")


def _finish(system, fres, certificate, dropped_floors=(),
            lb_overrides=None, ub_overrides=None):
    """Shared tail for the slack-maximizing selectors."""
    W = _weights_to_matrix(system, fres.w, lb_overrides, ub_overrides)
    if fres.status == "unbounded":
        objective = None
        certificate["status"] = "unbounded"
        certificate.setdefault(
            "note", "no strict statement pins the slack; any compatible network works")
    else:
        objective = float(fres.eps_star)
        certificate["status"] = "optimal"
    _revalidate(system, W, fres.eps_star, dropped_floors=dropped_floors)
    return SelectionResult(
        W=W, objective=objective,
        diagnostics=classify_network(W, system.thresholds),
        certificate=certificate)


def _entropy_program(system, sense, lb_overrides=None, ub_overrides=None, eps_min=None):
    """The statement system with a centrality-entropy objective.

    The slack variable is pinned to the minimum admissible value so strict
    statements stay strictly satisfied while the objective is elsewhere.
    """
    base = system_program(system, lb_overrides=lb_overrides,
                          ub_overrides=ub_overrides, maximize_eps=False)
    lb, ub = np.array(base.lb), np.array(base.ub)
    pin = system.thresholds.eps_min if eps_min is None else eps_min
    lb[system.eps_index] = ub[system.eps_index] = pin
    n, nv = system.n, system.nvars
    L = np.zeros((n, nv))
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            L[j - 1, system.var_index(i, j)] = 1.0
    return MathProgram(
        names=base.names, sense=sense, c=np.zeros(nv),
        A_ub=base.A_ub, b_ub=base.b_ub, A_eq=base.A_eq, b_eq=base.b_eq,
        lb=lb, ub=ub, binary=base.binary,
        entropy=EntropyForm(L=L, offset=np.zeros(n), scale=n))


def _anchor(system, omega, lb_overrides=None, ub_overrides=None):
    """Swap an interior-point solution for an equivalent clean vertex.

    Interior solvers leave ~1e-9 dust on bounds and row sums.  Re-solving the
    plain LP inside a thin box around the achieved centralities returns a
    vertex with exact bounds; the entropy depends on the weights only through
    the centralities, so the objective moves by at most second order in the
    box width.
    """
    n = system.n
    for slack in ANCHOR_SLACKS:
        rows = []
        for j in range(1, n + 1):
            row = np.zeros(system.nvars)
            for i in range(1, n + 1):
                row[system.var_index(i, j)] = 1.0
            rows.append(("le", row, float(omega[j - 1]) + slack))
            rows.append(("ge", row, float(omega[j - 1]) - slack))
        res = feasible(system, lb_overrides=lb_overrides,
                       ub_overrides=ub_overrides, extra_rows=rows)
        if res.status != "infeasible":
            return res
    return None


def _entropy_result(system, res, target, lb_overrides=None, extra_cert=None):
    """Shared tail for the entropy selectors: anchor, re-check, package."""
    n = system.n
    omega = np.array(
        [res.x[[system.var_index(i, j) for i in range(1, n + 1)]].sum()
         for j in range(1, n + 1)])
    eps_value = system.thresholds.eps_min
    anchored = _anchor(system, omega, lb_overrides=lb_overrides)
    if anchored is not None:
        w = anchored.w
        if anchored.status == "optimal":
            eps_value = anchored.eps_star
    else:
        log.warning("could not re-anchor the %s solution; keeping the interior point",
                    target)
        w = res.x[:n * n]
    W = _weights_to_matrix(system, w, lb_overrides)
    certificate = {"target": target, "status": "optimal", **(extra_cert or {})}
    _revalidate(system, W, eps_value)
    return SelectionResult(
        W=W, objective=centrality_entropy(W),
        diagnostics=classify_network(W, system.thresholds),
        certificate=certificate)


# --------------------------------------------------------------- selectors


def most_discriminating(system):
    """The network separating all stated strict preferences most strongly.

    Maximizes the common slack of the strict statements; the optimum says how
    decisively the panel's stated leanings can be realized at once.
    """
    res = feasible(system)
    if res.status == "infeasible":
        raise ConflictError("the statements contradict each other; no network exists")
    return _finish(system, res, {"target": "discriminating"})


def sparsest(system, thresholds=None):
    """The compatible network with the fewest carried weights.

    Each weight either clears the intensity floor or is absent; an indicator
    variable per entry counts the carried ones (diagonal floors make every
    diagonal count).  Strict statements keep the minimum slack.
    """
    t = thresholds or system.thresholds
    n, nv = system.n, system.nvars
    big_m = t.big_m_for(n)
    base = system_program(system, maximize_eps=False)
    nn = n * n
    total = nv + nn
    names = base.names + tuple(
        f"arc_{i}_{j}" for i in range(1, n + 1) for j in range(1, n + 1))

    def widen(A):
        return np.hstack([A, np.zeros((A.shape[0], nn))]) if A.shape[0] else np.zeros((0, total))

    link_rows, link_rhs = [], []
    for k in range(nn):
        row = np.zeros(total)
        row[k], row[nv + k] = 1.0, -big_m      # w <= M * arc
        link_rows.append(row)
        link_rhs.append(0.0)
        row = np.zeros(total)
        row[k], row[nv + k] = -1.0, t.eps_prime  # arc on => w >= eps'
        link_rows.append(row)
        link_rhs.append(0.0)

    lb = np.concatenate([base.lb, np.zeros(nn)])
    ub = np.concatenate([base.ub, np.ones(nn)])
    lb[system.eps_index] = t.eps_min
    binary = np.concatenate([np.zeros(nv, bool), np.ones(nn, bool)])
    c = np.concatenate([np.zeros(nv), np.ones(nn)])
    program = MathProgram(
        names=names, sense="min", c=c,
        A_ub=np.vstack([widen(base.A_ub), np.array(link_rows)]),
        b_ub=np.concatenate([base.b_ub, np.array(link_rhs)]),
        A_eq=widen(base.A_eq), b_eq=base.b_eq,
        lb=lb, ub=ub, binary=binary)

    res = solve_milp(program)
    if res.status == INFEASIBLE:
        raise ConflictError(
            "no network carries the minimum preference slack; resolve the statements first")
    if res.status == ITERATION_LIMIT:
        raise SolverFailure("arc-count search hit its iteration limit")
    if abs(res.objective - round(res.objective)) > 1e-6:
        raise SolverFailure(f"arc count came back non-integral: {res.objective!r}")
    count = int(round(res.objective))

    # Re-solve on the integer solution's support for a clean vertex: exact
    # zeros off the support, exact floors on it, best slack among such nets.
    w_int = res.x[:nn].reshape(n, n)
    arcs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)
            if i != j and w_int[i - 1, j - 1] > t.eps_prime / 2.0]
    if n + len(arcs) != count:
        raise SolverFailure(
            f"indicator total {count} disagrees with the support ({n}+{len(arcs)})")
    lb_over = {(i, j): t.eps_prime for i, j in arcs}
    ub_over = {(i, j): 0.0 for i in range(1, n + 1) for j in range(1, n + 1)
               if i != j and (i, j) not in set(arcs)}
    clean = feasible(system, lb_overrides=lb_over, ub_overrides=ub_over)
    if clean.status == "infeasible":
        raise SolverFailure("support re-solve disagrees with the integer solution")

    W = _weights_to_matrix(system, clean.w, lb_over, ub_over)
    eps_value = clean.eps_star if clean.status == "optimal" else t.eps_min
    _revalidate(system, W, eps_value)
    return SelectionResult(
        W=W, objective=count,
        diagnostics=classify_network(W, system.thresholds),
        certificate={"target": "sparse", "status": "optimal",
                     "arcs": tuple(sorted(arcs))})


def central(system, starts=CENTRAL_STARTS, seed=0):
    """The compatible network concentrating influence the most.

    Minimizes centrality entropy.  That is a concave objective, so the
    multistart vertex descent certifies only a best-found local optimum; when
    even that network has no hub holding half the panel's attention, the
    certificate says no central network is compatible with the statements.
    """
    program = _entropy_program(system, "min")
    res = minimize_entropy(program, starts=starts, seed=seed)
    if res.status == INFEASIBLE:
        raise ConflictError(
            "the statements admit no network at the minimum preference slack")
    W = _weights_to_matrix(system, res.x[:system.n * system.n])
    diagnostics = classify_network(W, system.thresholds)
    certificate = {"target": "central", "status": "local-optimum",
                   "starts": res.metadata["starts"], "seed": seed}
    if not diagnostics.is_central:
        certificate["note"] = ("no central network is compatible with the "
                               "statements; returning the most concentrated one found")
    _revalidate(system, W, system.thresholds.eps_min)
    return SelectionResult(
        W=W, objective=centrality_entropy(W),
        diagnostics=diagnostics, certificate=certificate)


def distributed(system):
    """The compatible network spreading influence the most.

    Maximizes centrality entropy; the optimum is unique in the centralities
    and equals ln(n) exactly when perfectly even influence is compatible
    with the statements.
    """
    program = _entropy_program(system, "max")
    res = maximize_entropy(program)
    if res.status == INFEASIBLE:
        raise ConflictError(
            "the statements admit no network at the minimum preference slack")
    return _entropy_result(system, res, "distributed",
                           extra_cert={"stationarity": res.metadata.get("stationarity")})


def resilient_local(system, thresholds=None):
    """The fully dense compatible network with the most even influence.

    Every arc must clear the intensity floor, so no single arc failure can
    disconnect anyone; among such networks the centrality entropy is
    maximized.  Statements pinning an arc to zero rule the target out.
    """
    t = thresholds or system.thresholds
    for st in system.statements:
        if st.kind == "zero-weight":
            raise ConflictError(
                f"statement {st.id} pins w_{st.i}{st.j} to zero; "
                "a fully dense network is impossible")
    floors = {(i, j): t.eps_prime
              for i in range(1, system.n + 1) for j in range(1, system.n + 1)
              if i != j}
    program = _entropy_program(system, "max", lb_overrides=floors, eps_min=t.eps_min)
    res = maximize_entropy(program)
    if res.status == INFEASIBLE:
        raise ConflictError(
            "the statements leave no room for a fully dense network")
    out = _entropy_result(system, res, "resilient-local", lb_overrides=floors)
    if out.diagnostics.density < 1.0:
        raise SolverFailure(
            f"dense selector returned density {out.diagnostics.density:.4f}")
    return out


def resilient_global(system, direction="fwd"):
    """The ring network whose propagated empathy connects everyone.

    Arcs around the panel in the given direction must clear the intensity
    floor and every diagonal is pinned to it, so empathy keeps flowing along
    the ring; the strict statements' slack is maximized on top.  The result
    carries the propagated (any-path) weight matrix, which is entrywise
    positive for such a ring.
    """
    if direction not in ("fwd", "rev"):
        raise ValidationError(f"direction must be 'fwd' or 'rev', got {direction!r}")
    n = system.n
    eps_p = system.thresholds.eps_prime
    if direction == "fwd":
        arcs = [(k, k + 1) for k in range(1, n)] + [(n, 1)]
    else:
        arcs = [(k + 1, k) for k in range(1, n)] + [(1, n)]
    lb_over = {arc: eps_p for arc in arcs}
    ub_over = {(i, j): 0.0 for i in range(1, n + 1) for j in range(1, n + 1)
               if i != j and (i, j) not in set(arcs)}
    ub_over.update({(i, i): eps_p for i in range(1, n + 1)})  # pin diagonals
    res = feasible(system, lb_overrides=lb_over, ub_overrides=ub_over)
    if res.status == "infeasible":
        word = "forward" if direction == "fwd" else "reverse"
        raise ConflictError(f"no {word} empathy ring is compatible with the statements")
    out = _finish(system, res,
                  {"target": "resilient-global", "direction": direction},
                  lb_overrides=lb_over, ub_overrides=ub_over)
    G = global_weight_matrix(out.W)
    if not out.diagnostics.is_irreducible or G.entries.min() <= 0.0:
        raise SolverFailure("ring selector lost strong connectivity")
    return SelectionResult(
        W=out.W, objective=out.objective, diagnostics=out.diagnostics,
        certificate=out.certificate, global_matrix=G)


def star(system, center=None):
    """The hub-and-spokes network: everyone listens only to one center.

    Spokes into the center clear the intensity floor, every other off-
    diagonal weight is zero, and the center listens only to itself.  With no
    center given, all are tried and the one admitting the largest strict
    slack wins (lowest index on ties).
    """
    n = system.n
    eps_p = system.thresholds.eps_prime

    def pattern(c):
        lb_over = {(i, c): eps_p for i in range(1, n + 1) if i != c}
        ub_over = {(i, j): 0.0 for i in range(1, n + 1) for j in range(1, n + 1)
                   if i != j and j != c}
        return lb_over, ub_over

    def attempt(c):
        lb_over, ub_over = pattern(c)
        return feasible(system, lb_overrides=lb_over, ub_overrides=ub_over)

    if center is not None:
        if not 1 <= center <= n:
            raise ValidationError(f"center {center} outside 1..{n}")
        res = attempt(center)
        if res.status == "infeasible":
            raise ConflictError(
                f"a star with center {center} conflicts with the statements")
        chosen = center
    else:
        best = None
        for c in range(1, n + 1):
            r = attempt(c)
            if r.status == "infeasible":
                log.info("star center %d: infeasible", c)
                continue
            score = math.inf if r.status == "unbounded" else r.eps_star
            log.info("star center %d: slack %s", c,
                     "unbounded" if r.status == "unbounded" else f"{r.eps_star:.6f}")
            if best is None or score > best[0]:
                best = (score, c, r)
        if best is None:
            raise ConflictError("no feasible center: every star conflicts with the statements")
        _, chosen, res = best
    lb_over, ub_over = pattern(chosen)
    return _finish(system, res, {"target": "star", "center": chosen},
                   lb_overrides=lb_over, ub_overrides=ub_over)


def bus(system, direction="fwd"):
    """The chain network: each expert listens to the next one along a line.

    Chain arcs clear the intensity floor, all other off-diagonal weights are
    zero, and the terminal expert listens only to themselves; the strict
    statements' slack is maximized on top.
    """
    if direction not in ("fwd", "rev"):
        raise ValidationError(f"direction must be 'fwd' or 'rev', got {direction!r}")
    n = system.n
    eps_p = system.thresholds.eps_prime
    if direction == "fwd":
        arcs = [(k, k + 1) for k in range(1, n)]
    else:
        arcs = [(k + 1, k) for k in range(1, n)]
    lb_over = {arc: eps_p for arc in arcs}
    ub_over = {(i, j): 0.0 for i in range(1, n + 1) for j in range(1, n + 1)
               if i != j and (i, j) not in set(arcs)}
    res = feasible(system, lb_overrides=lb_over, ub_overrides=ub_over)
    if res.status == "infeasible":
        word = "forward" if direction == "fwd" else "reverse"
        raise ConflictError(f"no {word} chain is compatible with the statements")
    return _finish(system, res, {"target": "bus", "direction": direction},
                   lb_overrides=lb_over, ub_overrides=ub_over)


def tree(system, layers):
    """The layered network: each expert listens only to their children.

    layers maps each non-root expert to their parent.  A parent splits all
    their attention across their children (each arc clearing the intensity
    floor, diagonal dropped to zero); leaves listen only to themselves.  The
    dropped diagonal floors are recorded in the certificate.
    """
    n = system.n
    eps_p = system.thresholds.eps_prime
    layers = {int(c): int(p) for c, p in layers.items()}
    children = {}
    for c, p in layers.items():
        if not 1 <= c <= n:
            raise ValidationError(f"layer child {c} outside 1..{n}")
        if not 1 <= p <= n:
            raise ValidationError(f"layer parent {p} outside 1..{n}")
        if c == p:
            raise ValidationError(f"expert {c} cannot be their own parent")
        children.setdefault(p, []).append(c)
    roots = [v for v in range(1, n + 1) if v not in layers]
    if len(roots) != 1:
        raise ValidationError(
            f"a tree needs exactly one root expert; these layers leave {len(roots)}")
    root = roots[0]
    for v in range(1, n + 1):
        seen, cur = set(), v
        while cur != root:
            if cur in seen:
                raise ValidationError(f"parent links loop around expert {cur}")
            seen.add(cur)
            cur = layers[cur]

    internal = sorted(children)
    lb_over, ub_over, extra = {}, {}, []
    for p in internal:
        lb_over[(p, p)] = 0.0
        ub_over[(p, p)] = 0.0
        row = np.zeros(system.nvars)
        for c in children[p]:
            lb_over[(p, c)] = eps_p
            row[system.var_index(p, c)] = 1.0
        extra.append(("eq", row, 1.0))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j and j not in children.get(i, ()):
                ub_over[(i, j)] = 0.0

    res = feasible(system, lb_overrides=lb_over, ub_overrides=ub_over,
                   extra_rows=extra)
    if res.status == "infeasible":
        raise ConflictError("these layers admit no tree network under the statements")
    return _finish(system, res,
                   {"target": "tree", "root": root,
                    "dropped_floors": tuple(internal)},
                   dropped_floors=internal,
                   lb_overrides=lb_over, ub_overrides=ub_over)


if __name__ == "__main__":
    from .constraints import EmpathicStatement, assemble
    from .network import Thresholds, UtilityMatrix

    u = UtilityMatrix(n=3, m=2,
                      entries=np.array([[0.7, 0.3], [0.2, 0.8], [0.5, 0.5]]),
                      kind="intrinsic")
    sts = [EmpathicStatement(id="s1", source="d1", kind="preference",
                             dm=1, better=1, worse=2)]
    system = assemble(u, sts, Thresholds())
    for name, result in (
        ("discriminating", most_discriminating(system)),
        ("sparse", sparsest(system)),
        ("star", star(system)),
    ):
        print(f"--- {name}: objective={result.objective}")
        print(np.round(result.W.entries, 4))
