"""Empathic-network data types and the closed-form network mathematics.

An empathic network is a directed weighted graph on the expert panel: arc
i -> j with weight w_ij says expert i's utility incorporates expert j's
preferences with that intensity. Rows of the weight matrix sum to one, so
each row is how an expert splits attention between themselves (diagonal)
and everybody else.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, PreconditionError, ValidationError

ROW_TOL = 1e-9
POS_TOL = 1e-12
# published matrices print 4 decimals; comparisons against them use 2e-3
PRINT_TOL = 2e-3

MATRIX_KINDS = ("local", "global")
UTILITY_KINDS = ("intrinsic", "local-empathic", "global-empathic")


def _frozen_array(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EmpathicMatrix:
    """n x n row-stochastic weight matrix; kind says whether the weights are
    direct (local) or transitively propagated (global)."""

    n: int
    entries: np.ndarray
    kind: str = "local"

    def __post_init__(self):
        if self.kind not in MATRIX_KINDS:
            raise ValidationError(f"unknown matrix kind {self.kind!r}", field="kind")
        entries = _frozen_array(self.entries)
        if entries.shape != (self.n, self.n):
            raise ValidationError(
                f"expected a {self.n}x{self.n} matrix, got shape {entries.shape}",
                field="entries",
            )
        for i in range(self.n):
            row = entries[i]
            off = np.delete(row, i)
            if np.any(off < -POS_TOL):
                raise ValidationError(
                    f"row {i + 1} has a negative off-diagonal weight", field=f"row {i + 1}"
                )
            s = row.sum()
            if abs(s - 1.0) > ROW_TOL:
                raise ValidationError(
                    f"row {i + 1} sums to {s:.12f}, expected 1", field=f"row {i + 1}"
                )
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class CentralityVector:
    """Empathic centralities: omega_j is column j's total incoming weight,
    i.e. how much the panel as a whole listens to expert j."""

    omega: np.ndarray
    normalized: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", _frozen_array(self.omega))
        object.__setattr__(self, "normalized", _frozen_array(self.normalized))
        n = self.omega.shape[0]
        if abs(self.omega.sum() - n) > ROW_TOL:
            raise ValidationError("centralities must sum to the node count")


@dataclass(frozen=True)
class UtilityMatrix:
    """n experts x m alternatives utilities. Intrinsic rows are normalized
    to sum 1; empathic rows inherit that by construction."""

    n: int
    m: int
    entries: np.ndarray
    kind: str = "intrinsic"

    def __post_init__(self):
        if self.kind not in UTILITY_KINDS:
            raise ValidationError(f"unknown utility kind {self.kind!r}", field="kind")
        entries = _frozen_array(self.entries)
        if entries.shape != (self.n, self.m):
            raise ValidationError(
                f"expected {self.n}x{self.m} utilities, got {entries.shape}", field="entries"
            )
        if np.any(entries < -POS_TOL) or np.any(entries > 1.0 + POS_TOL):
            raise ValidationError("utilities must lie in [0, 1]", field="entries")
        if self.kind == "intrinsic":
            for j in range(self.n):
                s = entries[j].sum()
                if abs(s - 1.0) > 1e-6:
                    raise ValidationError(
                        f"row {j + 1} sums to {s:.8f}, expected 1", field=f"row {j + 1}"
                    )
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class Thresholds:
    """Tunable cutoffs.

    eps_prime: smallest weight that counts as a real empathic link (also the
        diagonal floor models impose on produced local networks);
    delta: |omega_j - 1| tolerance for calling centralities distributed;
    rho0: density cutoff for high resilience;
    eps_min: preference slack pinned into models whose objective is not the
        slack itself;
    big_m: relaxation constant, None means 2n + 1.
    """

    eps_prime: float = 0.01
    delta: float = 0.015
    rho0: float = 0.9
    eps_min: float = 1e-4
    big_m: float | None = None

    def __post_init__(self):
        for name in ("eps_prime", "delta", "rho0", "eps_min"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be strictly positive", field=name)
        if self.big_m is not None and self.big_m <= 0:
            raise ValidationError("big_m must be strictly positive", field="big_m")

    def big_m_for(self, n):
        return self.big_m if self.big_m is not None else 2 * n + 1

    def validate_for(self, n):
        """Checks the n-dependent requirement eps_prime < 1/n (otherwise a
        row cannot hold its diagonal floor plus n-1 forced links)."""
        if self.eps_prime >= 1.0 / n:
            raise ValidationError(
                f"eps_prime {self.eps_prime} must be below 1/n = {1.0 / n:.4f}",
                field="eps_prime",
            )


@dataclass(frozen=True)
class NetworkDiagnostics:
    density: float
    entropy: float
    is_central: bool
    is_distributed: bool
    is_highly_resilient: bool
    is_irreducible: bool
    zero_centralities: tuple = field(default_factory=tuple)


def empathic_centrality(W: EmpathicMatrix) -> CentralityVector:
    """Column sums of W; they always add up to n."""
    omega = W.entries.sum(axis=0)
    return CentralityVector(omega=omega, normalized=omega / W.n)


def local_utilities(W: EmpathicMatrix, U_I: UtilityMatrix) -> UtilityMatrix:
    """U = W U^I: each expert's empathic utility is their weighted blend of
    the panel's intrinsic utilities."""
    if W.kind != "local":
        raise PreconditionError("local utilities need a local weight matrix")
    if W.n != U_I.n:
        raise DimensionError(f"weight matrix is {W.n}x{W.n} but utilities have {U_I.n} rows")
    out = W.entries @ U_I.entries
    return UtilityMatrix(n=W.n, m=U_I.m, entries=out, kind="local-empathic")


def global_weight_matrix(W: EmpathicMatrix) -> EmpathicMatrix:
    """G = (I - W + D)^(-1) D with D = diag(W): the fixed point of passing
    empathy along paths of any length.

    Needs strictly positive diagonals (that is what makes I - W + D
    invertible)."""
    if W.kind != "local":
        raise PreconditionError("global propagation starts from a local matrix")
    d = np.diag(W.entries)
    if np.any(d <= 0.0):
        j = int(np.argmin(d)) + 1
        raise PreconditionError(f"node {j} has a zero diagonal; propagation undefined")
    D = np.diag(d)
    A = np.eye(W.n) - W.entries + D
    G = np.linalg.solve(A, D)
    # solve() leaves harmless negative dust around -1e-17; clamp before the
    # constructor's nonnegativity check
    G[np.abs(G) < POS_TOL] = np.abs(G[np.abs(G) < POS_TOL])
    return EmpathicMatrix(n=W.n, entries=G, kind="global")


def global_utilities(W: EmpathicMatrix, U_I: UtilityMatrix) -> UtilityMatrix:
    """U = G U^I with G the global weight matrix of W."""
    G = global_weight_matrix(W)
    if G.n != U_I.n:
        raise DimensionError(f"weight matrix is {G.n}x{G.n} but utilities have {U_I.n} rows")
    out = G.entries @ U_I.entries
    return UtilityMatrix(n=W.n, m=U_I.m, entries=out, kind="global-empathic")


def centrality_entropy(W: EmpathicMatrix) -> float:
    """Entropy of the normalized centralities, in [0, ln n].

    Zero centralities contribute nothing (x ln x -> 0); callers who care
    get them flagged by classify_network."""
    p = empathic_centrality(W).normalized
    mask = p > 1e-15
    h = -float(np.sum(p[mask] * np.log(p[mask])))
    return max(h, 0.0)


def _support(W: EmpathicMatrix, eps_prime: float) -> np.ndarray:
    """Boolean off-diagonal adjacency: arc i->j iff w_ij clears the
    intensity floor (tiny slack absorbs float dust on renormalized data)."""
    adj = W.entries >= eps_prime - 1e-12
    np.fill_diagonal(adj, False)
    return adj


def network_density(W: EmpathicMatrix, eps_prime: float) -> float:
    """Share of the n(n-1) possible arcs actually present."""
    if W.n < 2:
        raise ValidationError("density needs at least two nodes")
    adj = _support(W, eps_prime)
    return float(adj.sum()) / (W.n * (W.n - 1))


def is_irreducible(W: EmpathicMatrix, eps_prime: float) -> bool:
    """True iff the support digraph is strongly connected.

    Forward and reverse breadth-first search from node 1: strongly connected
    iff everything is reachable both ways."""
    if W.n < 2:
        raise ValidationError("irreducibility needs at least two nodes")
    adj = _support(W, eps_prime)

    def reach(matrix):
        seen = np.zeros(W.n, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            i = frontier.pop()
            for j in np.flatnonzero(matrix[i]):
                if not seen[j]:
                    seen[j] = True
                    frontier.append(int(j))
        return seen

    return bool(reach(adj).all() and reach(adj.T).all())


def classify_network(W: EmpathicMatrix, t: Thresholds) -> NetworkDiagnostics:
    """All the yes/no diagnostics in one pass."""
    c = empathic_centrality(W)
    rho = network_density(W, t.eps_prime)
    distributed = bool(np.all(np.abs(c.omega - 1.0) <= t.delta))
    return NetworkDiagnostics(
        density=rho,
        entropy=centrality_entropy(W),
        is_central=bool(np.any(c.omega >= W.n / 2.0)),
        is_distributed=distributed,
        is_highly_resilient=bool(rho >= t.rho0 and distributed),
        is_irreducible=is_irreducible(W, t.eps_prime),
        zero_centralities=tuple(int(j) + 1 for j in np.flatnonzero(c.omega <= POS_TOL)),
    )


# ------------------------------------------------------------ serialization


def matrix_to_json(W: EmpathicMatrix) -> dict:
    return {"n": W.n, "kind": W.kind, "rows": [[float(x) for x in row] for row in W.entries]}


def matrix_from_json(blob: dict) -> EmpathicMatrix:
    try:
        return EmpathicMatrix(n=int(blob["n"]), entries=np.array(blob["rows"], dtype=float), kind=blob["kind"])
    except KeyError as exc:
        raise ValidationError(f"matrix object is missing key {exc}") from exc


def matrix_to_dot(W: EmpathicMatrix, eps_prime: float) -> str:
    """Graphviz dump: nodes d1..dn, one arc per off-diagonal weight at or
    above the intensity floor, weights printed to 4 decimals."""
    lines = ["digraph empathic {"]
    for i in range(W.n):
        lines.append(f"  d{i + 1};")
    adj = _support(W, eps_prime)
    for i in range(W.n):
        for j in range(W.n):
            if adj[i, j]:
                lines.append(f'  d{i + 1} -> d{j + 1} [label="{W.entries[i, j]:.4f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    rng = np.random.default_rng(0)
    A = rng.dirichlet(np.ones(4), size=4)
    W = EmpathicMatrix(n=4, entries=A, kind="local")
    print("omega =", empathic_centrality(W).omega)
    print("entropy =", centrality_entropy(W))
    print("irreducible:", is_irreducible(W, 0.01))
    print(matrix_to_dot(W, 0.01))
