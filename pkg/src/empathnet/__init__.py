"""Decision support for inferring empathic networks among experts.

The toolkit takes incomplete fuzzy pairwise judgments and partial statements
about who empathizes with whom, and turns them into: intrinsic utilities,
feasibility checks, necessary/possible empathic relations, minimal
inconsistency repairs, target-shaped network selection, and welfare analysis.

The web service (``empathnet.service``), figure rendering
(``empathnet.report``), and the session pipeline shared by the CLI and the
service (``empathnet.workflow``) are imported on demand so that the core
stays importable without their heavier dependencies.
"""

from .constraints import (
    ConstraintSystem,
    EmpathicStatement,
    FeasibilityResult,
    assemble,
    empathic_statement_from_json,
    empathic_statement_to_json,
    feasible,
)
from .errors import (
    ConflictError,
    ConvergenceError,
    DimensionError,
    EmpathnetError,
    PreconditionError,
    SolverFailure,
    ValidationError,
)
from .inconsistency import (
    InconsistencyReport,
    apply_resolution,
    enumerate_sets,
    min_inconsistent_set,
)
from .judgment import (
    CompletionResult,
    FuzzyJudgmentMatrix,
    IntrinsicStatement,
    complete,
    intrinsic_matrix,
    judgment_inconsistency,
    principal_eigenvector,
    statement_from_json,
)
from .network import (
    CentralityVector,
    EmpathicMatrix,
    NetworkDiagnostics,
    Thresholds,
    UtilityMatrix,
    centrality_entropy,
    classify_network,
    empathic_centrality,
    global_utilities,
    global_weight_matrix,
    is_irreducible,
    local_utilities,
    matrix_from_json,
    matrix_to_dot,
    matrix_to_json,
    network_density,
)
from .relations import (
    IMPOSSIBLE,
    NECESSARY,
    POSSIBLE_ONLY,
    SELF_ALWAYS,
    PairProbe,
    RelationMatrix,
    necessary,
    possible,
    probe_pair,
    relation_matrix,
)
from .selection import (
    SelectionResult,
    bus,
    central,
    distributed,
    most_discriminating,
    resilient_global,
    resilient_local,
    sparsest,
    star,
    tree,
)
from .welfare import (
    WelfareReport,
    WelfareRow,
    best_alternative,
    compare_networks,
    social_welfare,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # judgment completion and intrinsic utilities
    "FuzzyJudgmentMatrix", "IntrinsicStatement", "CompletionResult",
    "complete", "judgment_inconsistency", "principal_eigenvector",
    "intrinsic_matrix", "statement_from_json",
    # network objects and diagnostics
    "EmpathicMatrix", "UtilityMatrix", "CentralityVector", "Thresholds",
    "NetworkDiagnostics", "empathic_centrality", "centrality_entropy",
    "network_density", "is_irreducible", "classify_network",
    "local_utilities", "global_utilities", "global_weight_matrix",
    "matrix_to_json", "matrix_from_json", "matrix_to_dot",
    # constraint systems
    "EmpathicStatement", "ConstraintSystem", "FeasibilityResult",
    "assemble", "feasible",
    "empathic_statement_from_json", "empathic_statement_to_json",
    # relations
    "PairProbe", "RelationMatrix", "probe_pair", "necessary", "possible",
    "relation_matrix", "NECESSARY", "POSSIBLE_ONLY", "IMPOSSIBLE",
    "SELF_ALWAYS",
    # inconsistency repair
    "InconsistencyReport", "min_inconsistent_set", "enumerate_sets",
    "apply_resolution",
    # selection
    "SelectionResult", "most_discriminating", "sparsest", "central",
    "distributed", "resilient_local", "resilient_global", "star", "bus",
    "tree",
    # welfare
    "WelfareRow", "WelfareReport", "social_welfare", "best_alternative",
    "compare_networks",
    # errors
    "EmpathnetError", "ValidationError", "DimensionError", "ConflictError",
    "PreconditionError", "ConvergenceError", "SolverFailure",
]
