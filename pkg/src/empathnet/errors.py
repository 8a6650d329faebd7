"""Exception hierarchy shared across the toolkit."""


class EmpathnetError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(EmpathnetError):
    """Malformed input data: bad matrix, bad statement, bad index.

    `field` optionally names the offending field/row for structured reporting.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DimensionError(ValidationError):
    """Shape mismatch between matrices/vectors."""


class PreconditionError(EmpathnetError):
    """Operation invoked on inputs outside its contract (e.g. zero diagonal)."""


class PhaseError(EmpathnetError):
    """Session operation attempted in the wrong phase."""


class LockError(EmpathnetError):
    """Session directory is locked by another process."""

    def __init__(self, message, pid=None):
        super().__init__(message)
        self.pid = pid


class NotFoundError(EmpathnetError):
    """Unknown session, expert, or job identifier."""


class StoreError(EmpathnetError):
    """Session persistence failed."""


class VersionError(StoreError):
    """session.json was written by an incompatible format version."""


class CorruptSessionError(StoreError):
    """session.json or events.ndjson failed integrity checks."""


class SolverFailure(EmpathnetError):
    """Underlying LP/MILP/NLP solver reported an unexpected status.

    Carries a path to a plain-text dump of the offending program when one
    was written.
    """

    def __init__(self, message, dump_path=None):
        super().__init__(message)
        self.dump_path = dump_path


class ConflictError(EmpathnetError):
    """Statements contradict a model's structural requirements outright
    (e.g. a zero-weight statement on an arc a model forces positive)."""


class ConvergenceError(EmpathnetError):
    """Iterative routine exhausted its iteration budget.

    `diagnostics` carries the last iterate for post-mortems.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
