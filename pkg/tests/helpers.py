"""Small shared helpers for the test-suite."""

import numpy as np

# Published matrices carry 4-decimal rounding, so some rows sum to 1 +/- 1e-4.
# Renormalizing is the honest way to feed them through constructors that
# demand 1e-9 row sums; the relative change (<= ~1e-4) sits far below the
# 2e-3 tolerance used for every comparison against published values.


def as_matrix(rows, kind="local"):
    from empathnet.network import EmpathicMatrix

    A = np.asarray(rows, dtype=float)
    A = A / A.sum(axis=1, keepdims=True)
    return EmpathicMatrix(n=A.shape[0], entries=A, kind=kind)


def as_utilities(rows, kind="intrinsic"):
    from empathnet.network import UtilityMatrix

    A = np.asarray(rows, dtype=float)
    if kind == "intrinsic":
        A = A / A.sum(axis=1, keepdims=True)
    return UtilityMatrix(n=A.shape[0], m=A.shape[1], entries=A, kind=kind)
