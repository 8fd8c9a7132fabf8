"""Dense matrix helpers shared by the solvers.

Everything here is a pure function of its inputs and works in float64.
"""

import numpy as np
from scipy import linalg

from .exceptions import SingularSystem, ValidationError

DEFAULT_TAU = 1e-8
_RIDGE_SCALE = 1e-10
_SYMMETRY_RTOL = 1e-10
_RESIDUAL_RTOL = 1e-9


def l21_norm(M):
    """Sum of the Euclidean norms of the rows of ``M``.

    Pass ``M.T`` to get the column-wise variant.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        raise ValidationError("l21_norm of an empty matrix")
    return float(np.sum(np.sqrt(np.sum(M * M, axis=1))))


def frobenius_norm(M):
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        raise ValidationError("frobenius_norm of an empty matrix")
    return float(np.sqrt(np.sum(M * M)))


def reweight_diag(E, axis="cols", tau=DEFAULT_TAU):
    """IRLS weights ``1 / (2 * ||slice_i||_2 + tau)``.

    Parameters
    ----------
    E : ndarray of shape (m, q)
        Current error matrix.
    axis : {"cols", "rows"}
        ``"cols"`` gives one weight per column (length q), ``"rows"`` one
        weight per row (length m).
    tau : float
        Positive guard against zero slices.

    Returns
    -------
    ndarray
        Strictly positive diagonal entries.
    """
    if not tau > 0:
        raise ValidationError("tau must be positive")
    E = np.asarray(E, dtype=float)
    if axis in ("cols", "columns", 0):
        norms = np.linalg.norm(E, axis=0)
    elif axis in ("rows", 1):
        norms = np.linalg.norm(E, axis=1)
    else:
        raise ValidationError(f"unknown axis {axis!r}")
    return 1.0 / (2.0 * norms + tau)


def _check_symmetric(S):
    scale = np.linalg.norm(S)
    if np.linalg.norm(S - S.T) > _SYMMETRY_RTOL * max(scale, 1.0):
        raise ValidationError("system matrix is not symmetric")


def _cholesky_solve(S, rhs):
    # rhs is (dim, k); returns S^{-1} rhs or None when S is not numerically PD
    try:
        factor = linalg.cho_factor(S, lower=True, check_finite=False)
    except linalg.LinAlgError:
        return None
    X = linalg.cho_solve(factor, rhs, check_finite=False)
    if not np.all(np.isfinite(X)):
        return None
    return X


def solve_spd(S, B, check_residual=True):
    """Return ``S^{-1} B`` for symmetric positive (semi)definite ``S``.

    A failed factorisation, or (with ``check_residual``) a first solution
    whose residual exceeds ``1e-9 * max(1, ||B||_F)``, triggers one retry
    with a ridge of ``1e-10 * trace(S) / dim`` on the diagonal.  Callers that
    already regularised ``S`` can skip the residual test so their own,
    smaller ridge is kept.

    Raises
    ------
    SingularSystem
        If the ridged system still cannot be factorised.
    """
    S = np.asarray(S, dtype=float)
    B = np.asarray(B, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValidationError(f"system matrix must be square, got {S.shape}")
    if B.shape[0] != S.shape[0]:
        raise ValidationError(
            f"right-hand side has {B.shape[0]} rows, system has {S.shape[0]}")
    _check_symmetric(S)
    vector = B.ndim == 1
    rhs = B[:, None] if vector else B

    X = _cholesky_solve(S, rhs)
    if X is not None:
        if not check_residual:
            return X[:, 0] if vector else X
        resid = np.linalg.norm(S @ X - rhs)
        if resid <= _RESIDUAL_RTOL * max(1.0, np.linalg.norm(rhs)):
            return X[:, 0] if vector else X

    dim = S.shape[0]
    ridge = _RIDGE_SCALE * np.trace(S) / dim
    if not ridge > 0:
        raise SingularSystem("singular system with non-positive trace")
    X = _cholesky_solve(S + ridge * np.eye(dim), rhs)
    if X is None:
        raise SingularSystem("system stayed singular after ridge retry")
    return X[:, 0] if vector else X


def solve_right(B, S):
    """Solve ``X @ S = B`` for symmetric ``S``.

    This is the right inverse ``B S^{-1}`` used by all closed-form updates.
    """
    B = np.asarray(B, dtype=float)
    return solve_spd(S, B.T).T


def fd_gradient(f, M, h=1e-6):
    """Central-difference gradient of a scalar function of a matrix.

    Parameters
    ----------
    f : callable
        Maps an array shaped like ``M`` to a float.
    M : ndarray
        Evaluation point.
    h : float
        Step size.

    Returns
    -------
    ndarray
        Same shape as ``M``.
    """
    if not h > 0:
        raise ValidationError("step size must be positive")
    M = np.array(M, dtype=float)
    grad = np.zeros_like(M)
    flat = M.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(M)
        flat[i] = orig - h
        fm = f(M)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return grad
