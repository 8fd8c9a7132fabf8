"""Closed-form transductive label propagation.

All propagators minimise ``tr(F L F^T) + tr((F - Y) U (F - Y)^T)`` for some
Laplacian ``L`` and diagonal fitness weights ``U``; the minimiser is
``F = Y U (L + U)^{-1}``.
"""

import numpy as np

from .exceptions import SingularSystem, ValidationError
from .graph import laplacian
from .numerics import solve_right

ABSTAIN = -1
GFHF_CLAMP = 1e8
DEFAULT_MU = 0.01


def _check_graph(W):
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValidationError("weight matrix must be square")
    if np.any(W < 0):
        raise ValidationError("baseline propagators need a non-negative graph")
    if not np.allclose(W, W.T, rtol=0, atol=1e-12 * max(1.0, np.abs(W).max())):
        raise ValidationError("baseline propagators need a symmetric graph")
    return W


def general_lp(W, Y, U, normalized=False):
    """Minimiser of the generic smoothness-plus-fitness objective.

    Parameters
    ----------
    W : ndarray of shape (N, N)
        Symmetric non-negative graph.
    Y : ndarray of shape (c, N)
        Initial labels (one-hot on labeled columns, zero elsewhere).
    U : ndarray of shape (N,)
        Diagonal of the fitness-weight matrix.
    normalized : bool
        Use the symmetric normalised Laplacian.

    Returns
    -------
    ndarray of shape (c, N)
    """
    W = _check_graph(W)
    Y = np.asarray(Y, dtype=float)
    U = np.asarray(U, dtype=float)
    if U.ndim != 1 or U.shape[0] != W.shape[0] or Y.shape[1] != W.shape[0]:
        raise ValidationError("shape mismatch between W, Y and U")
    if np.any(U < 0):
        raise ValidationError("fitness weights must be non-negative")
    if not np.any(U > 0):
        # L is singular on every component; nothing anchors the solution
        raise SingularSystem("all fitness weights are zero, L + U is singular")
    L = laplacian(W, normalized=normalized)
    return solve_right(Y * U, L + np.diag(U))


def gfhf(W, Y, labeled_idx):
    """Harmonic-function propagation with labels clamped on ``labeled_idx``."""
    Y = np.asarray(Y, dtype=float)
    labeled_idx = np.asarray(labeled_idx, dtype=int)
    U = np.zeros(Y.shape[1])
    U[labeled_idx] = GFHF_CLAMP
    F = general_lp(W, Y, U, normalized=False)
    F[:, labeled_idx] = Y[:, labeled_idx]
    return F


def llgc(W, Y, mu=DEFAULT_MU):
    """Local and global consistency: normalised Laplacian, ``U = mu * I``."""
    if not mu > 0:
        raise ValidationError("mu must be positive")
    Y = np.asarray(Y, dtype=float)
    return general_lp(W, Y, np.full(Y.shape[1], float(mu)), normalized=True)


def predict_labels(F):
    """Column-wise argmax; ties go to the smaller class, zero columns abstain."""
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    labels = np.argmax(F, axis=0)
    labels[np.all(F == 0, axis=0)] = ABSTAIN
    return labels
