"""Neighbourhood graphs and reconstruction weights.

Samples are columns: ``X`` has shape ``(n_features, n_samples)``.  Weight
matrices follow the column convention ``X ~= X @ W``, so column ``j`` of
``W`` holds the coefficients that rebuild sample ``j``.
"""

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import TooFewPoints, ValidationError
from .numerics import solve_spd

DEFAULT_REG = 1e-3


def _sorted_neighbors(dist, K):
    # stable sort keeps the smaller index first among equal distances
    order = np.argsort(dist, axis=1, kind="stable")
    return order[:, :K]


def knn(X, K):
    """Indices of the ``K`` nearest other samples of every sample.

    Parameters
    ----------
    X : ndarray of shape (n_features, n_samples)
    K : int

    Returns
    -------
    ndarray of shape (n_samples, K)
        Row ``i`` lists neighbours of sample ``i`` by increasing Euclidean
        distance, ties resolved towards the smaller index.  A sample is never
        its own neighbour.
    """
    X = np.asarray(X, dtype=float)
    N = X.shape[1]
    K = int(K)
    if K < 1:
        raise ValidationError("K must be at least 1")
    if N <= K:
        raise TooFewPoints(f"need more than K={K} samples, got {N}")
    dist = cdist(X.T, X.T, metric="sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    return _sorted_neighbors(dist, K)


def local_weights(x, neighbors, reg=DEFAULT_REG):
    """Sum-to-one coefficients that best rebuild ``x`` from ``neighbors``.

    Solves the local Gram system ``(G + r I) w = 1`` with
    ``G = (N - x)^T (N - x)`` and ridge ``r = reg * trace(G) / K``, then
    normalises ``w`` to sum to one.

    Parameters
    ----------
    x : ndarray of shape (n_features,)
    neighbors : ndarray of shape (n_features, K)
    reg : float
    """
    if reg < 0:
        raise ValidationError("reg must be non-negative")
    C = neighbors - x[:, None]
    G = C.T @ C
    K = G.shape[0]
    trace = np.trace(G)
    ridge = reg * trace / K if trace > 0 else reg
    if ridge > 0:
        G = G + ridge * np.eye(K)
    # an explicit ridge makes G positive definite; keep it rather than the
    # larger fallback ridge
    w = solve_spd(G, np.ones(K), check_residual=ridge == 0)
    return w / w.sum()


def lle_weights(X, nbrs, reg=DEFAULT_REG):
    """Locally-linear reconstruction weights.

    Column ``j`` of the result is supported on ``nbrs[j]``, sums to one and
    minimises ``||x_j - sum_i w_i x_{nbr_i}||^2`` (ridge-regularised).
    Negative coefficients are kept.
    """
    X = np.asarray(X, dtype=float)
    nbrs = np.asarray(nbrs)
    N = X.shape[1]
    if nbrs.shape[0] != N:
        raise ValidationError("neighbour list length does not match samples")
    W = np.zeros((N, N))
    for j in range(N):
        idx = nbrs[j]
        W[idx, j] = local_weights(X[:, j], X[:, idx], reg)
    return W


def symmetrize(W):
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValidationError("weight matrix must be square")
    S = 0.5 * (W + W.T)
    np.fill_diagonal(S, 0.0)
    return S


def laplacian(W, normalized=False):
    """Graph Laplacian ``D - W`` or ``I - D^{-1/2} W D^{-1/2}``.

    Degrees are row sums.  In the normalised form, a node of zero degree gets
    an identity row.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValidationError("weight matrix must be square")
    deg = W.sum(axis=1)
    if not normalized:
        return np.diag(deg) - W
    inv_sqrt = np.zeros_like(deg)
    pos = deg > 0
    inv_sqrt[pos] = 1.0 / np.sqrt(deg[pos])
    L = -(inv_sqrt[:, None] * W * inv_sqrt[None, :])
    L[np.diag_indices_from(L)] += 1.0
    # isolated nodes: identity row
    L[~pos, :] = 0.0
    L[~pos, ~pos] = 1.0
    return L


def baseline_graph(X, K=7, reg=DEFAULT_REG):
    """Symmetric, non-negative, zero-diagonal graph for the closed-form baselines.

    Reconstruction weights are symmetrised and negative entries dropped so the
    resulting Laplacian is positive semidefinite.
    """
    W = symmetrize(lle_weights(X, knn(X, K), reg))
    return np.maximum(W, 0.0)
