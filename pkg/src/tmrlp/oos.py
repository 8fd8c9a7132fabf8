"""Label new samples from the clean soft labels of the labeled training set.

A query is rebuilt from its ``K`` nearest labeled neighbours with sum-to-one
local weights; its soft label is the same weighted combination of the
neighbours' clean soft labels.
"""

import numpy as np
from scipy.spatial.distance import cdist

from .baselines import predict_labels
from .exceptions import TooFewLabeled, ValidationError
from .graph import DEFAULT_REG, local_weights


def _soft_labels(model_or_F):
    F = getattr(model_or_F, "F_clean", model_or_F)
    return np.asarray(F, dtype=float)


def extend_batch(model, X_labeled, labeled_idx, X_queries, K=7, reg=DEFAULT_REG):
    """Soft labels for every column of ``X_queries``.

    Parameters
    ----------
    model : RecoveredModel or ndarray of shape (c, N)
        Fitted model, or directly a soft-label matrix over the training set.
    X_labeled : ndarray of shape (n_features, l)
        Labeled training samples, in the order of ``labeled_idx``.
    labeled_idx : array of int, length l
        Training-set columns of the labeled samples.
    X_queries : ndarray of shape (n_features, m)
    K : int
    reg : float
        Local Gram ridge, as for the training graph.

    Returns
    -------
    ndarray of shape (c, m)
    """
    F = _soft_labels(model)
    X_labeled = np.asarray(X_labeled, dtype=float)
    labeled_idx = np.asarray(labeled_idx, dtype=int)
    X_queries = np.asarray(X_queries, dtype=float)
    if X_queries.ndim == 1:
        X_queries = X_queries[:, None]
    if X_labeled.shape[1] != labeled_idx.size:
        raise ValidationError("X_labeled and labeled_idx disagree in length")
    if K < 1:
        raise ValidationError("K must be at least 1")
    if labeled_idx.size < K:
        raise TooFewLabeled(f"{labeled_idx.size} labeled samples, K={K}")
    if X_queries.shape[0] != X_labeled.shape[0]:
        raise ValidationError("queries and labeled samples differ in dimension")
    m = X_queries.shape[1]
    out = np.zeros((F.shape[0], m))
    if m == 0:
        return out
    F_lab = F[:, labeled_idx]
    dist = cdist(X_queries.T, X_labeled.T, metric="sqeuclidean")
    # ties resolve by training index, which makes the result independent of
    # the order in which labeled samples are passed
    for j in range(m):
        order = np.lexsort((labeled_idx, dist[j]))[:K]
        w = local_weights(X_queries[:, j], X_labeled[:, order], reg)
        out[:, j] = F_lab[:, order] @ w
    return out


def extend(model, X_labeled, labeled_idx, x_new, K=7, reg=DEFAULT_REG):
    """Soft label vector of one new sample."""
    x_new = np.asarray(x_new, dtype=float).reshape(-1)
    return extend_batch(model, X_labeled, labeled_idx, x_new[:, None], K, reg)[:, 0]


def predict_new(model, X_labeled, labeled_idx, X_queries, K=7, reg=DEFAULT_REG):
    """Hard labels of new samples; empty input gives an empty array."""
    X_queries = np.asarray(X_queries, dtype=float)
    if X_queries.ndim == 2 and X_queries.shape[1] == 0:
        return np.zeros(0, dtype=int)
    return predict_labels(extend_batch(model, X_labeled, labeled_idx, X_queries, K, reg))
