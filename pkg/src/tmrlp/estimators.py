"""scikit-learn compatible estimators.

These wrap the functional core so it can be used in pipelines and grid
searches.  They take the usual ``(n_samples, n_features)`` layout and the
semi-supervised label convention of :mod:`sklearn.semi_supervised`:
``y == -1`` marks an unlabeled sample.  ``fit`` is transductive; ``predict``
on new data uses the local-reconstruction extension over the labeled
training samples.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import alptmr
from .baselines import ABSTAIN, DEFAULT_MU, gfhf, llgc, predict_labels
from .exceptions import ValidationError
from .graph import DEFAULT_REG, baseline_graph
from .numerics import DEFAULT_TAU
from .oos import extend_batch

UNLABELED = -1


class _PropagationBase(ClassifierMixin, BaseEstimator):

    def _soft_labels(self, X, Y, labeled_idx):
        raise NotImplementedError

    def fit(self, X, y):
        """Propagate labels from samples with ``y != -1`` to the rest.

        Parameters
        ----------
        X : array-like of shape (n_samples, n_features)
        y : array-like of shape (n_samples,)
            Class labels, ``-1`` for unlabeled samples.

        Returns
        -------
        self
        """
        X, y = check_X_y(X, y, dtype=np.float64)
        labeled = np.flatnonzero(y != UNLABELED)
        if labeled.size == 0:
            raise ValidationError("no labeled samples (all y == -1)")
        self.classes_, codes = np.unique(y[labeled], return_inverse=True)
        Y = np.zeros((self.classes_.size, X.shape[0]))
        Y[codes, labeled] = 1.0
        F = self._soft_labels(X.T, Y, labeled)
        self.label_distributions_ = F.T
        hard = predict_labels(F)
        self.transduction_ = np.where(
            hard == ABSTAIN, UNLABELED, self.classes_[np.maximum(hard, 0)])
        self.labeled_idx_ = labeled
        self.X_labeled_ = X[labeled]
        self._train_soft = F
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        """Soft labels of new samples, shape (n_samples, n_classes)."""
        check_is_fitted(self, "label_distributions_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}")
        S = extend_batch(self._train_soft, self.X_labeled_.T, self.labeled_idx_,
                         X.T, K=min(self.n_neighbors, self.labeled_idx_.size),
                         reg=self.reg)
        return S.T

    def predict(self, X):
        hard = predict_labels(self.decision_function(X).T)
        return np.where(hard == ABSTAIN, UNLABELED, self.classes_[np.maximum(hard, 0)])


class ALPTMRClassifier(_PropagationBase):
    """Label propagation with joint recovery of clean data, labels and weights.

    Parameters
    ----------
    alpha, beta, gamma : float
        Weights of the label-, data- and weight-error penalties (the data
        and weight penalties are scaled by ``alpha`` as well).
    tau : float
        Guard used by the reweighting diagonals.
    n_neighbors : int
        Neighbourhood size of the initial reconstruction graph and of the
        out-of-sample extension.
    u_labeled, u_unlabeled : float
        Label-fitness weights.
    max_iter : int
    tol : float
        Stop once successive soft-label matrices differ by at most ``tol``
        in Frobenius norm.
    reg : float
        Local Gram ridge for reconstruction weights.
    update_order : {"labels_first", "errors_first"}
    clamp_clean_labels : bool

    Attributes
    ----------
    model_ : RecoveredModel
    transduction_ : ndarray of shape (n_samples,)
    label_distributions_ : ndarray of shape (n_samples, n_classes)
        Clean soft labels.
    n_iter_ : int
    """

    def __init__(self, alpha=1e-2, beta=1e-2, gamma=1e-2, tau=DEFAULT_TAU,
                 n_neighbors=7, u_labeled=1.0, u_unlabeled=0.0, max_iter=30,
                 tol=1e-3, reg=DEFAULT_REG, update_order="labels_first",
                 clamp_clean_labels=False):
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.tau = tau
        self.n_neighbors = n_neighbors
        self.u_labeled = u_labeled
        self.u_unlabeled = u_unlabeled
        self.max_iter = max_iter
        self.tol = tol
        self.reg = reg
        self.update_order = update_order
        self.clamp_clean_labels = clamp_clean_labels

    def solver_config(self):
        return alptmr.SolverConfig(
            alpha=self.alpha, beta=self.beta, gamma=self.gamma, tau=self.tau,
            K=self.n_neighbors, u_labeled=self.u_labeled,
            u_unlabeled=self.u_unlabeled, max_iter=self.max_iter, tol=self.tol,
            reg=self.reg, update_order=self.update_order,
            clamp_clean_labels=self.clamp_clean_labels)

    def _soft_labels(self, X, Y, labeled_idx):
        self.model_ = alptmr.fit(X, Y, self.solver_config())
        self.n_iter_ = self.model_.n_iter
        return self.model_.F_clean


class GFHFClassifier(_PropagationBase):
    """Harmonic-function propagation on a reconstruction-weight graph."""

    def __init__(self, n_neighbors=7, reg=DEFAULT_REG):
        self.n_neighbors = n_neighbors
        self.reg = reg

    def _soft_labels(self, X, Y, labeled_idx):
        self.graph_ = baseline_graph(X, self.n_neighbors, self.reg)
        return gfhf(self.graph_, Y, labeled_idx)


class LLGCClassifier(_PropagationBase):
    """Local and global consistency on a reconstruction-weight graph."""

    def __init__(self, mu=DEFAULT_MU, n_neighbors=7, reg=DEFAULT_REG):
        self.mu = mu
        self.n_neighbors = n_neighbors
        self.reg = reg

    def _soft_labels(self, X, Y, labeled_idx):
        self.graph_ = baseline_graph(X, self.n_neighbors, self.reg)
        return llgc(self.graph_, Y, self.mu)
