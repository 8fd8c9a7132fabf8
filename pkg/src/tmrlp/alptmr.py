"""Label propagation with jointly recovered data, labels and graph weights.

The solver decomposes the data, the soft labels and the reconstruction
weights into clean parts plus sparse (l2,1) errors::

    X = X_clean + E_X,   F = F_clean + E_F,   W = W_clean + E_W

and minimises

    ||H - H W_clean||_F^2 + ||W_clean||_F^2
        + tr((F_clean - Y) U (F_clean - Y)^T)
        + alpha * (||E_F^T||_{2,1} + beta ||E_X^T||_{2,1} + gamma ||E_W||_{2,1})

with ``H = [F_clean; X_clean; 1^T]`` by block-coordinate descent.  The l2,1
terms are handled by iteratively reweighted quadratic surrogates with
diagonal weights ``q`` (columns of E_X), ``d`` (columns of E_F) and ``o``
(rows of E_W).

Matrices follow the column-sample convention: ``X`` is ``(n, N)``, ``Y`` and
``F`` are ``(c, N)``, ``W`` is ``(N, N)`` with ``X ~= X @ W``.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import predict_labels
from .data import build_U
from .exceptions import DimensionMismatch, ValidationError
from .graph import DEFAULT_REG, knn, lle_weights
from .numerics import DEFAULT_TAU, frobenius_norm, l21_norm, reweight_diag, solve_right, solve_spd

logger = logging.getLogger(__name__)

UPDATE_ORDERS = ("labels_first", "errors_first")


@dataclass(frozen=True)
class SolverConfig:
    """Hyper-parameters of the solver.

    ``update_order`` selects the sweep order: ``"labels_first"`` updates F before
    E_F, ``"errors_first"`` updates E_F before F.  ``clamp_clean_labels`` zeroes
    negative entries of the reported clean labels after fitting.
    """

    alpha: float = 1e-2
    beta: float = 1e-2
    gamma: float = 1e-2
    tau: float = DEFAULT_TAU
    K: int = 7
    u_labeled: float = 1.0
    u_unlabeled: float = 0.0
    max_iter: int = 30
    tol: float = 1e-3
    seed: int = 0
    reg: float = DEFAULT_REG
    update_order: str = "labels_first"
    clamp_clean_labels: bool = False

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not getattr(self, name) >= 0:
                raise ValidationError(f"{name} must be non-negative")
        if not self.tau > 0:
            raise ValidationError("tau must be positive")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if self.max_iter < 0:
            raise ValidationError("max_iter must be non-negative")
        if self.K < 1:
            raise ValidationError("K must be at least 1")
        if self.u_labeled < 0 or self.u_unlabeled < 0:
            raise ValidationError("fitness weights must be non-negative")
        if self.update_order not in UPDATE_ORDERS:
            raise ValidationError(f"update_order must be one of {UPDATE_ORDERS}")

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass
class SolverState:
    F: np.ndarray
    E_F: np.ndarray
    E_X: np.ndarray
    W: np.ndarray
    E_W: np.ndarray
    q: np.ndarray
    d: np.ndarray
    o: np.ndarray
    u: np.ndarray
    W_init: np.ndarray
    t: int = 0
    objective_trace: list = field(default_factory=list)
    f_delta_trace: list = field(default_factory=list)

    @property
    def F_clean(self):
        return self.F - self.E_F

    @property
    def W_clean(self):
        return self.W - self.E_W


@dataclass
class RecoveredModel:
    """Output of :func:`fit`.

    ``W_clean`` has its diagonal zeroed; ``W_clean_raw`` is the unprojected
    difference ``W - E_W`` that the objective is evaluated on.
    """

    F: np.ndarray
    E_F: np.ndarray
    X: np.ndarray
    E_X: np.ndarray
    W: np.ndarray
    E_W: np.ndarray
    W_init: np.ndarray
    config: SolverConfig
    objective_trace: list
    f_delta_trace: list
    initial_objective: float
    n_iter: int
    converged: bool

    @property
    def F_clean(self):
        Fc = self.F - self.E_F
        if self.config.clamp_clean_labels:
            Fc = np.maximum(Fc, 0.0)
        return Fc

    @property
    def X_clean(self):
        return self.X - self.E_X

    @property
    def W_clean_raw(self):
        return self.W - self.E_W

    @property
    def W_clean(self):
        Wc = self.W - self.E_W
        np.fill_diagonal(Wc, 0.0)
        return Wc

    def diagnostics(self):
        return {
            "objective_trace": list(self.objective_trace),
            "f_delta_trace": list(self.f_delta_trace),
            "initial_objective": self.initial_objective,
            "n_iter": self.n_iter,
            "converged": self.converged,
        }


# ------------------------------------------------------------------ checks

def _check_inputs(X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or Y.ndim != 2:
        raise ValidationError("X and Y must be 2-D")
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(
            f"X has {X.shape[1]} samples but Y has {Y.shape[1]} columns")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise ValidationError("X and Y must be finite")
    colsum = Y.sum(axis=0)
    ok = (np.all((Y == 0) | (Y == 1))
          and np.all((colsum == 0) | (colsum == 1)))
    if not ok:
        raise ValidationError("Y columns must be one-hot (labeled) or zero (unlabeled)")
    if not np.any(colsum == 1):
        raise ValidationError("at least one labeled sample is required")
    return X, Y


# --------------------------------------------------------------- updates

def build_A(W_clean):
    """``(I - W_clean)(I - W_clean)^T``."""
    W_clean = np.asarray(W_clean, dtype=float)
    B = np.eye(W_clean.shape[0]) - W_clean
    A = B @ B.T
    return 0.5 * (A + A.T)


def update_EX(X, A, q, alpha_beta):
    """Data error: ``E_X = X A (A + 2 alpha beta diag(q))^{-1}``."""
    return solve_right(X @ A, A + np.diag(2.0 * alpha_beta * q))


def update_EF(F, A, u, Y, d, alpha):
    """Label error: ``E_F = (F A - Y U + F U)(A + U + 2 alpha diag(d))^{-1}``."""
    rhs = F @ A + (F - Y) * u
    return solve_right(rhs, A + np.diag(u + 2.0 * alpha * d))


def update_F(E_F, A, u, Y):
    """Soft labels: ``F = E_F + Y U (A + U)^{-1}``.

    Setting the F-gradient of the label subproblem to zero gives
    ``(F - E_F)(A + U) = Y U``.
    """
    return E_F + solve_right(Y * u, A + np.diag(u))


def build_H(F_clean, X_clean):
    F_clean = np.asarray(F_clean, dtype=float)
    X_clean = np.asarray(X_clean, dtype=float)
    if F_clean.shape[1] != X_clean.shape[1]:
        raise DimensionMismatch("clean labels and clean data disagree on sample count")
    return np.vstack([F_clean, X_clean, np.ones((1, F_clean.shape[1]))])


def update_W(H, E_W, project=True):
    """Weights: ``W = (H^T H + I)^{-1} (H^T H (I + E_W) + E_W)``.

    With ``project`` the diagonal is zeroed and negative entries clamped to
    zero, in that order.
    """
    M = H.T @ H
    N = M.shape[0]
    W = solve_spd(M + np.eye(N), M + M @ E_W + E_W)
    if project:
        np.fill_diagonal(W, 0.0)
        W = np.maximum(W, 0.0)
    return W


def update_EW(H, W, o, alpha_gamma):
    """Weight error: ``E_W = (H^T H + I + 2 alpha gamma diag(o))^{-1}(H^T H W + W - H^T H)``."""
    M = H.T @ H
    S = M + np.eye(M.shape[0]) + np.diag(2.0 * alpha_gamma * o)
    return solve_spd(S, M @ W + W - M)


def objective(state, X, Y, config):
    """Non-squared l2,1 objective evaluated at ``state``."""
    Fc = state.F - state.E_F
    Xc = X - state.E_X
    Wc = state.W - state.E_W
    H = build_H(Fc, Xc)
    R = Fc - Y
    smooth = (frobenius_norm(H - H @ Wc) ** 2 + frobenius_norm(Wc) ** 2
              + float(np.sum(R * R * state.u)))
    sparse = (l21_norm(state.E_F.T) + config.beta * l21_norm(state.E_X.T)
              + config.gamma * l21_norm(state.E_W))
    return smooth + config.alpha * sparse


# ------------------------------------------------------------------ driver

def init_state(X, Y, config):
    """Reconstruction-weight graph, zero errors, unit IRLS weights, ``F = Y``."""
    X, Y = _check_inputs(X, Y)
    N = X.shape[1]
    W = lle_weights(X, knn(X, config.K), config.reg)
    labeled = np.flatnonzero(Y.sum(axis=0) == 1)
    return SolverState(
        F=Y.copy(),
        E_F=np.zeros_like(Y),
        E_X=np.zeros_like(X),
        W=W,
        E_W=np.zeros((N, N)),
        q=np.ones(N),
        d=np.ones(N),
        o=np.ones(N),
        u=build_U(labeled, N, config.u_labeled, config.u_unlabeled),
        W_init=W.copy(),
    )


def step(state, X, Y, config):
    """One Gauss-Seidel sweep; mutates and returns ``state``.

    Order: E_X, then F and E_F (order set by ``config.update_order``), then
    W and E_W.  Each IRLS diagonal is refreshed right after its error matrix.
    """
    a, b, g = config.alpha, config.beta, config.gamma
    A = build_A(state.W - state.E_W)
    F_prev = state.F

    state.E_X = update_EX(X, A, state.q, a * b)
    state.q = reweight_diag(state.E_X, "cols", config.tau)

    if config.update_order == "labels_first":
        state.F = update_F(state.E_F, A, state.u, Y)
        state.E_F = update_EF(state.F, A, state.u, Y, state.d, a)
        state.d = reweight_diag(state.E_F, "cols", config.tau)
    else:
        state.E_F = update_EF(state.F, A, state.u, Y, state.d, a)
        state.d = reweight_diag(state.E_F, "cols", config.tau)
        state.F = update_F(state.E_F, A, state.u, Y)

    H = build_H(state.F - state.E_F, X - state.E_X)
    state.W = update_W(H, state.E_W)
    state.E_W = update_EW(H, state.W, state.o, a * g)
    state.o = reweight_diag(state.E_W, "rows", config.tau)

    state.t += 1
    state.objective_trace.append(objective(state, X, Y, config))
    state.f_delta_trace.append(frobenius_norm(state.F - F_prev))
    return state


def fit(X, Y, config=None):
    """Run sweeps until ``||F_{t+1} - F_t||_F <= tol`` or ``max_iter``.

    Parameters
    ----------
    X : ndarray of shape (n_features, n_samples)
    Y : ndarray of shape (n_classes, n_samples)
        One-hot columns for labeled samples, zero columns otherwise.
    config : SolverConfig, optional

    Returns
    -------
    RecoveredModel
    """
    config = config or SolverConfig()
    X, Y = _check_inputs(X, Y)
    state = init_state(X, Y, config)
    initial = objective(state, X, Y, config)
    converged = False
    while state.t < config.max_iter:
        step(state, X, Y, config)
        logger.debug("sweep %d: objective %.6g, dF %.3g", state.t,
                     state.objective_trace[-1], state.f_delta_trace[-1])
        if state.f_delta_trace[-1] <= config.tol:
            converged = True
            break
    return RecoveredModel(
        F=state.F, E_F=state.E_F, X=X, E_X=state.E_X, W=state.W, E_W=state.E_W,
        W_init=state.W_init, config=config,
        objective_trace=state.objective_trace, f_delta_trace=state.f_delta_trace,
        initial_objective=initial, n_iter=state.t, converged=converged,
    )


def classify(model, unlabeled_idx=None):
    """Hard labels from the clean soft labels (all samples when no index)."""
    Fc = model.F_clean
    if unlabeled_idx is None:
        return predict_labels(Fc)
    return predict_labels(Fc[:, np.asarray(unlabeled_idx, dtype=int)])
