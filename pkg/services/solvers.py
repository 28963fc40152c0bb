"""
Linear solvers for the downstream tasks

LinearSVM: Pegasos stochastic sub-gradient descent on the L2-regularized
hinge loss. fit_ols: damped normal equations, one shared design matrix for
any number of outputs.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import TaskDataError

logger = logging.getLogger(__name__)


class LinearSVM:
    """
    Binary linear SVM trained with single-sample Pegasos updates

    objective(w, b) = lam/2 |w|^2 + mean_i max(0, 1 - y_i (w.x_i + b))

    Step size 1/(lam t); the bias is not regularized. Features are centred on
    the training mean. At the end of every epoch the iterate is kept only if
    it lowers the training objective, so `objective_trace_` never increases.
    """

    def __init__(self, lam: float = 1.0, epochs: int = 20, rng: Optional[np.random.Generator] = None):
        if lam <= 0:
            raise TaskDataError(f"regularization must be positive, got {lam}")
        self.lam = lam
        self.epochs = epochs
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.coef_: Optional[np.ndarray] = None
        self.intercept_: float = 0.0
        self.mean_: Optional[np.ndarray] = None
        self.objective_trace_: List[float] = []

    def objective(self, X: np.ndarray, signs: np.ndarray, w: np.ndarray, b: float) -> float:
        """Training objective on already centred features and +/-1 labels"""
        hinge = np.maximum(0.0, 1.0 - signs * (X @ w + b))
        return float(0.5 * self.lam * np.dot(w, w) + hinge.mean())

    def fit(self, X: np.ndarray, y: np.ndarray) -> 'LinearSVM':
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if set(np.unique(y).tolist()) != {0, 1}:
            raise TaskDataError("SVM training needs both labels 0 and 1")

        self.mean_ = X.mean(axis=0)
        Xc = X - self.mean_
        signs = np.where(y == 1, 1.0, -1.0)
        n, d = Xc.shape

        w = np.zeros(d)
        b = 0.0
        best_w, best_b = w.copy(), b
        best = self.objective(Xc, signs, w, b)
        self.objective_trace_ = []
        t = 0

        for _ in range(self.epochs):
            for i in self.rng.permutation(n):
                t += 1
                eta = 1.0 / (self.lam * t)
                margin = signs[i] * (np.dot(w, Xc[i]) + b)
                w *= 1.0 - eta * self.lam
                if margin < 1.0:
                    w += eta * signs[i] * Xc[i]
                    b += eta * signs[i]

            current = self.objective(Xc, signs, w, b)
            if current < best:
                best, best_w, best_b = current, w.copy(), b
            self.objective_trace_.append(best)

        self.coef_ = best_w
        self.intercept_ = best_b
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        if self.coef_ is None:
            raise TaskDataError("LinearSVM is not fitted")
        return (np.asarray(X, dtype=np.float64) - self.mean_) @ self.coef_ + self.intercept_

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.decision_function(X) > 0.0).astype(np.int64)


def fit_ols(X: np.ndarray, Y: np.ndarray, damping: float = 1e-8) -> Tuple[np.ndarray, np.ndarray]:
    """
    Least squares with an intercept via damped normal equations.

    The design is centred before solving (X^T X + damping I) B = X^T Y, which
    gives the same fit as an explicit intercept column.

    Args:
        X: n x p features
        Y: n targets or n x q targets
        damping: added to the diagonal of the Gram matrix

    Returns:
        (coef, intercept): p x q (or p) coefficients and q (or scalar) intercepts

    Raises:
        TaskDataError: the damped system is singular or the solution is not finite
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise TaskDataError(f"design {X.shape} and targets {Y.shape} do not line up")
    if X.shape[0] < 2:
        raise TaskDataError("least squares needs at least 2 observations")

    x_mean = X.mean(axis=0)
    y_mean = Y.mean(axis=0)
    Xc = X - x_mean
    gram = Xc.T @ Xc + damping * np.eye(X.shape[1])
    try:
        coef = linalg.solve(gram, Xc.T @ (Y - y_mean), assume_a='pos')
    except (linalg.LinAlgError, ValueError) as e:
        raise TaskDataError(f"design matrix is rank-deficient after damping: {e}")
    if not np.all(np.isfinite(coef)):
        raise TaskDataError("design matrix is rank-deficient after damping")

    intercept = y_mean - x_mean @ coef
    return coef, intercept


def predict(coef: np.ndarray, intercept: np.ndarray, X: np.ndarray) -> np.ndarray:
    return np.asarray(X, dtype=np.float64) @ coef + intercept
