"""L2-regularised logistic regression (Newton solver) and the prior-only dummy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import ValidationError

GRAD_TOL = 1e-8


def logistic_objective(params: np.ndarray, X: np.ndarray, y: np.ndarray, w: np.ndarray, C: float):
    """Loss and gradient of sum_i w_i * logloss_i + ||coef||^2 / (2C).

    ``params`` is (coef..., intercept); the intercept is not penalised.
    """
    coef, b = params[:-1], params[-1]
    z = X @ coef + b
    loss = float(np.sum(w * (np.logaddexp(0.0, z) - y * z)) + coef @ coef / (2.0 * C))
    r = w * (expit(z) - y)
    grad = np.concatenate([X.T @ r + coef / C, [r.sum()]])
    return loss, grad


@dataclass
class LogisticModel:
    coef: np.ndarray
    intercept: float
    C: float
    n_iter: int = 0
    grad_norm: float = np.nan

    def decision_function(self, X) -> np.ndarray:
        return np.atleast_2d(np.asarray(X, dtype=float)) @ self.coef + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))

    def to_dict(self) -> dict:
        return {"coef": self.coef.tolist(), "intercept": self.intercept, "C": self.C}


def fit_logistic(X, y, C: float = 1.0, max_iter: int = 100, sample_weight=None) -> LogisticModel:
    """Damped Newton iterations until the gradient norm is <= 1e-8 or ``max_iter``."""
    if C <= 0:
        raise ValidationError("C must be positive")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if np.isnan(X).any():
        raise ValidationError("logistic regression needs imputed features")
    if np.unique(y).size < 2:
        raise ValidationError("training set must contain both classes")
    m, d = X.shape
    w = np.ones(m) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    Xb = np.hstack([X, np.ones((m, 1))])
    penalty = np.full(d + 1, 1.0 / C)
    penalty[-1] = 0.0

    params = np.zeros(d + 1)
    prior = np.sum(w * y) / np.sum(w)
    params[-1] = np.log(prior / (1.0 - prior))
    loss, grad = logistic_objective(params, X, y, w, C)
    it = 0
    for it in range(1, max_iter + 1):
        if np.linalg.norm(grad) <= GRAD_TOL:
            it -= 1
            break
        p = expit(Xb @ params)
        hess = (Xb * (w * p * (1 - p))[:, None]).T @ Xb + np.diag(penalty)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        t = 1.0
        while True:
            cand = params - t * step
            cand_loss, cand_grad = logistic_objective(cand, X, y, w, C)
            if cand_loss <= loss or t < 1e-10:
                break
            t *= 0.5
        params, loss, grad = cand, cand_loss, cand_grad
    return LogisticModel(params[:-1].copy(), float(params[-1]), C, it, float(np.linalg.norm(grad)))


def logreg_fit(train, C: float, iterations: int = 100, weighted: bool = False) -> LogisticModel:
    from .preprocessing import fit_minmax, impute

    X = train.features
    if np.isnan(X).any():
        X = impute(fit_minmax(X), X)
    return fit_logistic(X, train.labels, C, iterations, train.weights if weighted else None)


class LogisticClassifier:
    def __init__(self, C: float = 1.0, max_iter: int = 100):
        self.C = C
        self.max_iter = max_iter
        self.model_: LogisticModel | None = None

    def fit(self, X, y, sample_weight=None):
        self.model_ = fit_logistic(X, y, self.C, self.max_iter, sample_weight)
        return self

    def predict_proba(self, X) -> np.ndarray:
        return self.model_.predict_proba(X)


class DummyClassifier:
    """Predicts the training positive-class prior for every row."""

    def __init__(self):
        self.prior_: float | None = None

    def fit(self, X, y, sample_weight=None):
        y = np.asarray(y, dtype=float)
        w = np.ones_like(y) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        self.prior_ = float(np.sum(w * y) / np.sum(w))
        return self

    def predict_proba(self, X) -> np.ndarray:
        return np.full(np.atleast_2d(X).shape[0], self.prior_)


def dummy_fit(train, weighted: bool = False) -> DummyClassifier:
    return DummyClassifier().fit(train.features, train.labels, train.weights if weighted else None)


def dummy_predict(model: DummyClassifier, features) -> np.ndarray:
    return model.predict_proba(features)
