"""
Composite Default Risk (CDR) metric and companion classification metrics.

Rows are ranked by descending score; ties keep ascending row order unless a
``tie_seed`` asks for a seeded random tie order. Negatives carry weight 20,
positives weight 1. Positives are counted unweighted in both the Lorenz curve
and the capture rate; weights only set the x-axis and the 4% budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ..errors import ValidationError
from ..learners.dataset import cdr_weights

CAPTURE_FRACTION = 0.04


@dataclass(frozen=True)
class ScoredPredictions:
    scores: np.ndarray
    labels: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_scores(cls, scores, labels) -> "ScoredPredictions":
        labels = np.asarray(labels)
        return cls(scores, labels, cdr_weights(labels))

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=float)
        y = np.asarray(self.labels).astype(np.int64)
        w = np.asarray(self.weights, dtype=float)
        if not (s.shape == y.shape == w.shape) or s.ndim != 1:
            raise ValidationError("scores, labels and weights must be equal-length vectors")
        if not np.isin(y, (0, 1)).all():
            raise ValidationError("labels must be 0 or 1")
        if not np.array_equal(w, cdr_weights(y)):
            raise ValidationError("weights must be 20 for label 0 and 1 for label 1")
        if not np.isfinite(s).all():
            raise ValidationError("scores must be finite")
        object.__setattr__(self, "scores", s)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "weights", w)


def _as_predictions(p, labels=None) -> ScoredPredictions:
    if isinstance(p, ScoredPredictions):
        return p
    return ScoredPredictions.from_scores(p, labels)


def rank_order(scores: np.ndarray, tie_seed: int | None = None) -> np.ndarray:
    """Row indices by descending score; ties by index or by a seeded shuffle."""
    m = len(scores)
    secondary = np.arange(m) if tie_seed is None else np.random.default_rng(tie_seed).permutation(m)
    return np.lexsort((secondary, -np.asarray(scores, dtype=float)))


def _lorenz_sum(labels: np.ndarray, weights: np.ndarray) -> float:
    """sum_i w_i * (P_i + P_{i-1}) for cumulative positive counts P_i in ranked order.

    Trapezoidal Lorenz area = this / (2 W P). Integer-valued for integer weights,
    so the normalised ratio below is exact in floating point.
    """
    cp = np.cumsum(labels, dtype=float)
    prev = np.concatenate([[0.0], cp[:-1]])
    return float(np.sum(weights * (cp + prev)))


def normalized_weighted_gini(p, labels=None, tie_seed: int | None = None) -> float:
    p = _as_predictions(p, labels)
    n_pos = int(p.labels.sum())
    if n_pos == 0 or n_pos == len(p.labels):
        raise ValidationError("Gini needs both classes")
    W = float(p.weights.sum())
    order = rank_order(p.scores, tie_seed)
    s_model = _lorenz_sum(p.labels[order], p.weights[order])
    perfect = rank_order(p.labels.astype(float))
    s_perfect = _lorenz_sum(p.labels[perfect], p.weights[perfect])
    # raw Gini = 2 * area - 1 = (S - W P) / (W P)
    return (s_model - W * n_pos) / (s_perfect - W * n_pos)


def capture_rate_at_4pct(p, labels=None, tie_seed: int | None = None) -> float:
    p = _as_predictions(p, labels)
    n_pos = int(p.labels.sum())
    if n_pos == 0:
        raise ValidationError("capture rate needs at least one positive")
    order = rank_order(p.scores, tie_seed)
    budget = CAPTURE_FRACTION * float(p.weights.sum())
    inside = np.cumsum(p.weights[order]) <= budget
    return float(p.labels[order][inside].sum()) / n_pos


def cdr(p, labels=None, tie_seed: int | None = None) -> float:
    p = _as_predictions(p, labels)
    return 0.5 * (normalized_weighted_gini(p, tie_seed=tie_seed) + capture_rate_at_4pct(p, tie_seed=tie_seed))


def cdr_components(p, labels=None, tie_seed: int | None = None) -> dict:
    p = _as_predictions(p, labels)
    g = normalized_weighted_gini(p, tie_seed=tie_seed)
    c = capture_rate_at_4pct(p, tie_seed=tie_seed)
    return {"gini": g, "capture_rate": c, "cdr": 0.5 * (g + c)}


def auc(labels, scores) -> float:
    """Mann-Whitney AUC with average ranks for ties."""
    y = np.asarray(labels).astype(bool)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("AUC needs both classes")
    ranks = rankdata(np.asarray(scores, dtype=float))
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def standard_metrics(p, labels=None, threshold: float = 0.5) -> dict:
    """Accuracy, precision, recall, F1 at ``score >= threshold``, and AUC."""
    p = _as_predictions(p, labels)
    y = p.labels.astype(bool)
    pred = p.scores >= threshold
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {
        "accuracy": float(np.mean(pred == y)),
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "auc": auc(y, p.scores),
    }


# metric(y_true, scores) callables for model selection
def cdr_score(y_true, scores) -> float:
    return cdr(scores, y_true)


def auc_score(y_true, scores) -> float:
    return auc(y_true, scores)


def accuracy_score(y_true, scores) -> float:
    return float(np.mean((np.asarray(scores) >= 0.5) == np.asarray(y_true).astype(bool)))


SEARCH_METRICS = {"cdr": cdr_score, "auc": auc_score, "accuracy": accuracy_score}
