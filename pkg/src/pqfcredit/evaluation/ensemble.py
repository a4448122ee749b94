"""Means ensemble and stacked logistic meta-classifier over two base models."""

from __future__ import annotations

import numpy as np

from ..errors import LeakageError, ValidationError
from ..learners.logistic import LogisticModel, fit_logistic
from ..learners.model_selection import OutOfFoldScores

DEFAULT_META_C = (0.2, 0.04)


def means_ensemble(p_classical, p_quantum) -> np.ndarray:
    a = np.asarray(p_classical, dtype=float)
    b = np.asarray(p_quantum, dtype=float)
    if a.shape != b.shape:
        raise ValidationError(f"score vectors differ in shape: {a.shape} vs {b.shape}")
    return 0.5 * (a + b)


def meta_ensemble_fit(base_scores, labels, C: float, allow_in_sample: bool = False, max_iter: int = 100) -> LogisticModel:
    """Logistic regression on base-model probabilities.

    ``base_scores`` must be :class:`OutOfFoldScores` (see ``stack_oof``) unless
    ``allow_in_sample`` is set; training a stacker on in-sample scores rewards
    whichever base model overfits most.
    """
    if isinstance(base_scores, OutOfFoldScores):
        Z = base_scores.values
    elif allow_in_sample:
        Z = np.asarray(base_scores, dtype=float)
    else:
        raise LeakageError(
            "meta-ensemble needs out-of-fold base scores; pass OutOfFoldScores "
            "or set allow_in_sample=True explicitly"
        )
    Z = np.atleast_2d(Z)
    if Z.ndim != 2 or Z.shape[0] != len(labels):
        raise ValidationError("base scores must be an (m, k) matrix with one row per label")
    return fit_logistic(Z, labels, C=C, max_iter=max_iter)


def meta_ensemble_predict(model: LogisticModel, base_scores) -> np.ndarray:
    return model.predict_proba(np.atleast_2d(np.asarray(base_scores, dtype=float)))
