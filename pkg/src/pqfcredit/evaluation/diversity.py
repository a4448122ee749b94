from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .metrics import rank_order


@dataclass
class DiversityReport:
    correlation: float
    k: int
    top_k_jaccard: float
    feature_names: list
    classical_means: np.ndarray
    quantum_means: np.ndarray

    @property
    def abs_differences(self) -> np.ndarray:
        return np.abs(self.classical_means - self.quantum_means)

    def ranked_features(self, top: int | None = None) -> list[tuple[str, float, float]]:
        """(name, classical mean, quantum mean) by decreasing absolute difference."""
        order = np.argsort(-self.abs_differences, kind="stable")
        rows = [(self.feature_names[i], float(self.classical_means[i]), float(self.quantum_means[i])) for i in order]
        return rows[:top] if top is not None else rows

    def to_dict(self, top: int | None = 20) -> dict:
        return {
            "pearson_correlation": self.correlation,
            "k": self.k,
            "top_k_jaccard": self.top_k_jaccard,
            "features": [
                {"feature": n, "classical": c, "quantum": q} for n, c, q in self.ranked_features(top)
            ],
        }


def diversity_report(p_classical, p_quantum, features, k: int = 100, feature_names=None) -> DiversityReport:
    a = np.asarray(p_classical, dtype=float)
    b = np.asarray(p_quantum, dtype=float)
    X = np.atleast_2d(np.asarray(features, dtype=float))
    if a.shape != b.shape or X.shape[0] != len(a):
        raise ValidationError("scores and feature rows must align")
    if not 1 <= k <= len(a):
        raise ValidationError(f"k={k} must lie in [1, {len(a)}]")
    if np.std(a) == 0 or np.std(b) == 0:
        corr = 0.0
    else:
        corr = float(np.clip(np.corrcoef(a, b)[0, 1], -1.0, 1.0))
    top_a = rank_order(a)[:k]
    top_b = rank_order(b)[:k]
    sa, sb = set(top_a.tolist()), set(top_b.tolist())
    jaccard = len(sa & sb) / len(sa | sb)
    names = list(feature_names) if feature_names is not None else [f"f{i}" for i in range(X.shape[1])]
    return DiversityReport(corr, k, jaccard, names, np.nanmean(X[top_a], axis=0), np.nanmean(X[top_b], axis=0))
