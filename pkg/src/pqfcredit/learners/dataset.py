from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError

NEGATIVE_WEIGHT = 20.0
POSITIVE_WEIGHT = 1.0


def cdr_weights(labels) -> np.ndarray:
    """20 for label 0, 1 for label 1."""
    labels = np.asarray(labels)
    return np.where(labels == 1, POSITIVE_WEIGHT, NEGATIVE_WEIGHT)


@dataclass
class Dataset:
    """Labelled tabular data. Missing cells are NaN."""

    features: np.ndarray
    labels: np.ndarray
    weights: np.ndarray | None = None
    feature_names: list = field(default_factory=list)
    dropped_columns: list = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 2:
            raise ValidationError("features must be a 2-D array")
        self.labels = np.asarray(self.labels).astype(np.int64)
        if self.labels.shape != (self.features.shape[0],):
            raise ValidationError("row counts of features and labels differ")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValidationError("labels must be 0 or 1")
        if self.weights is None:
            self.weights = cdr_weights(self.labels)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != self.labels.shape or not (self.weights > 0).all():
            raise ValidationError("weights must be positive, one per row")
        if not self.feature_names:
            self.feature_names = [f"f{i}" for i in range(self.features.shape[1])]
        if len(self.feature_names) != self.features.shape[1]:
            raise ValidationError("one feature name per column required")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(
            self.features[idx],
            self.labels[idx],
            self.weights[idx],
            list(self.feature_names),
            list(self.dropped_columns),
        )

    def select_columns(self, cols) -> "Dataset":
        cols = list(cols)
        return Dataset(
            self.features[:, cols],
            self.labels,
            self.weights,
            [self.feature_names[c] for c in cols],
            list(self.dropped_columns),
        )

    def class_counts(self) -> tuple[int, int]:
        pos = int(self.labels.sum())
        return len(self) - pos, pos
