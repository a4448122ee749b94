"""Min-max scaling with median imputation, and seeded feature shuffling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError

DEFAULT_RANGE = (0.3, 0.8)


@dataclass(frozen=True)
class ScalerParams:
    data_min: np.ndarray
    data_max: np.ndarray
    medians: np.ndarray
    lo: float = DEFAULT_RANGE[0]
    hi: float = DEFAULT_RANGE[1]


def fit_minmax(X, feature_range=DEFAULT_RANGE) -> ScalerParams:
    lo, hi = map(float, feature_range)
    if not hi > lo:
        raise ValidationError("feature range needs hi > lo")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise ValidationError("cannot fit a scaler on zero rows")
    observed = ~np.isnan(X)
    any_obs = observed.any(axis=0)
    safe = np.where(observed, X, 0.0)
    data_min = np.where(any_obs, np.min(np.where(observed, X, np.inf), axis=0), 0.0)
    data_max = np.where(any_obs, np.max(np.where(observed, X, -np.inf), axis=0), 0.0)
    medians = np.zeros(X.shape[1])
    for c in np.flatnonzero(any_obs):
        medians[c] = np.median(safe[observed[:, c], c])
    return ScalerParams(data_min, data_max, medians, lo, hi)


def impute(params: ScalerParams, X) -> np.ndarray:
    X = np.array(X, dtype=float)
    rows, cols = np.nonzero(np.isnan(X))
    X[rows, cols] = params.medians[cols]
    return X


def transform(params: ScalerParams, X) -> np.ndarray:
    """Median-impute then map train [min, max] onto [lo, hi]; no clipping."""
    X = impute(params, np.atleast_2d(X))
    span = params.data_max - params.data_min
    constant = span == 0
    t = (X - params.data_min) / np.where(constant, 1.0, span)
    # lo*(1-t) + hi*t hits both endpoints exactly at t = 0 and t = 1
    out = params.lo * (1.0 - t) + params.hi * t
    out[:, constant] = 0.5 * (params.lo + params.hi)
    return out


class MinMaxScaler:
    def __init__(self, feature_range=DEFAULT_RANGE):
        self.feature_range = feature_range
        self.params_: ScalerParams | None = None

    def fit(self, X):
        self.params_ = fit_minmax(X, self.feature_range)
        return self

    def transform(self, X):
        return transform(self.params_, X)

    def fit_transform(self, X):
        return self.fit(X).transform(X)


@dataclass(frozen=True)
class FeaturePermutation:
    permutation: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        p = np.asarray(self.permutation, dtype=np.int64)
        if not np.array_equal(np.sort(p), np.arange(len(p))):
            raise ValidationError("not a permutation")
        object.__setattr__(self, "permutation", p)

    @property
    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.permutation)
        inv[self.permutation] = np.arange(len(self.permutation))
        return inv

    def apply(self, X) -> np.ndarray:
        return np.asarray(X)[:, self.permutation]

    def undo(self, X) -> np.ndarray:
        return np.asarray(X)[:, self.inverse]


def make_permutation(num_features: int, seed: int | None) -> FeaturePermutation:
    if seed is None:
        return FeaturePermutation(np.arange(num_features), None)
    return FeaturePermutation(np.random.default_rng(seed).permutation(num_features), seed)


def shuffle_features(X, seed: int | None):
    """Column ``i`` of the output is column ``permutation[i]`` of the input."""
    X = np.atleast_2d(np.asarray(X))
    perm = make_permutation(X.shape[1], seed)
    return perm.apply(X), perm
