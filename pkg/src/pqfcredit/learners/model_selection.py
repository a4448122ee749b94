"""Stratified folds, out-of-fold prediction and seeded grid / random search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from ..errors import ValidationError
from ..parallel import map_tasks


def derive_seed(*keys: int) -> int:
    """Deterministic child seed for a tuple of non-negative integer keys."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def stratified_kfold(labels, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """k (train, validation) index pairs; per-class fold counts differ by at most one."""
    labels = np.asarray(labels)
    if k < 2:
        raise ValidationError("need k >= 2 folds")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if len(members) < k:
            raise ValidationError(f"class {c} has {len(members)} members, fewer than k={k}")
        members = rng.permutation(members)
        # continue the round-robin across classes so fold totals stay balanced
        fold_of[members] = (offset + np.arange(len(members))) % k
        offset += len(members)
    idx = np.arange(len(labels))
    return [(idx[fold_of != f], idx[fold_of == f]) for f in range(k)]


def grid(space: dict) -> list[dict]:
    """Cartesian product in key order; the last key varies fastest."""
    keys = list(space)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(space[k] for k in keys))]


def sample_space(space: dict, n_iter: int, seed: int) -> list[dict]:
    """``n_iter`` seeded draws; list values are sampled uniformly, (lo, hi) dicts
    ``{"low": a, "high": b, "log": bool, "int": bool}`` continuously."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_iter):
        cand = {}
        for k, v in space.items():
            if isinstance(v, dict):
                lo, hi = float(v["low"]), float(v["high"])
                if v.get("log"):
                    val = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
                else:
                    val = float(rng.uniform(lo, hi))
                cand[k] = int(round(val)) if v.get("int") else val
            else:
                vals = list(v)
                cand[k] = vals[int(rng.integers(len(vals)))]
        out.append(cand)
    return out


class OutOfFoldScores:
    """Scores for training rows, each produced by a model that never saw that row."""

    def __init__(self, values: np.ndarray, folds=None):
        self.values = np.asarray(values, dtype=float)
        self.folds = folds

    def __len__(self):
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def stack_oof(*scores: OutOfFoldScores) -> OutOfFoldScores:
    for s in scores:
        if not isinstance(s, OutOfFoldScores):
            raise ValidationError("stack_oof only accepts OutOfFoldScores")
    return OutOfFoldScores(np.column_stack([s.values for s in scores]))


def _fit_predict(factory, params, seed, X, y, w, train_idx, val_idx):
    model = factory(params, seed)
    model.fit(X[train_idx], y[train_idx], None if w is None else w[train_idx])
    return model.predict_proba(X[val_idx])


def cross_val_predict(factory, params, X, y, folds, seed: int, sample_weight=None) -> OutOfFoldScores:
    X = np.asarray(X)
    y = np.asarray(y)
    out = np.empty(len(y))
    for f, (tr, va) in enumerate(folds):
        out[va] = _fit_predict(factory, params, derive_seed(seed, f), X, y, sample_weight, tr, va)
    return OutOfFoldScores(out, folds)


@dataclass
class SearchResult:
    best_index: int
    best_params: dict
    mean: float
    std: float
    candidates: list = field(default_factory=list)
    fold_scores: list = field(default_factory=list)

    def summary(self) -> list[dict]:
        return [
            {"params": c, "mean": float(np.mean(s)), "std": float(np.std(s))}
            for c, s in zip(self.candidates, self.fold_scores)
        ]


def _eval_candidate(task, factory, X, y, w, folds, metric, seed):
    ci, params = task
    scores = []
    for f, (tr, va) in enumerate(folds):
        pred = _fit_predict(factory, params, derive_seed(seed, ci, f), X, y, w, tr, va)
        scores.append(float(metric(y[va], pred)))
    return scores


def hyper_search(
    factory,
    candidates: list[dict],
    X,
    y,
    k: int = 5,
    seed: int = 0,
    metric=None,
    sample_weight=None,
    folds=None,
    workers: int | None = None,
) -> SearchResult:
    """k-fold CV of every candidate; argmax of the mean, ties to the lower index.

    ``factory(params, seed)`` must return an object with ``fit`` and
    ``predict_proba``; ``metric(y_true, scores)`` is maximised.
    """
    if not candidates:
        raise ValidationError("empty search space")
    if metric is None:
        raise ValidationError("a metric is required")
    X = np.asarray(X)
    y = np.asarray(y)
    folds = folds if folds is not None else stratified_kfold(y, k, seed)
    run = partial(
        _eval_candidate, factory=factory, X=X, y=y, w=sample_weight, folds=folds, metric=metric, seed=seed
    )
    fold_scores = map_tasks(run, list(enumerate(candidates)), workers)
    means = np.array([np.mean(s) for s in fold_scores])
    best = int(np.argmax(means))  # first maximum
    return SearchResult(
        best,
        dict(candidates[best]),
        float(means[best]),
        float(np.std(fold_scores[best])),
        [dict(c) for c in candidates],
        fold_scores,
    )
