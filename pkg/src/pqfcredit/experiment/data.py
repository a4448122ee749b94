"""Dataset ingestion, synthetic stand-in data, subsampling and the 50/50 split."""

from __future__ import annotations

import csv
import logging
import math
from pathlib import Path

import numpy as np

from ..errors import ValidationError
from ..learners.dataset import Dataset

log = logging.getLogger(__name__)

FEATURE_PREFIXES = ("D_", "R_", "S_", "P_", "B_")

# latent class separation; a depth-3 GBDT on m=2000, F=20 (50/50 split)
# reaches test AUC 0.89-0.92 over seeds 0-4
_POS_MEAN = np.array([1.8, 1.1])
_POS_SCALE = np.array([1.0, 1.7])


def generate_synthetic(
    m: int,
    num_features: int,
    positive_fraction: float = 0.2,
    missing_fraction: float = 0.0,
    seed: int = 0,
    signal_dim: int = 2,
) -> Dataset:
    """Class-conditional Gaussian data with a planted low-dimensional signal.

    A latent ``signal_dim``-vector separates the classes (different mean and
    spread for positives). Roughly half of the columns are noisy linear mixes of
    it; the rest are correlated nuisance. Every third column is exponentiated
    to mimic skewed balance-type variables. Rows are shuffled and cells go
    missing completely at random.
    """
    if not 0 <= positive_fraction < 1 or not 0 <= missing_fraction < 1:
        raise ValidationError("fractions must lie in [0, 1)")
    if m < 1 or num_features < 1:
        raise ValidationError("need m >= 1 and at least one feature")
    rng = np.random.default_rng(seed)
    n_pos = int(round(positive_fraction * m))
    labels = np.zeros(m, dtype=np.int64)
    labels[:n_pos] = 1

    d = signal_dim
    mean = np.resize(_POS_MEAN, d)
    scale = np.resize(_POS_SCALE, d)
    z = rng.standard_normal((m, d))
    z[:n_pos] = z[:n_pos] * scale + mean

    n_sig = max(1, num_features // 2)
    mix = rng.standard_normal((d, n_sig))
    mix /= np.linalg.norm(mix, axis=0, keepdims=True)
    signal = z @ mix + 0.5 * rng.standard_normal((m, n_sig))

    n_noise = num_features - n_sig
    common = rng.standard_normal((m, 1))
    nuisance = 0.6 * common + 0.8 * rng.standard_normal((m, n_noise))

    X = np.hstack([signal, nuisance])
    X = X[:, rng.permutation(num_features)]
    X[:, 1::3] = np.exp(0.5 * X[:, 1::3])

    order = rng.permutation(m)
    X, labels = X[order], labels[order]
    if missing_fraction > 0:
        X[rng.random(X.shape) < missing_fraction] = np.nan
    names = [f"{FEATURE_PREFIXES[i % len(FEATURE_PREFIXES)]}{i:02d}" for i in range(num_features)]
    return Dataset(X, labels, feature_names=names)


def subsample(ds: Dataset, policy: str, count: int, seed: int) -> Dataset:
    """``balanced``: count/2 per class. ``stratified``: keeps the class ratio."""
    n_neg, n_pos = ds.class_counts()
    if policy == "balanced":
        want_pos = count // 2
        want_neg = count - want_pos
    elif policy == "stratified":
        want_pos = int(round(count * n_pos / len(ds)))
        want_neg = count - want_pos
    else:
        raise ValidationError(f"unknown subsample policy {policy!r}")
    if want_pos > n_pos or want_neg > n_neg:
        raise ValidationError(
            f"{policy} subsample of {count} needs {want_neg}/{want_pos} rows, have {n_neg}/{n_pos}"
        )
    rng = np.random.default_rng(seed)
    pos = rng.choice(np.flatnonzero(ds.labels == 1), want_pos, replace=False)
    neg = rng.choice(np.flatnonzero(ds.labels == 0), want_neg, replace=False)
    return ds.take(np.sort(np.concatenate([pos, neg])))


def train_test_split(ds: Dataset, seed: int, train_fraction: float = 0.5) -> tuple[Dataset, Dataset]:
    """Stratified split; with the default fraction both halves have equal size."""
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in (0, 1):
        idx = rng.permutation(np.flatnonzero(ds.labels == c))
        cut = int(round(train_fraction * len(idx)))
        train.append(idx[:cut])
        test.append(idx[cut:])
    tr, te = np.sort(np.concatenate(train)), np.sort(np.concatenate(test))
    return ds.take(tr), ds.take(te)


def _parse_cell(text: str, row: int, col: str) -> float:
    if text.strip() == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"row {row}: column {col!r} value {text!r} is not numeric") from None


def load_csv(
    path,
    label_column: str = "target",
    drop_columns=("customer_ID", "S_2"),
    id_column: str | None = "customer_ID",
    date_column: str | None = "S_2",
) -> Dataset:
    """Read a header-first CSV. Empty cells are missing.

    If both ``id_column`` and ``date_column`` exist only each customer's latest
    record is kept. Non-modelling columns are dropped, zero-variance columns are
    removed and listed in ``Dataset.dropped_columns``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        rows = []
        for i, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise ValidationError(f"row {i}: expected {len(header)} cells, got {len(row)}")
            rows.append((i, row))
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    if label_column not in header:
        raise ValidationError(f"label column {label_column!r} missing")

    col = {name: j for j, name in enumerate(header)}
    if id_column in col and date_column in col:
        latest = {}
        for i, row in rows:
            key = row[col[id_column]]
            if key not in latest or row[col[date_column]] >= latest[key][1][col[date_column]]:
                latest[key] = (i, row)
        rows = sorted(latest.values(), key=lambda t: t[0])

    drop = set(drop_columns or ()) | {label_column}
    feat_names = [h for h in header if h not in drop]
    X = np.empty((len(rows), len(feat_names)))
    y = np.empty(len(rows), dtype=np.int64)
    for r, (i, row) in enumerate(rows):
        lab = row[col[label_column]].strip()
        if lab not in ("0", "1", "0.0", "1.0"):
            raise ValidationError(f"row {i}: label {lab!r} is not binary")
        y[r] = int(float(lab))
        for c, name in enumerate(feat_names):
            X[r, c] = _parse_cell(row[col[name]], i, name)

    keep, dropped = [], []
    for c, name in enumerate(feat_names):
        vals = X[:, c][~np.isnan(X[:, c])]
        if vals.size == 0 or np.all(vals == vals[0]):
            dropped.append(name)
        else:
            keep.append(c)
    if dropped:
        log.info("dropping zero-variance columns: %s", ", ".join(dropped))
    return Dataset(X[:, keep], y, feature_names=[feat_names[c] for c in keep], dropped_columns=dropped)


def save_csv(ds: Dataset, path, label_column: str = "target", extra_columns: dict | None = None) -> None:
    """Write features (repr-formatted, so reloading is bit-exact) and the label."""
    extra = extra_columns or {}
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(ds.feature_names) + [label_column] + list(extra))
        for r in range(len(ds)):
            cells = ["" if np.isnan(v) else repr(float(v)) for v in ds.features[r]]
            cells.append(str(int(ds.labels[r])))
            cells += [repr(float(extra[k][r])) for k in extra]
            w.writerow(cells)
