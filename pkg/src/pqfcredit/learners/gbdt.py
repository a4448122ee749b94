"""
Gradient-boosted regression trees for binary classification.

Second-order boosting of the weighted logistic loss. For each round the
gradient ``g = p - y`` and hessian ``h = p (1 - p)`` (times sample weight) are
accumulated per node; a split is scored by

    gain = 1/2 [G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam)] - gamma

with ``lam = 1``. Trees are grown greedily with exact split enumeration over
the sorted values of each candidate column. Missing values (NaN) are sent to
whichever child gives the larger gain; that default direction is stored per
split. Leaves output ``-eta * G / (H + lam)`` in log-odds.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numba
import numpy as np
from scipy.special import expit

from ..errors import ValidationError

REG_LAMBDA = 1.0


@dataclass(frozen=True)
class GbdtParams:
    learning_rate: float = 0.3
    n_estimators: int = 100
    max_depth: int = 6
    min_child_weight: float = 1.0
    subsample: float = 1.0
    colsample_bytree: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if not 0 < self.learning_rate <= 1:
            raise ValidationError("learning_rate must lie in (0, 1]")
        if not 0 < self.subsample <= 1 or not 0 < self.colsample_bytree <= 1:
            raise ValidationError("subsample and colsample_bytree must lie in (0, 1]")
        if self.n_estimators < 0 or self.max_depth < 0:
            raise ValidationError("n_estimators and max_depth must be non-negative")
        if self.min_child_weight < 0 or self.gamma < 0:
            raise ValidationError("min_child_weight and gamma must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "GbdtParams":
        names = cls.__dataclass_fields__
        kw = {k: v for k, v in d.items() if k in names}
        for k in ("n_estimators", "max_depth"):
            if k in kw:
                kw[k] = int(kw[k])
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    default_left: np.ndarray
    value: np.ndarray

    @property
    def num_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self) -> np.ndarray:
        return self.left < 0

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.left[node] >= 0
        while active.any():
            r = rows[active]
            nd = node[active]
            x = X[r, self.feature[nd]]
            go_left = np.where(np.isnan(x), self.default_left[nd], x < self.threshold[nd])
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.left[node] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "default_left": self.default_left.tolist(),
            "value": self.value.tolist(),
        }


def logistic_loss(y: np.ndarray, margin: np.ndarray, w: np.ndarray) -> float:
    """Weight-averaged log loss at the given log-odds."""
    return float(np.sum(w * (np.logaddexp(0.0, margin) - y * margin)) / np.sum(w))


def _seqsum(a: np.ndarray) -> float:
    # left-to-right like the compiled kernel; np.sum is pairwise
    return float(np.cumsum(a)[-1]) if len(a) else 0.0


def _leaf_score(G, H):
    return G * G / (H + REG_LAMBDA)


def _best_split(Xn: np.ndarray, g: np.ndarray, h: np.ndarray, min_child_weight: float):
    """Best (gain_before_gamma, column, threshold, default_left) for one node, or None.

    ``Xn`` holds the node's rows restricted to the candidate columns.
    """
    k, f = Xn.shape
    if k < 2:
        return None
    G, H = _seqsum(g), _seqsum(h)
    order = np.argsort(Xn, axis=0, kind="stable")  # NaN sorts last
    xs = np.take_along_axis(Xn, order, axis=0)
    nan = np.isnan(xs)
    gs = np.where(nan, 0.0, g[order])
    hs = np.where(nan, 0.0, h[order])
    cg = np.cumsum(gs, axis=0)
    ch = np.cumsum(hs, axis=0)
    # summed directly so nodes without NaN get exactly zero and the direction tie holds
    g_miss = np.cumsum(np.where(nan, g[order], 0.0), axis=0)[-1]
    h_miss = np.cumsum(np.where(nan, h[order], 0.0), axis=0)[-1]
    g_obs, h_obs = G - g_miss, H - h_miss

    GL, HL = cg[:-1], ch[:-1]
    GR, HR = g_obs - GL, h_obs - HL
    valid = ~nan[1:] & (xs[1:] > xs[:-1])

    ok_r = valid & (HL >= min_child_weight) & (HR + h_miss >= min_child_weight)
    ok_l = valid & (HL + h_miss >= min_child_weight) & (HR >= min_child_weight)
    gain_r = np.where(ok_r, _leaf_score(GL, HL) + _leaf_score(GR + g_miss, HR + h_miss), -np.inf)
    gain_l = np.where(ok_l, _leaf_score(GL + g_miss, HL + h_miss) + _leaf_score(GR, HR), -np.inf)
    default_left = gain_l >= gain_r
    best = np.where(default_left, gain_l, gain_r)
    if not np.isfinite(best).any():
        return None
    # column-major scan: lowest column first, then lowest position
    flat = int(np.argmax(best.T))
    col, pos = divmod(flat, k - 1)
    gain = 0.5 * (best[pos, col] - _leaf_score(G, H))
    lo, hi = xs[pos, col], xs[pos + 1, col]
    thr = lo + 0.5 * (hi - lo)
    if not lo < thr <= hi:
        thr = hi
    return float(gain), col, float(thr), bool(default_left[pos, col])


def _grow_tree_reference(X, g, h, rows, cols, params: GbdtParams, importance: np.ndarray) -> Tree:
    """Vectorised per-node grower; slow but independent of the compiled kernel."""
    feature, threshold, left, right, dleft, value = [], [], [], [], [], []

    def new_node():
        for lst, v in ((feature, -1), (threshold, np.nan), (left, -1), (right, -1), (dleft, True), (value, 0.0)):
            lst.append(v)
        return len(feature) - 1

    root = new_node()
    frontier = [(root, rows)]
    for depth in range(params.max_depth + 1):
        next_frontier = []
        for node, idx in frontier:
            gn, hn = g[idx], h[idx]
            split = None
            if depth < params.max_depth:
                split = _best_split(X[np.ix_(idx, cols)], gn, hn, params.min_child_weight)
            if split is not None and split[0] - params.gamma > 0:
                gain, c, thr, dl = split
                f = cols[c]
                x = X[idx, f]
                go_left = np.where(np.isnan(x), dl, x < thr)
                feature[node], threshold[node], dleft[node] = f, thr, dl
                importance[f] += gain - params.gamma
                lnode, rnode = new_node(), new_node()
                left[node], right[node] = lnode, rnode
                next_frontier += [(lnode, idx[go_left]), (rnode, idx[~go_left])]
            else:
                value[node] = -params.learning_rate * _seqsum(gn) / (_seqsum(hn) + REG_LAMBDA)
        frontier = next_frontier
        if not frontier:
            break
    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=float),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(dleft, dtype=bool),
        np.array(value, dtype=float),
    )


@numba.njit(cache=True)
def _grow_kernel(X, sorted_idx, n_valid, g, h, in_sample, cols, max_depth, min_child_weight, gamma, eta, lam, importance):
    m = X.shape[0]
    max_nodes = min(2 ** (max_depth + 1) - 1, 2 * m + 1)
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.full(max_nodes, np.nan)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    dleft = np.ones(max_nodes, dtype=np.bool_)
    value = np.zeros(max_nodes)

    node_of = np.full(m, -1, dtype=np.int64)
    for r in range(m):
        if in_sample[r]:
            node_of[r] = 0
    n_nodes = 1
    ls, le = 0, 1
    for depth in range(max_depth + 1):
        L = le - ls
        if L == 0:
            break
        G = np.zeros(L)
        H = np.zeros(L)
        for r in range(m):
            nd = node_of[r]
            if nd >= ls:
                G[nd - ls] += g[r]
                H[nd - ls] += h[r]
        parent_score = G * G / (H + lam)

        best = np.full(L, -np.inf)
        best_f = np.full(L, -1, dtype=np.int64)
        best_thr = np.zeros(L)
        best_dl = np.ones(L, dtype=np.bool_)
        if depth < max_depth:
            gl = np.zeros(L)
            hl = np.zeros(L)
            go = np.zeros(L)
            ho = np.zeros(L)
            mg = np.zeros(L)
            mh = np.zeros(L)
            cnt = np.zeros(L, dtype=np.int64)
            last = np.zeros(L)
            for f in cols:
                nv = n_valid[f]
                mg[:] = 0.0
                mh[:] = 0.0
                for j in range(nv, m):
                    r = sorted_idx[f, j]
                    nd = node_of[r]
                    if nd >= ls:
                        mg[nd - ls] += g[r]
                        mh[nd - ls] += h[r]
                for s in range(L):
                    go[s] = G[s] - mg[s]
                    ho[s] = H[s] - mh[s]
                gl[:] = 0.0
                hl[:] = 0.0
                cnt[:] = 0
                for j in range(nv):
                    r = sorted_idx[f, j]
                    nd = node_of[r]
                    if nd < ls:
                        continue
                    s = nd - ls
                    x = X[r, f]
                    if cnt[s] > 0 and x > last[s]:
                        GL = gl[s]
                        HL = hl[s]
                        GR = go[s] - GL
                        HR = ho[s] - HL
                        gm = mg[s]
                        hm = mh[s]
                        gain_r = -np.inf
                        if HL >= min_child_weight and HR + hm >= min_child_weight:
                            a = GR + gm
                            gain_r = GL * GL / (HL + lam) + a * a / (HR + hm + lam)
                        gain_l = -np.inf
                        if HL + hm >= min_child_weight and HR >= min_child_weight:
                            a = GL + gm
                            gain_l = a * a / (HL + hm + lam) + GR * GR / (HR + lam)
                        if gain_l >= gain_r:
                            cand = gain_l
                            cand_dl = True
                        else:
                            cand = gain_r
                            cand_dl = False
                        if cand > best[s]:
                            best[s] = cand
                            best_f[s] = f
                            thr = last[s] + 0.5 * (x - last[s])
                            if not (last[s] < thr and thr <= x):
                                thr = x
                            best_thr[s] = thr
                            best_dl[s] = cand_dl
                    gl[s] += g[r]
                    hl[s] += h[r]
                    cnt[s] += 1
                    last[s] = x

        new_ls = n_nodes
        for s in range(L):
            nd = ls + s
            gain = 0.5 * (best[s] - parent_score[s]) if best_f[s] >= 0 else -np.inf
            if best_f[s] >= 0 and gain - gamma > 0:
                feature[nd] = best_f[s]
                threshold[nd] = best_thr[s]
                dleft[nd] = best_dl[s]
                importance[best_f[s]] += gain - gamma
                left[nd] = n_nodes
                right[nd] = n_nodes + 1
                n_nodes += 2
            else:
                value[nd] = -eta * G[s] / (H[s] + lam)
        for r in range(m):
            nd = node_of[r]
            if nd < ls:
                continue
            f = feature[nd]
            if f < 0:
                node_of[r] = -1
                continue
            x = X[r, f]
            if np.isnan(x):
                go_left = dleft[nd]
            else:
                go_left = x < threshold[nd]
            node_of[r] = left[nd] if go_left else right[nd]
        ls, le = new_ls, n_nodes
    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], dleft[:n_nodes], value[:n_nodes]


def _grow_tree(X, sorted_idx, n_valid, g, h, rows, cols, params: GbdtParams, importance) -> Tree:
    in_sample = np.zeros(X.shape[0], dtype=np.bool_)
    in_sample[rows] = True
    arrays = _grow_kernel(
        X, sorted_idx, n_valid, g, h, in_sample, np.asarray(cols, dtype=np.int64),
        params.max_depth, float(params.min_child_weight), float(params.gamma),
        float(params.learning_rate), REG_LAMBDA, importance,
    )
    return Tree(*(a.copy() for a in arrays))


@dataclass
class GbdtModel:
    params: GbdtParams
    base_score: float
    trees: list = field(default_factory=list)
    num_features: int = 0
    gain_importance: np.ndarray | None = None
    train_loss: list = field(default_factory=list)

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.num_features:
            raise ValidationError(f"model expects {self.num_features} features, got {X.shape[1]}")
        margin = np.full(X.shape[0], self.base_score)
        for t in self.trees:
            margin += t.predict(X)
        return margin

    def predict_proba(self, X) -> np.ndarray:
        """P(y = 1) per row."""
        return expit(self.decision_function(X))

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "base_score": self.base_score,
            "num_features": self.num_features,
            "trees": [t.to_dict() for t in self.trees],
        }


def fit_gbdt(
    X, y, params: GbdtParams, seed: int | None = 0, sample_weight=None, engine: str = "compiled"
) -> GbdtModel:
    """Boost ``params.n_estimators`` trees; ``engine="reference"`` uses the slow numpy grower."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    m, F = X.shape
    if y.shape != (m,):
        raise ValidationError("label vector does not match the feature rows")
    if np.unique(y).size < 2:
        raise ValidationError("training set must contain both classes")
    w = np.ones(m) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    rng = np.random.default_rng(seed)

    prior = float(np.sum(w * y) / np.sum(w))
    base = float(np.log(prior / (1.0 - prior)))
    model = GbdtModel(params, base, [], F, np.zeros(F))
    margin = np.full(m, base)
    model.train_loss.append(logistic_loss(y, margin, w))

    if engine == "compiled":
        sorted_idx = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T)
        n_valid = np.sum(~np.isnan(X), axis=0).astype(np.int64)
    elif engine != "reference":
        raise ValidationError(f"unknown engine {engine!r}")

    n_rows = max(1, int(round(params.subsample * m)))
    n_cols = max(1, int(round(params.colsample_bytree * F)))
    for _ in range(params.n_estimators):
        p = expit(margin)
        g = w * (p - y)
        h = w * p * (1.0 - p)
        rows = np.sort(rng.choice(m, n_rows, replace=False)) if n_rows < m else np.arange(m)
        cols = np.sort(rng.choice(F, n_cols, replace=False)) if n_cols < F else np.arange(F)
        if engine == "compiled":
            tree = _grow_tree(X, sorted_idx, n_valid, g, h, rows, cols, params, model.gain_importance)
        else:
            tree = _grow_tree_reference(X, g, h, rows, cols, params, model.gain_importance)
        model.trees.append(tree)
        margin = margin + tree.predict(X)
        model.train_loss.append(logistic_loss(y, margin, w))
    return model


def gbdt_fit(train, params: GbdtParams, seed: int | None = 0, weighted: bool = False) -> GbdtModel:
    """Fit on a :class:`Dataset`; CDR weights enter the loss only if ``weighted``."""
    return fit_gbdt(train.features, train.labels, params, seed, train.weights if weighted else None)


def gbdt_predict_proba(model: GbdtModel, features) -> np.ndarray:
    return model.predict_proba(features)


class GbdtClassifier:
    """Estimator wrapper with the fit / predict_proba protocol used by the search code."""

    def __init__(self, params: GbdtParams | None = None, seed: int | None = 0):
        self.params = params or GbdtParams()
        self.seed = seed
        self.model_: GbdtModel | None = None

    def fit(self, X, y, sample_weight=None):
        self.model_ = fit_gbdt(X, y, self.params, self.seed, sample_weight)
        return self

    def predict_proba(self, X) -> np.ndarray:
        return self.model_.predict_proba(X)
