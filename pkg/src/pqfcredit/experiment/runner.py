"""
End-to-end experiment: data, split, searched classical and quantum pipelines,
ensembles over every (classical seed, quantum seed) pair, metrics and diversity.

Hygiene rules enforced here:
- scaler, shuffle, Haar layer, feature selection and every searched
  hyperparameter are derived from the training partition only;
- the test partition's features are read through :class:`AuditedPartition`,
  which refuses a second read under the same key, so every final model
  scores the test set exactly once.
"""

from __future__ import annotations

import logging
import platform
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
import scipy

from .. import __version__
from ..errors import LeakageError, StageError, ValidationError
from ..evaluation import (
    SEARCH_METRICS,
    cdr_components,
    diversity_report,
    means_ensemble,
    meta_ensemble_fit,
    meta_ensemble_predict,
    standard_metrics,
)
from ..featuremap import FeatureMapSpec
from ..learners import (
    Dataset,
    DummyClassifier,
    GbdtClassifier,
    GbdtParams,
    OutOfFoldScores,
    cross_val_predict,
    fit_gbdt,
    fit_minmax,
    grid,
    hyper_search,
    make_permutation,
    sample_space,
    stack_oof,
    stratified_kfold,
    transform,
)
from ..learners.model_selection import SearchResult
from ..noise import ReadoutNoiseModel, TrexConfig
from ..pqf import ProjectedQuantumFeatures, pqf_columns
from .config import ExperimentConfig, SearchConfig
from .data import generate_synthetic, load_csv, subsample, train_test_split

log = logging.getLogger(__name__)

CAPTURE_NOTE = "capture rate counts defaulters unweighted; weights only set the 4% budget"
SELECTION_NOTE = "feature selection ranks columns by GBDT gain importance (substitute for random-forest importance)"
SCALER_NOTE = "quantum scaler and shuffle are fit on the whole training partition; CV searches the GBDT stage"


@contextmanager
def stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


class AuditedPartition:
    """Test rows. Labels are free to read; features are handed out once per key."""

    def __init__(self, ds: Dataset):
        self._ds = ds
        self.access: dict[str, int] = {}

    def __len__(self) -> int:
        return len(self._ds)

    @property
    def labels(self) -> np.ndarray:
        return self._ds.labels

    @property
    def feature_names(self) -> list:
        return self._ds.feature_names

    def features(self, key: str) -> np.ndarray:
        if self.access.get(key, 0):
            raise ValidationError(f"test features already read for {key!r}")
        self.access[key] = 1
        return self._ds.features


def gbdt_factory(params: dict, seed: int) -> GbdtClassifier:
    return GbdtClassifier(GbdtParams.from_dict(params), seed)


def dummy_factory(params: dict, seed: int) -> DummyClassifier:
    return DummyClassifier()


class QuantumPipeline:
    """Min-max scaling (median imputation) -> column shuffle -> PQF -> GBDT."""

    def __init__(
        self,
        spec: FeatureMapSpec,
        backend: str = "exact",
        scaler_range=(0.3, 0.8),
        shuffle_seed: int | None = 0,
        chi_max: int = 64,
        trunc_tol: float = 1e-10,
        noise_model: ReadoutNoiseModel | None = None,
        trex_config: TrexConfig | None = None,
        gbdt_params: GbdtParams | None = None,
        seed: int = 0,
    ):
        self.spec = spec
        self.backend = backend
        self.scaler_range = tuple(scaler_range)
        self.shuffle_seed = shuffle_seed
        self.chi_max = chi_max
        self.trunc_tol = trunc_tol
        self.noise_model = noise_model
        self.trex_config = trex_config
        self.gbdt_params = gbdt_params or GbdtParams()
        self.seed = seed
        self.scaler_ = None
        self.permutation_ = None
        self.model_ = None
        self.executions = 0

    def with_alpha(self, alpha: float) -> "QuantumPipeline":
        """Copy sharing the fitted scaler and permutation."""
        other = QuantumPipeline(
            self.spec.with_alpha(alpha), self.backend, self.scaler_range, self.shuffle_seed,
            self.chi_max, self.trunc_tol, self.noise_model, self.trex_config, self.gbdt_params, self.seed,
        )
        other.scaler_, other.permutation_ = self.scaler_, self.permutation_
        return other

    def fit_preprocessing(self, X) -> "QuantumPipeline":
        self.scaler_ = fit_minmax(X, self.scaler_range)
        if self.shuffle_seed is not None:
            self.permutation_ = make_permutation(np.shape(X)[1], self.shuffle_seed)
        return self

    def prepared(self, X) -> np.ndarray:
        """Scaled and shuffled rows, ready for the feature map."""
        Z = transform(self.scaler_, X)
        return self.permutation_.apply(Z) if self.permutation_ is not None else Z

    def features(self, X, row_offset: int = 0) -> np.ndarray:
        pqf = ProjectedQuantumFeatures(
            self.spec, self.backend, self.chi_max, self.trunc_tol, self.noise_model, self.trex_config
        )
        out = pqf.transform(self.prepared(X), row_offset)
        if pqf.executions != out.shape[0]:
            raise RuntimeError("PQF must run exactly one circuit per row")
        self.executions += pqf.executions
        return out

    def fit_model(self, P, y, sample_weight=None) -> "QuantumPipeline":
        self.model_ = fit_gbdt(P, y, self.gbdt_params, self.seed, sample_weight)
        return self

    def fit(self, X, y, sample_weight=None) -> "QuantumPipeline":
        self.fit_preprocessing(X)
        return self.fit_model(self.features(X), y, sample_weight)

    def predict_proba(self, X, row_offset: int = 0) -> np.ndarray:
        return self.model_.predict_proba(self.features(X, row_offset))


@dataclass
class ModelRun:
    kind: str
    seed: int
    best_params: dict
    search: list
    cv_folds: list
    oof: OutOfFoldScores
    train_scores: np.ndarray
    test_scores: np.ndarray
    extra: dict = field(default_factory=dict)


@dataclass
class RunReport:
    body: dict
    provenance: dict
    artifacts: dict = field(default_factory=dict)


def _candidates(search: SearchConfig, seed: int) -> list[dict]:
    cands = grid(search.space) if search.mode == "grid" else sample_space(search.space, search.n_iter, seed)
    return [{**search.fixed, **c} for c in cands]


def _fold_metrics(oof: OutOfFoldScores, y: np.ndarray, tie_seed=None) -> list[dict]:
    out = []
    for _, va in oof.folds:
        s = oof.values[va]
        row = cdr_components(s, y[va], tie_seed=tie_seed)
        row.update({k: v for k, v in standard_metrics(s, y[va]).items() if k in ("accuracy", "auc")})
        out.append(row)
    return out


def _score_summary(scores, labels, tie_seed=None) -> dict:
    out = cdr_components(scores, labels, tie_seed=tie_seed)
    out.update(standard_metrics(scores, labels))
    return out


def _mean_std(values) -> dict:
    v = np.asarray(values, dtype=float)
    return {"mean": float(v.mean()), "std": float(v.std()), "n": int(v.size)}


def _load(cfg: ExperimentConfig) -> Dataset:
    d = cfg.data
    if d.source == "synthetic":
        s = d.synthetic
        return generate_synthetic(s.m, s.num_features, s.positive_fraction, s.missing_fraction, s.seed)
    c = d.csv
    return load_csv(c.path, c.label_column, c.drop_columns, c.id_column, c.date_column)


def prepare_data(cfg: ExperimentConfig) -> tuple[Dataset, Dataset, dict]:
    """Load, subsample, split and (optionally) select features on the training rows."""
    with stage("load"):
        ds = _load(cfg)
    with stage("subsample"):
        if cfg.subsample.policy is not None:
            ds = subsample(ds, cfg.subsample.policy, cfg.subsample.count, cfg.subsample.seed)
    with stage("split"):
        train, test = train_test_split(ds, cfg.split.seed, cfg.split.train_fraction)
    info = {"dropped_columns": list(ds.dropped_columns), "selected_features": None}
    fs = cfg.feature_selection
    if fs.top_k is not None and fs.top_k < train.num_features:
        with stage("feature_selection"):
            model = fit_gbdt(train.features, train.labels, GbdtParams.from_dict(fs.params), fs.seed)
            order = np.argsort(-model.gain_importance, kind="stable")
            keep = np.sort(order[: fs.top_k])
            train, test = train.select_columns(keep), test.select_columns(keep)
            info["selected_features"] = list(train.feature_names)
    return train, test, info


def _run_searched(kind, seed, factory, cands, X, y, w, folds, cfg, test_X_fn):
    metric = SEARCH_METRICS[cfg.search_metric]
    res = hyper_search(factory, cands, X, y, seed=seed, metric=metric, sample_weight=w, folds=folds, workers=cfg.workers)
    oof = cross_val_predict(factory, res.best_params, X, y, folds, seed, w)
    final = factory(res.best_params, seed).fit(X, y, w)
    return ModelRun(
        kind, seed, res.best_params, res.summary(), _fold_metrics(oof, y), oof,
        final.predict_proba(X), final.predict_proba(test_X_fn()),
    )


def _run_quantum(seed, cfg, train, test, folds, w):
    qc = cfg.quantum
    F = train.num_features
    spec = FeatureMapSpec(qc.num_qubits, float(qc.alphas[0]), qc.repetitions, qc.haar_seed + seed, F)
    noise_model = trex = None
    if qc.backend == "shots":
        nz = qc.noise
        if nz is None or not nz.p10:
            noise_model = ReadoutNoiseModel.noiseless(qc.num_qubits)
            trex = TrexConfig() if nz is None else TrexConfig(nz.shots_per_circuit, nz.calibration_shots, nz.twirl_seed)
        else:
            noise_model = ReadoutNoiseModel(tuple(nz.p10), tuple(nz.p01))
            trex = TrexConfig(nz.shots_per_circuit, nz.calibration_shots, nz.twirl_seed)
    base = QuantumPipeline(
        spec, qc.backend, qc.scaler_range, (qc.shuffle_seed + seed) if qc.shuffle else None,
        qc.chi_max, qc.trunc_tol, noise_model, trex, seed=seed,
    ).fit_preprocessing(train.features)

    metric = SEARCH_METRICS[cfg.search_metric]
    gbdt_cands = _candidates(qc.search, seed)
    y = train.labels
    best = None
    all_cands, all_scores, pipes = [], [], []
    for alpha in qc.alphas:
        pipe = base.with_alpha(float(alpha))
        pipes.append(pipe)
        P = pipe.features(train.features)
        res = hyper_search(gbdt_factory, gbdt_cands, P, y, seed=seed, metric=metric, sample_weight=w, folds=folds, workers=cfg.workers)
        all_cands += [{"alpha": float(alpha), **c} for c in res.candidates]
        all_scores += res.fold_scores
        if best is None or res.mean > best[0].mean:
            best = (res, pipe, P)
    res, pipe, P = best
    combined = SearchResult(0, {}, 0.0, 0.0, all_cands, all_scores)
    oof = cross_val_predict(gbdt_factory, res.best_params, P, y, folds, seed, w)
    pipe.gbdt_params = GbdtParams.from_dict(res.best_params)
    pipe.fit_model(P, y, w)
    test_P = pipe.features(test.features(f"quantum[{seed}]"), row_offset=len(train))
    run = ModelRun(
        "quantum", seed, {"alpha": pipe.spec.alpha, **res.best_params}, combined.summary(),
        _fold_metrics(oof, y), oof, pipe.model_.predict_proba(P), pipe.model_.predict_proba(test_P),
        extra={
            "feature_map": pipe.spec.to_dict(),
            "permutation": pipe.permutation_.permutation.tolist() if pipe.permutation_ is not None else None,
            "circuit_executions": sum(p.executions for p in pipes),
        },
    )
    return run, P, test_P


def _model_entry(run: ModelRun, train: Dataset, test: AuditedPartition, tie_seed=None) -> dict:
    return {
        "seed": run.seed,
        "best_params": run.best_params,
        "search": run.search,
        "cv": {
            "folds": run.cv_folds,
            **{k: _mean_std([f[k] for f in run.cv_folds]) for k in ("capture_rate", "gini", "cdr", "accuracy", "auc")},
        },
        "train": standard_metrics(run.train_scores, train.labels),
        "test": _score_summary(run.test_scores, test.labels, tie_seed),
        **run.extra,
    }


def _ensembles(classical, quantum, train, test, cfg) -> dict:
    y_tr, y_te = train.labels, test.labels
    pairs = []
    bracket_ok = True
    for c in classical:
        for q in quantum:
            m = means_ensemble(c.test_scores, q.test_scores)
            lo = np.minimum(c.test_scores, q.test_scores)
            hi = np.maximum(c.test_scores, q.test_scores)
            bracket_ok &= bool(np.all((m >= lo) & (m <= hi)))
            entry = {"classical_seed": c.seed, "quantum_seed": q.seed, "means": cdr_components(m, y_te)}
            oof = stack_oof(c.oof, q.oof)
            Z_te = np.column_stack([c.test_scores, q.test_scores])
            for C in cfg.ensemble.meta_C:
                meta = meta_ensemble_fit(oof, y_tr, float(C))
                entry[f"logreg_C={C}"] = {
                    **cdr_components(meta_ensemble_predict(meta, Z_te), y_te),
                    "coef": meta.coef.tolist(),
                    "intercept": meta.intercept,
                }
            pairs.append(entry)
    try:
        meta_ensemble_fit(np.column_stack([classical[0].train_scores, quantum[0].train_scores]), y_tr, 1.0)
        guard = False
    except LeakageError:
        guard = True

    rows = {
        "Classical": [r.test_scores for r in classical],
        "Quantum": [r.test_scores for r in quantum],
    }
    summary = {k: _mean_std([cdr_components(s, y_te)["cdr"] for s in v]) for k, v in rows.items()}
    summary["Means-model"] = _mean_std([p["means"]["cdr"] for p in pairs])
    for C in cfg.ensemble.meta_C:
        summary[f"LogReg (C={C})"] = _mean_std([p[f"logreg_C={C}"]["cdr"] for p in pairs])
    classical_mean = summary["Classical"]["mean"]
    beats = {k: v["mean"] > classical_mean for k, v in summary.items() if k not in ("Classical", "Quantum")}
    return {
        "pairs": pairs,
        "summary": summary,
        "means_within_bracket": bracket_ok,
        "leakage_guard_refuses_in_sample": guard,
        "beats_classical_mean_cdr": beats,
    }


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    t0 = time.perf_counter()
    started = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    train, test_ds, info = prepare_data(cfg)
    test = AuditedPartition(test_ds)
    y = train.labels
    w = train.weights if cfg.weighted_training else None
    with stage("folds"):
        folds = stratified_kfold(y, cfg.cv_folds, cfg.cv_seed)

    classical = []
    for s in cfg.classical.seeds:
        log.info("classical seed %s", s)
        with stage(f"classical[{s}]"):
            cands = _candidates(cfg.classical.search, s)
            classical.append(
                _run_searched("classical", s, gbdt_factory, cands, train.features, y, w, folds, cfg,
                              lambda s=s: test.features(f"classical[{s}]"))
            )

    with stage("dummy"):
        tie = cfg.dummy_tie_seed
        dummy = _run_searched("dummy", 0, dummy_factory, [{}], train.features, y, w, folds, cfg,
                              lambda: test.features("dummy"))
        dummy_entry = _model_entry(dummy, train, test, tie)
        dummy_entry["cv"]["folds"] = _fold_metrics(dummy.oof, y, tie)
        for k in ("capture_rate", "gini", "cdr"):
            dummy_entry["cv"][k] = _mean_std([f[k] for f in dummy_entry["cv"]["folds"]])

    quantum, artifacts = [], {}
    if cfg.quantum is not None:
        for s in cfg.quantum.seeds:
            log.info("quantum seed %s", s)
            with stage(f"quantum[{s}]"):
                run, P_tr, P_te = _run_quantum(s, cfg, train, test, folds, w)
                quantum.append(run)
                if cfg.export_pqf and "pqf_train" not in artifacts:
                    artifacts.update(
                        pqf_train=P_tr, pqf_test=P_te, pqf_columns=pqf_columns(cfg.quantum.num_qubits),
                        train_labels=train.labels, train_weights=train.weights,
                        test_labels=test.labels, test_weights=test_ds.weights,
                    )

    body = {
        "name": cfg.name,
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "data": {
            "n_train": len(train),
            "n_test": len(test),
            "train_class_counts": list(train.class_counts()),
            "test_class_counts": list(test_ds.class_counts()),
            "num_features": train.num_features,
            "feature_names": list(train.feature_names),
            **info,
        },
        "notes": [CAPTURE_NOTE, SCALER_NOTE] + ([SELECTION_NOTE] if info["selected_features"] else []),
        "classical": [_model_entry(r, train, test) for r in classical],
        "dummy": dummy_entry,
        "quantum": [_model_entry(r, train, test) for r in quantum],
    }
    if quantum:
        with stage("ensembles"):
            body["ensembles"] = _ensembles(classical, quantum, train, test, cfg)
        with stage("diversity"):
            raw = test.features("diversity")
            scaled = transform(fit_minmax(train.features, (0.0, 1.0)), raw)
            k = min(cfg.ensemble.diversity_k, len(test))
            rep = diversity_report(classical[0].test_scores, quantum[0].test_scores, scaled, k, test.feature_names)
            body["diversity"] = {
                "classical_seed": classical[0].seed,
                "quantum_seed": quantum[0].seed,
                **rep.to_dict(cfg.ensemble.diversity_top),
            }
    body["test_access"] = dict(sorted(test.access.items()))
    body["test_access_ok"] = all(v == 1 for v in test.access.values())

    provenance = {
        "config_hash": body["config_hash"],
        "versions": {
            "pqfcredit": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "started_utc": started,
        "wall_time_s": time.perf_counter() - t0,
    }
    return RunReport(to_jsonable(body), provenance, artifacts)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj
