"""Experiment configuration: a YAML file with explicit seeds for every random stage."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from ..errors import ValidationError


def _build(cls, data, where: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ValidationError(f"{where}: expected a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"{where}: unknown keys {sorted(unknown)}")
    kw = dict(data)
    for f in fields(cls):
        v = kw.get(f.name)
        if v is None or isinstance(v, bool):
            continue
        # YAML 1.1 reads "1e-10" as a string
        try:
            if f.type in ("float", "float | None"):
                kw[f.name] = float(v)
            elif f.type in ("int", "int | None"):
                kw[f.name] = int(v)
        except (TypeError, ValueError):
            raise ValidationError(f"{where}.{f.name}: expected {f.type}, got {v!r}") from None
    return cls(**kw)


@dataclass
class SyntheticSource:
    m: int = 2000
    num_features: int = 20
    positive_fraction: float = 0.2
    missing_fraction: float = 0.0
    seed: int = 0


@dataclass
class CsvSource:
    path: str = ""
    label_column: str = "target"
    id_column: str | None = "customer_ID"
    date_column: str | None = "S_2"
    drop_columns: list = field(default_factory=lambda: ["customer_ID", "S_2"])


@dataclass
class DataConfig:
    source: str = "synthetic"
    synthetic: SyntheticSource = field(default_factory=SyntheticSource)
    csv: CsvSource = field(default_factory=CsvSource)

    def __post_init__(self):
        if isinstance(self.synthetic, dict) or self.synthetic is None:
            self.synthetic = _build(SyntheticSource, self.synthetic, "data.synthetic")
        if isinstance(self.csv, dict) or self.csv is None:
            self.csv = _build(CsvSource, self.csv, "data.csv")
        if self.source not in ("synthetic", "csv"):
            raise ValidationError("data.source must be 'synthetic' or 'csv'")
        if self.source == "csv" and not self.csv.path:
            raise ValidationError("data.csv.path is required for a csv source")


@dataclass
class SubsampleConfig:
    policy: str | None = None  # None keeps every row
    count: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.policy not in (None, "balanced", "stratified"):
            raise ValidationError("subsample.policy must be balanced, stratified or null")


@dataclass
class SplitConfig:
    train_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValidationError("split.train_fraction must lie in (0, 1)")


@dataclass
class FeatureSelectionConfig:
    """Keep the ``top_k`` columns by GBDT gain importance on the training partition."""

    top_k: int | None = None
    seed: int = 0
    params: dict = field(default_factory=lambda: {"learning_rate": 0.1, "n_estimators": 100, "max_depth": 3})


@dataclass
class SearchConfig:
    mode: str = "grid"  # grid | random
    n_iter: int = 10
    space: dict = field(default_factory=lambda: {"learning_rate": [0.1, 0.3]})
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("grid", "random"):
            raise ValidationError("search.mode must be grid or random")
        if not self.space:
            raise ValidationError("search.space must not be empty")


@dataclass
class ClassicalConfig:
    seeds: list = field(default_factory=lambda: [0])
    search: SearchConfig = field(default_factory=SearchConfig)

    def __post_init__(self):
        if isinstance(self.search, dict) or self.search is None:
            self.search = _build(SearchConfig, self.search, "classical.search")
        if not self.seeds:
            raise ValidationError("classical.seeds must list at least one seed")


@dataclass
class NoiseConfig:
    p10: list = field(default_factory=list)
    p01: list = field(default_factory=list)
    shots_per_circuit: int = 4096
    calibration_shots: int = 4096
    twirl_seed: int = 0


@dataclass
class QuantumConfig:
    """Scaler -> shuffle -> PQF -> GBDT. Per model seed ``s`` the Haar layer
    uses ``haar_seed + s`` and the feature shuffle uses ``shuffle_seed + s``."""

    seeds: list = field(default_factory=lambda: [0])
    num_qubits: int = 10
    repetitions: int = 1
    haar_seed: int = 0
    shuffle: bool = True
    shuffle_seed: int = 0
    scaler_range: list = field(default_factory=lambda: [0.3, 0.8])
    alphas: list = field(default_factory=lambda: [1.0])
    backend: str = "exact"
    chi_max: int = 64
    trunc_tol: float = 1e-10
    noise: NoiseConfig | None = None
    search: SearchConfig = field(default_factory=SearchConfig)

    def __post_init__(self):
        if isinstance(self.search, dict) or self.search is None:
            self.search = _build(SearchConfig, self.search, "quantum.search")
        if isinstance(self.noise, dict):
            self.noise = _build(NoiseConfig, self.noise, "quantum.noise")
        if self.backend not in ("exact", "mps", "shots"):
            raise ValidationError("quantum.backend must be exact, mps or shots")
        if not self.seeds or not self.alphas:
            raise ValidationError("quantum.seeds and quantum.alphas must be non-empty")
        if len(self.scaler_range) != 2:
            raise ValidationError("quantum.scaler_range must be [lo, hi]")


@dataclass
class EnsembleConfig:
    meta_C: list = field(default_factory=lambda: [0.2, 0.04])
    diversity_k: int = 100
    diversity_top: int = 20


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    data: DataConfig = field(default_factory=DataConfig)
    subsample: SubsampleConfig = field(default_factory=SubsampleConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    feature_selection: FeatureSelectionConfig = field(default_factory=FeatureSelectionConfig)
    cv_folds: int = 5
    cv_seed: int = 0
    search_metric: str = "cdr"
    weighted_training: bool = False
    classical: ClassicalConfig = field(default_factory=ClassicalConfig)
    quantum: QuantumConfig | None = field(default_factory=QuantumConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    dummy_tie_seed: int = 0
    export_pqf: bool = False
    workers: int = 1

    def __post_init__(self):
        sections = {
            "data": DataConfig,
            "subsample": SubsampleConfig,
            "split": SplitConfig,
            "feature_selection": FeatureSelectionConfig,
            "classical": ClassicalConfig,
            "ensemble": EnsembleConfig,
        }
        for name, cls in sections.items():
            val = getattr(self, name)
            if isinstance(val, dict) or val is None:
                setattr(self, name, _build(cls, val, name))
        if isinstance(self.quantum, dict):
            self.quantum = _build(QuantumConfig, self.quantum, "quantum")
        if self.search_metric not in ("cdr", "auc", "accuracy"):
            raise ValidationError("search_metric must be cdr, auc or accuracy")
        if self.cv_folds < 2:
            raise ValidationError("cv_folds must be >= 2")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return _build(cls, d, "config")

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with Path(path).open(encoding="utf-8") as fh:
            return cls.from_dict(yaml.safe_load(fh) or {})

    def to_dict(self) -> dict:
        return asdict(self)

    def dump(self, path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=False)

    def config_hash(self) -> str:
        """sha256 of the canonical JSON of the fully defaulted config."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()
