from .diversity import DiversityReport, diversity_report
from .ensemble import DEFAULT_META_C, meta_ensemble_fit, meta_ensemble_predict, means_ensemble
from .metrics import (
    SEARCH_METRICS,
    ScoredPredictions,
    auc,
    capture_rate_at_4pct,
    cdr,
    cdr_components,
    cdr_score,
    normalized_weighted_gini,
    rank_order,
    standard_metrics,
)
