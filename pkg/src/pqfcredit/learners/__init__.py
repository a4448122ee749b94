from .dataset import Dataset, cdr_weights
from .gbdt import GbdtClassifier, GbdtModel, GbdtParams, fit_gbdt, gbdt_fit, gbdt_predict_proba
from .logistic import (
    DummyClassifier,
    LogisticClassifier,
    LogisticModel,
    dummy_fit,
    dummy_predict,
    fit_logistic,
    logistic_objective,
    logreg_fit,
)
from .model_selection import (
    OutOfFoldScores,
    SearchResult,
    cross_val_predict,
    derive_seed,
    grid,
    hyper_search,
    sample_space,
    stack_oof,
    stratified_kfold,
)
from .preprocessing import (
    FeaturePermutation,
    MinMaxScaler,
    ScalerParams,
    fit_minmax,
    impute,
    make_permutation,
    shuffle_features,
    transform,
)
