import json

import numpy as np
import pytest

from pqfcredit.cli import main
from pqfcredit.errors import ValidationError
from pqfcredit.experiment.config import ExperimentConfig
from pqfcredit.experiment.data import generate_synthetic, load_csv, save_csv, subsample, train_test_split
from pqfcredit.learners.dataset import Dataset
from pqfcredit.evaluation.metrics import auc
from pqfcredit.learners.gbdt import GbdtParams, fit_gbdt


def test_synthetic_shape_and_positives():
    ds = generate_synthetic(1000, 12, 0.2, 0.0, seed=1)
    assert ds.features.shape == (1000, 12)
    assert ds.labels.sum() == 200
    assert not np.isnan(ds.features).any()
    assert ds.feature_names[:3] == ["D_00", "R_01", "S_02"]
    np.testing.assert_array_equal(ds.weights, np.where(ds.labels == 1, 1.0, 20.0))


def test_synthetic_missing_and_determinism():
    a = generate_synthetic(2000, 10, 0.2, 0.1, seed=3)
    frac = np.isnan(a.features).mean()
    assert abs(frac - 0.1) < 0.01
    b = generate_synthetic(2000, 10, 0.2, 0.1, seed=3)
    np.testing.assert_array_equal(a.features, b.features)
    assert not np.array_equal(np.nan_to_num(generate_synthetic(2000, 10, 0.2, 0.1, seed=4).features), np.nan_to_num(a.features))


def test_synthetic_difficulty_calibration():
    ds = generate_synthetic(2000, 20, 0.2, 0.0, seed=0)
    tr, te = train_test_split(ds, seed=0)
    model = fit_gbdt(tr.features, tr.labels, GbdtParams(n_estimators=100, max_depth=3, learning_rate=0.1))
    assert auc(te.labels, model.predict_proba(te.features)) >= 0.85


def test_subsample_policies():
    ds = generate_synthetic(12000, 5, 0.2, seed=5)
    bal = subsample(ds, "balanced", 1000, seed=1)
    assert bal.class_counts() == (500, 500)
    strat = subsample(ds, "stratified", 10000, seed=1)
    assert strat.class_counts() == (8000, 2000)
    again = subsample(ds, "balanced", 1000, seed=1)
    np.testing.assert_array_equal(again.features, bal.features)
    with pytest.raises(ValidationError):
        subsample(ds, "balanced", 6000, seed=1)
    with pytest.raises(ValidationError):
        subsample(ds, "random", 10, seed=1)


def test_split_is_stratified_and_disjoint():
    ds = generate_synthetic(1000, 4, 0.2, seed=6)
    tr, te = train_test_split(ds, seed=2)
    assert len(tr) == len(te) == 500
    assert tr.class_counts() == te.class_counts() == (400, 100)
    rows = {tuple(r) for r in tr.features}
    assert not rows & {tuple(r) for r in te.features}


def test_csv_round_trip_bit_exact(tmp_path):
    ds = generate_synthetic(300, 6, 0.2, 0.1, seed=7)
    path = tmp_path / "d.csv"
    save_csv(ds, path)
    back = load_csv(path)
    np.testing.assert_array_equal(back.features, ds.features)
    np.testing.assert_array_equal(back.labels, ds.labels)
    assert back.feature_names == ds.feature_names


def test_csv_loader_rules(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text(
        "customer_ID,S_2,D_1,B_2,target\n"
        "a,2017-01-01,1.0,5,0\n"
        "a,2017-03-01,2.0,5,1\n"
        "b,2017-02-01,,5,0\n"
        "c,2017-02-01,4.0,5,0\n",
        encoding="utf-8",
    )
    ds = load_csv(p)
    # latest record per customer, constant B_2 dropped, empty cell missing
    assert ds.feature_names == ["D_1"] and ds.dropped_columns == ["B_2"]
    np.testing.assert_array_equal(ds.labels, [1, 0, 0])
    assert ds.features[0, 0] == 2.0 and np.isnan(ds.features[1, 0])


@pytest.mark.parametrize("text", [
    "D_1,target\n",
    "D_1,target\n1.0,2\n",
    "D_1,target\nabc,1\n",
    "D_1\n1.0\n",
    "D_1,target\n1.0\n",
])
def test_csv_errors(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text, encoding="utf-8")
    with pytest.raises(ValidationError):
        load_csv(p)


def test_dataset_validation():
    with pytest.raises(ValidationError):
        Dataset(np.zeros((3, 2)), [0, 1])
    with pytest.raises(ValidationError):
        Dataset(np.zeros((2, 2)), [0, 1], weights=[1.0, 0.0])


SMALL = {
    "name": "tiny",
    "data": {"source": "synthetic", "synthetic": {"m": 300, "num_features": 6, "seed": 1}},
    "split": {"seed": 2},
    "cv_folds": 3,
    "cv_seed": 3,
    "classical": {"seeds": [0], "search": {"mode": "grid", "space": {"learning_rate": [0.3]}, "fixed": {"n_estimators": 10}}},
    "quantum": {
        "seeds": [0], "num_qubits": 7, "haar_seed": 4, "shuffle_seed": 5, "alphas": [1.0],
        "search": {"mode": "grid", "space": {"learning_rate": [0.3]}, "fixed": {"n_estimators": 10}},
    },
    "ensemble": {"diversity_k": 20},
}


def _walk(d, prefix=()):
    for k, v in d.items():
        if isinstance(v, dict):
            yield from _walk(v, prefix + (k,))
        else:
            yield prefix + (k,), v


def test_config_round_trip_and_hash(tmp_path):
    cfg = ExperimentConfig.from_dict(SMALL)
    path = tmp_path / "c.yaml"
    cfg.dump(path)
    again = ExperimentConfig.load(path)
    assert again.to_dict() == cfg.to_dict()
    assert again.config_hash() == cfg.config_hash()


def test_config_hash_sensitive_to_every_field():
    full = ExperimentConfig.from_dict(SMALL).to_dict()
    base = ExperimentConfig.from_dict(full).config_hash()
    seen = set()
    for path, value in _walk(full):
        if value is None or isinstance(value, (list, str)):
            continue
        d = json.loads(json.dumps(full))
        node = d
        for k in path[:-1]:
            node = node[k]
        if isinstance(value, bool):
            node[path[-1]] = not value
        elif isinstance(value, int):
            node[path[-1]] = value + 1
        else:
            node[path[-1]] = value * 0.5 if value else 0.125
        try:
            h = ExperimentConfig.from_dict(d).config_hash()
        except ValidationError:
            continue
        assert h != base, path
        seen.add(path)
    assert len(seen) > 20


def test_config_rejects_unknown_and_invalid():
    bad = json.loads(json.dumps(SMALL))
    bad["classical"]["seedz"] = [1]
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict(bad)
    bad = json.loads(json.dumps(SMALL))
    bad["search_metric"] = "logloss"
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict(bad)


def test_cli_synth_and_run_and_report(tmp_path, capsys):
    csv_path = tmp_path / "s.csv"
    assert main(["synth", "--m", "200", "--features", "5", "--seed", "3", "-o", str(csv_path)]) == 0
    assert load_csv(csv_path).features.shape == (200, 5)

    cfg_path = tmp_path / "tiny.yaml"
    ExperimentConfig.from_dict(SMALL).dump(cfg_path)
    run_dir = tmp_path / "run"
    assert main(["run", str(cfg_path), "-o", str(run_dir)]) == 0
    assert (run_dir / "report.json").exists() and (run_dir / "tables.txt").exists()
    capsys.readouterr()
    assert main(["report", str(run_dir)]) == 0
    out = capsys.readouterr().out
    assert "Dummy Classifier" in out and "±" in out

    pqf_dir = tmp_path / "pqf"
    assert main(["project", str(cfg_path), "-o", str(pqf_dir)]) == 0
    header = (pqf_dir / "pqf_train.csv").read_text().splitlines()[0].split(",")
    assert len(header) == 3 * 7 + 2 and header[:3] == ["X_0", "Y_0", "Z_0"]


def test_cli_error_exit_codes(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.yaml")]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: x\nunknown_field: 1\n", encoding="utf-8")
    assert main(["run", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err
