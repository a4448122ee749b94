import json
from pathlib import Path

import numpy as np
import pytest

from pqfcredit.errors import StageError, ValidationError
from pqfcredit.experiment.config import ExperimentConfig
from pqfcredit.experiment.report import dumps_body, emit_report, fmt_pm, load_report, render_tables
from pqfcredit.experiment.runner import AuditedPartition, run_experiment, stage
from pqfcredit.learners.dataset import Dataset

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="module")
def smoke_report():
    return run_experiment(ExperimentConfig.load(CONFIGS / "smoke.yaml"))


def test_fmt_pm():
    assert fmt_pm(0.80131, 0.00187) == "0.8013 ± 0.0019"


def test_audited_partition_single_read():
    part = AuditedPartition(Dataset(np.zeros((3, 2)), [0, 1, 0]))
    part.features("model")
    with pytest.raises(ValidationError):
        part.features("model")
    part.features("other")
    assert part.access == {"model": 1, "other": 1}


def test_stage_wraps_errors():
    with pytest.raises(StageError) as info:
        with stage("split"):
            raise ValueError("boom")
    assert info.value.stage == "split" and isinstance(info.value.cause, ValueError)


def test_smoke_report_contents(smoke_report, tmp_path):
    body = smoke_report.body
    assert body["test_access_ok"]
    assert all(v == 1 for v in body["test_access"].values())
    n_train, n_test = body["data"]["n_train"], body["data"]["n_test"]
    n_alpha = len(body["config"]["quantum"]["alphas"])
    for q in body["quantum"]:
        assert q["circuit_executions"] == n_alpha * n_train + n_test
    assert body["ensembles"]["means_within_bracket"]
    assert body["ensembles"]["leakage_guard_refuses_in_sample"]
    assert len(body["ensembles"]["pairs"]) == 4
    assert body["config_hash"] == ExperimentConfig.load(CONFIGS / "smoke.yaml").config_hash()

    paths = emit_report(smoke_report, tmp_path)
    loaded = load_report(tmp_path)
    assert dumps_body(loaded["body"]) == dumps_body(json.loads(dumps_body(body)))
    header = Path(paths["pqf_train"]).read_text().splitlines()[0].split(",")
    n = body["config"]["quantum"]["num_qubits"]
    assert len(header) == 3 * n + 2 and header[-2:] == ["target", "weight"]
    text = render_tables(loaded["body"])
    for row in ("Classical", "Quantum", "Means-model", "LogReg (C=0.2)", "LogReg (C=0.04)", "Dummy Classifier"):
        assert row in text


def _quantum_metrics(body):
    return [(q["best_params"], q["test"], q["cv"]) for q in body["quantum"]]


def test_backend_equivalence_end_to_end():
    cfg = ExperimentConfig.load(CONFIGS / "backend_equivalence.yaml")
    exact = run_experiment(cfg).body
    d = cfg.to_dict()
    d["quantum"]["backend"] = "mps"
    mps = run_experiment(ExperimentConfig.from_dict(d)).body
    for (pa, ta, ca), (pb, tb, cb) in zip(_quantum_metrics(exact), _quantum_metrics(mps)):
        assert pa == pb
        for k in ta:
            assert ta[k] == pytest.approx(tb[k], abs=1e-6)


def test_shots_backend_runs():
    body = run_experiment(ExperimentConfig.load(CONFIGS / "shots_trex.yaml")).body
    assert body["test_access_ok"]
    for q in body["quantum"]:
        assert 0.0 <= q["test"]["auc"] <= 1.0


def test_stage_provenance_on_failure():
    d = ExperimentConfig.load(CONFIGS / "smoke.yaml").to_dict()
    d["data"] = {"source": "csv", "csv": {"path": "/nonexistent/data.csv"}}
    with pytest.raises(StageError) as info:
        run_experiment(ExperimentConfig.from_dict(d))
    assert info.value.stage == "load" and isinstance(info.value.cause, FileNotFoundError)
