"""Report files: machine-readable JSON, plain-text tables, optional PQF CSV exports."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

REPORT_JSON = "report.json"
TABLES_TXT = "tables.txt"


def fmt_pm(mean: float, std: float) -> str:
    return f"{mean:.4f} ± {std:.4f}"


def fmt_pct(x: float) -> str:
    return f"{100.0 * x:.2f}%"


def render_table(headers: list[str], rows: list[list[str]], title: str | None = None) -> str:
    cells = [list(map(str, headers))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[c]) for r in cells) for c in range(len(headers))]
    sep = "+" + "+".join("-" * (w + 2) for w in widths) + "+"

    def line(r):
        return "| " + " | ".join(v.ljust(w) for v, w in zip(r, widths)) + " |"

    out = [title] if title else []
    out += [sep, line(cells[0]), sep] + [line(r) for r in cells[1:]] + [sep]
    return "\n".join(out)


def _benchmark_rows(body: dict) -> list[list[str]]:
    rows = []

    def add(label, entry):
        cv, te = entry["cv"], entry["test"]
        rows.append([
            label,
            fmt_pm(cv["capture_rate"]["mean"], cv["capture_rate"]["std"]),
            fmt_pm(cv["gini"]["mean"], cv["gini"]["std"]),
            fmt_pm(cv["cdr"]["mean"], cv["cdr"]["std"]),
            f"{te['capture_rate']:.4f}",
            f"{te['gini']:.4f}",
            f"{te['cdr']:.4f}",
        ])

    for e in body["classical"]:
        add(f"Gradient Boosting (seed {e['seed']})", e)
    for e in body.get("quantum", []):
        add(f"Quantum PQF + GBDT (seed {e['seed']})", e)
    add("Dummy Classifier", body["dummy"])
    return rows


def render_tables(body: dict) -> str:
    parts = []
    parts.append(render_table(
        ["Model", "CV capture rate", "CV Gini", "CV CDR metric", "test capture rate", "test Gini", "test CDR metric"],
        _benchmark_rows(body),
        "Cross-validation and test performance (CDR metric, Gini, capture rate at 4%)",
    ))

    quantum = body.get("quantum", [])
    if quantum:
        cfg = body["config"]["quantum"]
        data = body["data"]
        n_samples = data["n_train"] + data["n_test"]
        backend = {"exact": "Statevector", "mps": "MPS", "shots": "Shots + TREX"}[cfg["backend"]]
        classical = body["classical"]
        rows = []
        for i, q in enumerate(quantum):
            c = classical[min(i, len(classical) - 1)]
            rows.append([
                f"{backend} (seed {q['seed']})",
                str(cfg["num_qubits"]),
                str(data["num_features"]),
                f"{n_samples:,}",
                f"{q['best_params']['alpha']:g}",
                f"{q['best_params'].get('learning_rate', float('nan')):g}",
                fmt_pct(q["train"]["accuracy"]),
                fmt_pct(q["test"]["accuracy"]),
                fmt_pct(c["test"]["accuracy"]),
            ])
        parts.append(render_table(
            ["Backend", "No. of qubits", "No. of features", "No. of samples", "alpha", "eta",
             "Train Acc.", "Test Acc.", "Classical Test Acc."],
            rows,
            "Quantum pipeline accuracy against the classical baseline",
        ))
        rows = [
            [str(cfg["num_qubits"]), f"{q['best_params']['alpha']:g}",
             f"{q['best_params'].get('learning_rate', float('nan')):g}"]
            + [f"{q['test'][k]:.4f}" for k in ("accuracy", "precision", "recall", "f1", "auc")]
            for q in quantum
        ]
        parts.append(render_table(
            ["Qubits", "alpha", "eta", "Acc.", "Prec.", "Rec.", "F1", "AUC"], rows, "Quantum model test metrics"
        ))

    ens = body.get("ensembles")
    if ens:
        label = {"exact": "Statevector", "mps": "MPS Simulator", "shots": "Shots + TREX"}[body["config"]["quantum"]["backend"]]
        rows = [[name, fmt_pm(v["mean"], v["std"])] for name, v in ens["summary"].items()]
        parts.append(render_table(["Models", f"CDR metric ({label})"], rows, "Test CDR metric, mean ± std over seeds / seed pairs"))
        parts.append(
            f"means-ensemble within base-score brackets: {ens['means_within_bracket']}\n"
            f"meta-ensemble refuses in-sample base scores: {ens['leakage_guard_refuses_in_sample']}\n"
            "ensemble mean CDR above classical: "
            + ", ".join(f"{k}={v}" for k, v in ens["beats_classical_mean_cdr"].items())
        )

    div = body.get("diversity")
    if div:
        rows = [[f["feature"], f"{f['classical']:.4f}", f"{f['quantum']:.4f}"] for f in div["features"]]
        parts.append(render_table(
            ["Feature", "Classical", "Quantum"],
            rows,
            f"Scaled feature averages over each model's top {div['k']} test rows, "
            f"by decreasing difference (score correlation {div['pearson_correlation']:.4f}, "
            f"top-k Jaccard {div['top_k_jaccard']:.4f})",
        ))

    parts.append("Test partition reads: " + ", ".join(f"{k}={v}" for k, v in body["test_access"].items()))
    parts.append("Notes:\n" + "\n".join(f"- {n}" for n in body["notes"]))
    return "\n\n".join(parts) + "\n"


def dumps_body(body: dict) -> str:
    """Canonical serialisation used for bit-identity comparisons."""
    return json.dumps(body, sort_keys=True, indent=1, ensure_ascii=False)


def write_pqf_csv(path, pqf: np.ndarray, columns, labels, weights) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(columns) + ["target", "weight"])
        for row, y, wt in zip(pqf, labels, weights):
            w.writerow([repr(float(v)) for v in row] + [int(y), repr(float(wt))])


def emit_report(report, out_dir) -> dict:
    """Write report.json (body + provenance), tables.txt and any PQF exports."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"json": out / REPORT_JSON, "tables": out / TABLES_TXT}
    payload = {"body": report.body, "provenance": report.provenance}
    paths["json"].write_text(json.dumps(payload, sort_keys=True, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    paths["tables"].write_text(render_tables(report.body), encoding="utf-8")
    art = report.artifacts
    if art and "pqf_train" in art:
        for part in ("train", "test"):
            p = out / f"pqf_{part}.csv"
            write_pqf_csv(p, art[f"pqf_{part}"], art["pqf_columns"], art[f"{part}_labels"], art[f"{part}_weights"])
            paths[f"pqf_{part}"] = p
    return paths


def load_report(path) -> dict:
    """Read report.json from a run directory (or the file itself)."""
    p = Path(path)
    if p.is_dir():
        p = p / REPORT_JSON
    return json.loads(p.read_text(encoding="utf-8"))
