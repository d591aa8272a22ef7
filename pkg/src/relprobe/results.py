"""CSV persistence for experiment results and generation manifests.

One CSV file per experiment (dataset x space) holding per-run audit rows
plus mean/std summary rows; resumability is a file-existence check.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .datasets import ManifestEntry
from .probe.train import METRIC_NAMES, ExperimentResult, RunMetrics, aggregate_metrics

RESULT_FIELDS = (
    "dataset", "relation", "group", "pair_type", "space", "arch",
    "row_type", "run_index", "precision", "recall", "accuracy", "f1",
    "final_epoch",
)


def result_filename(dataset: str, space: str) -> str:
    return f"{dataset}__{space}.csv"


def write_result(path, result: ExperimentResult, meta: dict) -> None:
    """meta carries relation/group/pair_type from the generation manifest."""
    base = {
        "dataset": result.dataset,
        "relation": meta.get("relation", ""),
        "group": meta.get("group", ""),
        "pair_type": meta.get("pair_type", ""),
        "space": result.space,
        "arch": result.architecture,
    }
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=RESULT_FIELDS)
        w.writeheader()
        for r in result.runs:
            w.writerow({**base, "row_type": "run", "run_index": r.run_index,
                        "final_epoch": r.final_epoch, **{m: repr(v) for m, v in r.as_dict().items()}})
        for row_type, stats in (("mean", result.mean), ("std", result.std)):
            w.writerow({**base, "row_type": row_type, "run_index": "",
                        "final_epoch": "", **{m: repr(stats[m]) for m in METRIC_NAMES}})


def read_result(path) -> tuple[ExperimentResult, dict]:
    runs = []
    base = None
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            if base is None:
                base = row
            if row["row_type"] != "run":
                continue
            runs.append(RunMetrics(
                precision=float(row["precision"]),
                recall=float(row["recall"]),
                accuracy=float(row["accuracy"]),
                f1=float(row["f1"]),
                run_index=int(row["run_index"]),
                final_epoch=int(row["final_epoch"]),
            ))
    if base is None or not runs:
        raise ValueError(f"{path}: no run rows")
    mean, std = aggregate_metrics(runs)
    result = ExperimentResult(base["dataset"], base["space"], base["arch"],
                              runs, mean, std)
    meta = {k: base[k] for k in ("relation", "group", "pair_type")}
    return result, meta


def read_all_results(results_dir) -> list[tuple[ExperimentResult, dict]]:
    out = []
    for path in sorted(Path(results_dir).glob("*.csv")):
        out.append(read_result(path))
    return out


MANIFEST_FIELDS = (
    "dataset", "relation", "group", "pair_type", "n_pos", "n_neg",
    "n_fallback_other", "n_fallback_random", "status",
)


def write_manifest(path, entries: list[ManifestEntry]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=MANIFEST_FIELDS)
        w.writeheader()
        for e in entries:
            w.writerow({k: getattr(e, k) for k in MANIFEST_FIELDS})


def read_manifest(path) -> list[ManifestEntry]:
    entries = []
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            entries.append(ManifestEntry(
                dataset=row["dataset"],
                relation=row["relation"],
                group=row["group"],
                pair_type=row["pair_type"],
                n_pos=int(row["n_pos"]),
                n_neg=int(row["n_neg"]),
                n_fallback_other=int(row["n_fallback_other"]),
                n_fallback_random=int(row["n_fallback_random"]),
                status=row["status"],
            ))
    return entries
