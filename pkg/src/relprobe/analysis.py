"""Statistical analysis of experiment results.

Baseline ranges come from probes trained on the random pair datasets;
datasets on which a random-embedding probe escapes that range are biased;
surviving models are classified by the 2-sigma significance rule against
their random-embedding baseline; verdicts aggregate into per-group report
rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probe.train import ExperimentResult

BIASED = "biased_dataset"
NOT_SIGNIFICANT = "not_significant"
BETTER = "predictable_better"
WORSE = "predictable_worse"


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class BaselineRange:
    metric: str
    lower: float
    upper: float
    source_mean: float
    source_std: float
    n_results: int

    def contains(self, value: float) -> bool:
        """Closed interval: boundary values count as inside."""
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class RelationVerdict:
    dataset: str
    space: str
    classification: str
    mu_f1: float | None = None
    delta_mu_f1: float | None = None


def baseline_range(random_results: list[ExperimentResult], metric: str = "f1") -> BaselineRange:
    """Pool per-run metric values across all random-dataset results; mean +/- 2 std."""
    pooled = [r.as_dict()[metric] for res in random_results for r in res.runs]
    if len(pooled) < 2:
        raise AnalysisError(
            f"baseline range needs at least 2 pooled values, got {len(pooled)}"
        )
    vals = np.array(pooled)
    mean = float(vals.mean())
    std = float(vals.std(ddof=1))
    return BaselineRange(
        metric=metric,
        lower=mean - 2.0 * std,
        upper=mean + 2.0 * std,
        source_mean=mean,
        source_std=std,
        n_results=len(pooled),
    )


def detect_bias(result_on_random_embeddings: ExperimentResult, rng: BaselineRange) -> bool:
    """Biased iff the random-embedding probe's mean falls outside the range."""
    return not rng.contains(result_on_random_embeddings.mean["f1"])


def significance(result_s: ExperimentResult, result_rand: ExperimentResult) -> str:
    """2-sigma rule: better/worse when the mean gap strictly exceeds twice the larger std."""
    if result_s.dataset != result_rand.dataset:
        raise AnalysisError(
            f"significance compares results on one dataset, got "
            f"{result_s.dataset!r} vs {result_rand.dataset!r}"
        )
    gap = result_s.mean_f1 - result_rand.mean_f1
    threshold = 2.0 * max(result_s.std_f1, result_rand.std_f1)
    if gap > threshold:
        return BETTER
    if -gap > threshold:
        return WORSE
    return NOT_SIGNIFICANT


def classify_all(
    results: list[ExperimentResult],
    rng: BaselineRange,
    random_space: str,
    random_datasets: set[str],
) -> tuple[list[RelationVerdict], list[str]]:
    """One verdict per (relation dataset, studied space) model.

    Random-dataset results and the random-embedding baseline results feed
    the range and bias checks but are not themselves classified. Datasets
    lacking a random-embedding baseline are returned as unanalyzable.
    """
    baselines = {
        r.dataset: r
        for r in results
        if r.space == random_space and r.dataset not in random_datasets
    }
    verdicts: list[RelationVerdict] = []
    unanalyzable: list[str] = []
    for res in results:
        if res.space == random_space or res.dataset in random_datasets:
            continue
        base = baselines.get(res.dataset)
        if base is None:
            if res.dataset not in unanalyzable:
                unanalyzable.append(res.dataset)
            continue
        if detect_bias(base, rng):
            verdicts.append(RelationVerdict(res.dataset, res.space, BIASED))
            continue
        cls = significance(res, base)
        verdicts.append(
            RelationVerdict(
                res.dataset,
                res.space,
                cls,
                mu_f1=res.mean_f1,
                delta_mu_f1=res.mean_f1 - base.mean_f1,
            )
        )
    return verdicts, unanalyzable


@dataclass
class AggregateRow:
    group: str
    pair_type: str
    kg: str
    n_datasets: int
    n_biased_datasets: int
    n_models: int
    n_biased_models: int
    pct_biased: float
    pct_not_signif: float
    pct_better: float
    pct_worse: float
    mean_mu_f1: float | None
    mean_delta_mu_f1: float | None


def _make_row(group, pair_type, kg, verdicts) -> AggregateRow:
    n_models = len(verdicts)
    counts = {BIASED: 0, NOT_SIGNIFICANT: 0, BETTER: 0, WORSE: 0}
    for v in verdicts:
        counts[v.classification] += 1
    datasets = {v.dataset for v in verdicts}
    biased_datasets = {v.dataset for v in verdicts if v.classification == BIASED}
    better = [v for v in verdicts if v.classification == BETTER]
    pct = lambda c: 100.0 * c / n_models if n_models else 0.0
    return AggregateRow(
        group=group,
        pair_type=pair_type,
        kg=kg,
        n_datasets=len(datasets),
        n_biased_datasets=len(biased_datasets),
        n_models=n_models,
        n_biased_models=counts[BIASED],
        pct_biased=pct(counts[BIASED]),
        pct_not_signif=pct(counts[NOT_SIGNIFICANT]),
        pct_better=pct(counts[BETTER]),
        pct_worse=pct(counts[WORSE]),
        mean_mu_f1=float(np.mean([v.mu_f1 for v in better])) if better else None,
        mean_delta_mu_f1=float(np.mean([v.delta_mu_f1 for v in better])) if better else None,
    )


def aggregate(
    verdicts: list[RelationVerdict],
    dataset_meta: dict,
    kg_name: str = "kg",
) -> list[AggregateRow]:
    """Report rows per (group, pair type) plus an 'all' roll-up.

    dataset_meta maps a dataset name to a dict with at least 'group' and
    'pair_type' (typically from the generation manifest).
    """
    grouped: dict[tuple, list[RelationVerdict]] = {}
    for v in verdicts:
        meta = dataset_meta.get(v.dataset, {})
        key = (meta.get("group", ""), meta.get("pair_type", ""))
        grouped.setdefault(key, []).append(v)
    rows = [_make_row("all", "all", kg_name, verdicts)] if verdicts else []
    for (group, pair_type) in sorted(grouped):
        rows.append(_make_row(group, pair_type, kg_name, grouped[(group, pair_type)]))
    return rows


_COLUMNS = (
    ("group", "dataset rel"),
    ("pair_type", "pair type"),
    ("kg", "KG"),
    ("n_datasets", "#ds"),
    ("n_biased_datasets", "#biased"),
    ("n_models", "#models"),
    ("pct_biased", "% biased"),
    ("pct_not_signif", "% not signif."),
    ("pct_better", "% better"),
    ("pct_worse", "% worse"),
    ("mean_mu_f1", "mu_f1"),
    ("mean_delta_mu_f1", "d_mu_f1"),
)


def render_table(rows: list[AggregateRow]) -> str:
    """Plain-text aligned aggregate table."""
    def fmt(row, attr):
        val = getattr(row, attr)
        if val is None:
            return ""
        if isinstance(val, float):
            return f"{val:.3f}" if attr.startswith("mean") else f"{val:.1f}"
        return str(val)

    headers = [h for _, h in _COLUMNS]
    cells = [[fmt(r, attr) for attr, _ in _COLUMNS] for r in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) if cells else len(h)
              for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for c in cells:
        lines.append("  ".join(x.ljust(w) for x, w in zip(c, widths)).rstrip())
    return "\n".join(lines) + "\n"
