"""Command-line pipeline: gen -> train -> analyze -> report, plus check.

Exit codes: 0 success, 2 input error, 3 incomplete baselines,
4 task failures present.
"""

from __future__ import annotations

import csv
import fnmatch
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from .analysis import (
    _COLUMNS,
    AnalysisError,
    aggregate,
    baseline_range,
    classify_all,
    render_table,
)
from .config import ConfigError, StudyConfig, load_config
from .datasets import RelationDataset, forge_all
from .embeddings import EmbeddingError, load_embeddings, make_random_space, seed_vocabulary
from .kg import KGError, PairType, kg_summary_rows, load_kg
from .probe.model import gradient_check
from .probe.train import run_experiment
from .results import (
    read_all_results,
    read_manifest,
    result_filename,
    write_manifest,
    write_result,
)
from .seeding import derive_seed

INPUT_ERROR = 2
INCOMPLETE_BASELINES = 3
TASK_FAILURES = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_study(config_path, out, seed) -> StudyConfig:
    try:
        cfg = load_config(config_path)
    except FileNotFoundError as e:
        _fail(INPUT_ERROR, f"cannot read config {config_path}: {e}")
    except ConfigError as e:
        _fail(INPUT_ERROR, str(e))
    if out is not None:
        cfg.out_dir = out
    if seed is not None:
        cfg.master_seed = seed
    return cfg


def _load_inputs(cfg: StudyConfig):
    try:
        kg = load_kg(cfg.kg_path, groups=cfg.groups)
    except FileNotFoundError:
        _fail(INPUT_ERROR, f"knowledge graph file not found: {cfg.kg_path}")
    except KGError as e:
        _fail(INPUT_ERROR, f"{cfg.kg_path}: {e}")
    spaces = []
    for entry in cfg.real_spaces:
        try:
            spaces.append(load_embeddings(entry.path, name=entry.name))
        except FileNotFoundError:
            _fail(INPUT_ERROR, f"embedding file not found: {entry.path}")
        except (EmbeddingError, ValueError) as e:
            _fail(INPUT_ERROR, f"{entry.path}: {e}")
    coverage = {e.name: set(e.kinds) for e in cfg.spaces}
    seed_vocab = seed_vocabulary(spaces, coverage)
    return kg, spaces, coverage, seed_vocab


def _random_space(cfg: StudyConfig, seed_vocab):
    entry = cfg.random_space
    return make_random_space(
        seed_vocab.all_nodes(),
        entry.dim,
        derive_seed(cfg.master_seed, "rand_space", entry.name),
        name=entry.name,
    )


@click.group()
def main():
    """Probe how much relational knowledge embedding spaces encode."""


_config_opt = click.option("--config", "config_path", required=True,
                           type=click.Path(), help="study configuration YAML")
_out_opt = click.option("--out", default=None, type=click.Path(),
                        help="override the output directory")
_seed_opt = click.option("--seed", default=None, type=int,
                         help="override the master seed")


@main.command()
@_config_opt
@_out_opt
@_seed_opt
def gen(config_path, out, seed):
    """Generate relation datasets, the manifest and the KG summary."""
    cfg = _load_study(config_path, out, seed)
    kg, _, _, seed_vocab = _load_inputs(cfg)
    datasets, manifest = forge_all(kg, seed_vocab, cfg.forge_config())

    out_dir = Path(cfg.out_dir)
    ds_dir = out_dir / "datasets"
    ds_dir.mkdir(parents=True, exist_ok=True)
    for ds in datasets:
        ds.save(ds_dir / f"{ds.name}.tsv")
    write_manifest(out_dir / "manifest.csv", manifest)
    with open(out_dir / "kg_summary.csv", "w", newline="", encoding="utf-8") as f:
        rows = kg_summary_rows(kg)
        w = csv.DictWriter(f, fieldnames=list(rows[0]) if rows else ["relation"])
        w.writeheader()
        w.writerows(rows)
    n_ok = sum(1 for e in manifest if e.status == "ok")
    click.echo(f"generated {n_ok} datasets ({len(manifest) - n_ok} skipped) in {ds_dir}")


def _space_covers(space_entry_kinds: set, dataset: RelationDataset) -> bool:
    required = {s.subject.kind for s in dataset.samples}
    if dataset.pair_type != PairType.UNARY:
        required |= {s.object.kind for s in dataset.samples}
    return required <= set(space_entry_kinds)


@main.command()
@_config_opt
@_out_opt
@_seed_opt
@click.option("--jobs", default=1, type=int, help="parallel training tasks")
@click.option("--filter-relation", default=None, help="glob on relation names")
@click.option("--filter-space", default=None, help="restrict to one space name")
def train(config_path, out, seed, jobs, filter_relation, filter_space):
    """Train probes for every (dataset, space) combination; resumable."""
    cfg = _load_study(config_path, out, seed)
    kg, spaces, coverage, seed_vocab = _load_inputs(cfg)
    out_dir = Path(cfg.out_dir)
    ds_dir = out_dir / "datasets"
    if not ds_dir.is_dir():
        _fail(INPUT_ERROR, f"no datasets directory at {ds_dir}; run gen first")
    manifest = read_manifest(out_dir / "manifest.csv")
    meta = {e.dataset: {"relation": e.relation, "group": e.group,
                        "pair_type": e.pair_type} for e in manifest}

    datasets = [
        RelationDataset.load(p, p.stem) for p in sorted(ds_dir.glob("*.tsv"))
    ]
    if filter_relation is not None:
        datasets = [d for d in datasets if fnmatch.fnmatch(d.relation, filter_relation)]

    all_spaces = spaces + [_random_space(cfg, seed_vocab)]
    results_dir = out_dir / "results"
    results_dir.mkdir(parents=True, exist_ok=True)

    tasks = []
    for ds in datasets:
        for space in all_spaces:
            if filter_space is not None and space.name != filter_space:
                continue
            if not _space_covers(coverage[space.name], ds):
                click.echo(f"skip {ds.name} x {space.name}: kind coverage")
                continue
            path = results_dir / result_filename(ds.name, space.name)
            if path.exists():
                continue
            tasks.append((ds, space, path))

    def run_task(task):
        ds, space, path = task
        try:
            result = run_experiment(ds, space, cfg.training, cfg.master_seed)
            write_result(path, result, meta.get(ds.name, {}))
            return None
        except Exception as e:  # surfaced collectively at exit
            return f"{ds.name} x {space.name}: {e}"

    if jobs <= 1:
        outcomes = [run_task(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_task, tasks))
    failures = [o for o in outcomes if o is not None]
    click.echo(f"trained {len(tasks) - len(failures)} experiments "
               f"({len(failures)} failed) into {results_dir}")
    for f in failures:
        click.echo(f"failed: {f}", err=True)
    if failures:
        sys.exit(TASK_FAILURES)


VERDICT_FIELDS = ("dataset", "relation", "group", "pair_type", "space",
                  "classification", "mu_f1", "delta_mu_f1")


def _analyze_dir(cfg: StudyConfig):
    out_dir = Path(cfg.out_dir)
    results_dir = out_dir / "results"
    if not results_dir.is_dir():
        _fail(INPUT_ERROR, f"no results directory at {results_dir}; run train first")
    manifest = read_manifest(out_dir / "manifest.csv")
    meta = {e.dataset: {"relation": e.relation, "group": e.group,
                        "pair_type": e.pair_type} for e in manifest}
    random_datasets = {e.dataset for e in manifest if e.group == "random"}
    pairs = read_all_results(results_dir)
    results = [r for r, _ in pairs]
    try:
        rng = baseline_range(
            [r for r in results if r.dataset in random_datasets]
        )
    except AnalysisError as e:
        _fail(INCOMPLETE_BASELINES, f"cannot compute baseline range: {e}")
    verdicts, unanalyzable = classify_all(
        results, rng, cfg.random_space.name, random_datasets
    )
    return out_dir, meta, rng, verdicts, unanalyzable


def _write_verdicts(path, verdicts, meta):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=VERDICT_FIELDS)
        w.writeheader()
        for v in sorted(verdicts, key=lambda v: (v.dataset, v.space)):
            m = meta.get(v.dataset, {})
            w.writerow({
                "dataset": v.dataset,
                "relation": m.get("relation", ""),
                "group": m.get("group", ""),
                "pair_type": m.get("pair_type", ""),
                "space": v.space,
                "classification": v.classification,
                "mu_f1": "" if v.mu_f1 is None else repr(v.mu_f1),
                "delta_mu_f1": "" if v.delta_mu_f1 is None else repr(v.delta_mu_f1),
            })


@main.command()
@_config_opt
@_out_opt
@_seed_opt
def analyze(config_path, out, seed):
    """Compute the baseline range, verdicts and aggregate reports."""
    cfg = _load_study(config_path, out, seed)
    out_dir, meta, rng, verdicts, unanalyzable = _analyze_dir(cfg)

    with open(out_dir / "baseline.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["metric", "lower", "upper", "mean", "std", "n_results"])
        w.writerow([rng.metric, repr(rng.lower), repr(rng.upper),
                    repr(rng.source_mean), repr(rng.source_std), rng.n_results])
    _write_verdicts(out_dir / "verdicts.csv", verdicts, meta)
    rows = aggregate(verdicts, meta, kg_name=cfg.kg_name)
    with open(out_dir / "aggregate.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        fields = [attr for attr, _ in _COLUMNS]
        w.writerow(fields)
        for r in rows:
            w.writerow(["" if getattr(r, a) is None else getattr(r, a) for a in fields])
    table = render_table(rows)
    (out_dir / "aggregate.txt").write_text(table, encoding="utf-8")
    click.echo(f"baseline f1 range [{rng.lower:.3f}, {rng.upper:.3f}] "
               f"from {rng.n_results} pooled results")
    click.echo(f"{len(verdicts)} verdicts written to {out_dir / 'verdicts.csv'}")
    if unanalyzable:
        (out_dir / "unanalyzable.txt").write_text(
            "\n".join(unanalyzable) + "\n", encoding="utf-8")
        _fail(INCOMPLETE_BASELINES,
              f"{len(unanalyzable)} dataset(s) lack a random-embedding baseline: "
              + ", ".join(unanalyzable))


@main.command()
@_config_opt
@_out_opt
@_seed_opt
def report(config_path, out, seed):
    """Print the aggregate table (recomputed from the results directory)."""
    cfg = _load_study(config_path, out, seed)
    _, meta, rng, verdicts, _ = _analyze_dir(cfg)
    click.echo(f"baseline f1 range: [{rng.lower:.3f}, {rng.upper:.3f}]")
    click.echo(render_table(aggregate(verdicts, meta, kg_name=cfg.kg_name)), nl=False)


@main.command()
def check():
    """Run the gradient-check harness and quick self-oracles."""
    err = gradient_check(probe_seed=0)
    ok = err <= 1e-3
    click.echo(f"gradient check: max relative error {err:.3e} "
               f"({'PASS' if ok else 'FAIL'}, threshold 1e-3)")

    from .probe.train import metrics_from_confusion
    m = metrics_from_confusion(3, 1, 2, 4)
    fixture_ok = (abs(m.precision - 0.75) < 1e-12 and abs(m.recall - 0.6) < 1e-12
                  and abs(m.f1 - 2 * 0.75 * 0.6 / 1.35) < 1e-12
                  and abs(m.accuracy - 0.7) < 1e-12)
    click.echo(f"metric oracle: {'PASS' if fixture_ok else 'FAIL'}")
    if not (ok and fixture_ok):
        sys.exit(1)


if __name__ == "__main__":
    main()
