"""Probe training: Adam, plateau scheduler, perturbed batches, metrics.

One training run is single-threaded and deterministic for a fixed run
seed. Distinct (dataset, space, run) tasks share only immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..datasets import RelationDataset
from ..embeddings import EmbeddingSpace
from ..kg import PairType
from ..seeding import derive_seed
from . import kernels
from .model import MLPProbe, ProbeArchitecture, ProbeError

DEFAULT_EPOCH_TIERS = ((300, 48), (5000, 24), (30000, 12), (None, 6))


@dataclass
class TrainingConfig:
    learning_rate: float = 1e-5
    dropout: float = 0.5
    batch_size: int = 64
    runs: int = 3
    epoch_tiers: tuple = DEFAULT_EPOCH_TIERS
    scheduler_factor: float = 0.5
    scheduler_patience: int = 2
    min_lr: float = 1e-7
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    perturbation: bool = True
    arch_kind: str = "NN2"

    def __post_init__(self):
        bounds = [t[0] for t in self.epoch_tiers[:-1]]
        if bounds != sorted(set(bounds)) or self.epoch_tiers[-1][0] is not None:
            raise ValueError("epoch tiers must be strictly increasing, last unbounded")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    def epochs_for(self, n_positives: int) -> int:
        for bound, epochs in self.epoch_tiers:
            if bound is None or n_positives < bound:
                return epochs
        raise AssertionError("unreachable: last tier is unbounded")


@dataclass(frozen=True)
class RunMetrics:
    precision: float
    recall: float
    accuracy: float
    f1: float
    run_index: int = 0
    final_epoch: int = 0

    def as_dict(self):
        return {
            "precision": self.precision,
            "recall": self.recall,
            "accuracy": self.accuracy,
            "f1": self.f1,
        }


METRIC_NAMES = ("precision", "recall", "accuracy", "f1")


@dataclass
class ExperimentResult:
    dataset: str
    space: str
    architecture: str
    runs: list = field(default_factory=list)  # RunMetrics
    mean: dict = field(default_factory=dict)
    std: dict = field(default_factory=dict)

    @classmethod
    def from_runs(cls, dataset, space, architecture, runs) -> "ExperimentResult":
        mean, std = aggregate_metrics(runs)
        return cls(dataset, space, architecture, list(runs), mean, std)

    @property
    def mean_f1(self) -> float:
        return self.mean["f1"]

    @property
    def std_f1(self) -> float:
        return self.std["f1"]


def aggregate_metrics(runs) -> tuple[dict, dict]:
    """Per-metric mean and sample (n-1) std; std is 0 for a single run."""
    mean, std = {}, {}
    for name in METRIC_NAMES:
        vals = np.array([r.as_dict()[name] for r in runs])
        mean[name] = float(vals.mean())
        std[name] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
    return mean, std


def metrics_from_confusion(tp: int, fp: int, fn: int, tn: int, **kw) -> RunMetrics:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 0.0
    return RunMetrics(precision=precision, recall=recall, accuracy=accuracy, f1=f1, **kw)


class Adam:
    def __init__(self, params, cfg: TrainingConfig):
        self.params = params
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.lr = cfg.learning_rate
        self.beta1, self.beta2, self.eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
        self.t = 0

    def step(self, grads) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            kernels.adam_(p.ravel(), np.ascontiguousarray(g).ravel(), m.ravel(),
                          v.ravel(), self.lr, self.beta1, self.beta2, self.eps,
                          bc1, bc2)


class PlateauScheduler:
    """Halve the learning rate when validation loss stops improving."""

    def __init__(self, optimizer: Adam, factor=0.5, patience=2, min_lr=1e-7):
        self.optimizer = optimizer
        self.factor = factor
        self.patience = patience
        self.min_lr = min_lr
        self.best = math.inf
        self.bad_checks = 0

    def step(self, val_loss: float) -> None:
        if val_loss < self.best:
            self.best = val_loss
            self.bad_checks = 0
            return
        self.bad_checks += 1
        if self.bad_checks > self.patience:
            self.optimizer.lr = max(self.optimizer.lr * self.factor, self.min_lr)
            self.bad_checks = 0


def draw_perturbation(space: EmbeddingSpace, rng: np.random.Generator) -> np.ndarray:
    """One shared perturbation vector per batch, uniform on [-sigma, sigma]."""
    sigma = space.component_std
    if sigma == 0.0:
        return np.zeros(space.dimension)
    return rng.uniform(-sigma, sigma, size=space.dimension)


def compose_input(space: EmbeddingSpace, sample, v=None, unary=False) -> np.ndarray:
    """Model input for one sample: (subject+v) concatenated with (object+v).

    Adding the same v to both members preserves their difference while
    hiding the individual embeddings. Unary samples use the subject vector
    alone.
    """
    subj = space.lookup(sample.subject)
    if unary:
        return subj + v if v is not None else subj.copy()
    obj = space.lookup(sample.object)
    if v is not None:
        return np.concatenate([subj + v, obj + v])
    return np.concatenate([subj, obj])


def _design_matrices(dataset: RelationDataset, space: EmbeddingSpace):
    unary = dataset.pair_type == PairType.UNARY
    try:
        subj = space.rows_for(s.subject for s in dataset.samples)
        obj = None if unary else space.rows_for(s.object for s in dataset.samples)
    except KeyError as e:
        raise ProbeError(
            f"dataset {dataset.name!r} contains a node missing from space "
            f"{space.name!r}: {e.args[0].serialize()}"
        ) from None
    y = np.array([s.label for s in dataset.samples], dtype=np.int64)
    return subj, obj, y, unary


def _batch_input(subj, obj, idx, v):
    if obj is None:
        return subj[idx] + v if v is not None else subj[idx].copy()
    if v is not None:
        return np.concatenate([subj[idx] + v, obj[idx] + v], axis=1)
    return np.concatenate([subj[idx], obj[idx]], axis=1)


def evaluate(model: MLPProbe, x: np.ndarray, y: np.ndarray, **kw) -> RunMetrics:
    """Test metrics, positive class = label 1; no perturbation, no dropout."""
    if len(y) == 0:
        raise ProbeError("cannot evaluate on an empty split")
    pred = model.predict(x)
    tp = int(np.sum((pred == 1) & (y == 1)))
    fp = int(np.sum((pred == 1) & (y == 0)))
    fn = int(np.sum((pred == 0) & (y == 1)))
    tn = int(np.sum((pred == 0) & (y == 0)))
    return metrics_from_confusion(tp, fp, fn, tn, **kw)


def train_probe(
    dataset: RelationDataset,
    space: EmbeddingSpace,
    cfg: TrainingConfig,
    run_seed: int,
    arch: ProbeArchitecture | None = None,
    run_index: int = 0,
) -> tuple[MLPProbe, RunMetrics]:
    subj, obj, y, unary = _design_matrices(dataset, space)
    width = space.dimension if unary else 2 * space.dimension
    if arch is None:
        arch = ProbeArchitecture.for_width(cfg.arch_kind, width)
    elif arch.input_width != width:
        raise ProbeError(f"architecture width {arch.input_width} != input width {width}")

    rng = np.random.default_rng(run_seed)
    model = MLPProbe(arch, rng)
    optimizer = Adam(model.parameters(), cfg)
    scheduler = PlateauScheduler(
        optimizer, cfg.scheduler_factor, cfg.scheduler_patience, cfg.min_lr
    )

    train_idx = np.array(dataset.split_indices("train"))
    val_idx = np.array(dataset.split_indices("val"))
    test_idx = np.array(dataset.split_indices("test"))
    n_pos = sum(1 for s in dataset.samples if s.label == 1)
    epochs = cfg.epochs_for(n_pos)

    x_val = _batch_input(subj, obj, val_idx, None)
    for epoch in range(epochs):
        order = rng.permutation(len(train_idx))
        for start in range(0, len(order), cfg.batch_size):
            idx = train_idx[order[start:start + cfg.batch_size]]
            v = draw_perturbation(space, rng) if cfg.perturbation else None
            xb = _batch_input(subj, obj, idx, v)
            loss, grads = model.loss_and_grads(
                xb, y[idx], dropout=cfg.dropout, rng=rng
            )
            if not math.isfinite(loss):
                raise ProbeError(
                    f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size} "
                    f"({dataset.name} on {space.name})"
                )
            optimizer.step(grads)
        val_loss, _ = model.loss_and_grads(x_val, y[val_idx])
        scheduler.step(val_loss)

    x_test = _batch_input(subj, obj, test_idx, None)
    metrics = evaluate(model, x_test, y[test_idx],
                       run_index=run_index, final_epoch=epochs)
    return model, metrics


def run_experiment(
    dataset: RelationDataset,
    space: EmbeddingSpace,
    cfg: TrainingConfig,
    master_seed: int,
    arch: ProbeArchitecture | None = None,
) -> ExperimentResult:
    """cfg.runs independent trainings; aggregate mean and sample std per metric."""
    if cfg.runs < 1:
        raise ValueError("need at least one run")
    runs = []
    for i in range(cfg.runs):
        run_seed = derive_seed(master_seed, "train", dataset.name, space.name, i)
        _, metrics = train_probe(dataset, space, cfg, run_seed, arch=arch, run_index=i)
        runs.append(metrics)
    kind = arch.kind if arch is not None else cfg.arch_kind
    return ExperimentResult.from_runs(dataset.name, space.name, kind, runs)
