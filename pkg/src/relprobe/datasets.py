"""Balanced relation-pair dataset generation.

Positives come straight from the KG (projected to the requested pair
level); negatives are produced by switching subjects and objects of the
positives, falling back to other relations' pairs and then to random seed
pairs when the switch space is exhausted. Every dataset is balanced,
deduplicated, closed-world sound within the seed vocabulary, and split
90/5/5 stratified by label. Everything is deterministic given a seed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .embeddings import SeedVocabulary
from .kg import KGError, KnowledgeGraph, NodeId, PairType
from .seeding import derive_seed

# Above this many candidate pairs, switch from exhaustive enumeration to
# rejection sampling. Both branches are deterministic for a fixed seed.
_ENUMERATION_CAP = 2_000_000

DEFAULT_RANDOM_SIZES = (200, 500, 1000, 5000, 10000, 50000)
MAX_UNARY_OBJECTS = 64


class DatasetError(ValueError):
    """Dataset cannot be generated as requested."""


@dataclass(frozen=True, order=True)
class Sample:
    subject: NodeId
    object: NodeId
    label: int


@dataclass
class RelationDataset:
    name: str
    relation: str
    pair_type: PairType
    samples: list[Sample]
    split: list[str]  # per sample: train / val / test
    generation_seed: int
    n_fallback_other: int = 0
    n_fallback_random: int = 0

    def positives(self):
        return [s for s in self.samples if s.label == 1]

    def negatives(self):
        return [s for s in self.samples if s.label == 0]

    def split_indices(self, which: str) -> list[int]:
        return [i for i, sp in enumerate(self.split) if sp == which]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"#relation={self.relation}\n")
            f.write(f"#pair_type={self.pair_type.value}\n")
            f.write(f"#seed={self.generation_seed}\n")
            f.write(f"#fallback={self.n_fallback_other},{self.n_fallback_random}\n")
            for s, sp in zip(self.samples, self.split):
                f.write(f"{s.subject.serialize()}\t{s.object.serialize()}\t{s.label}\t{sp}\n")

    @classmethod
    def load(cls, path, name: str) -> "RelationDataset":
        meta = {"relation": "", "pair_type": "word_word", "seed": "0", "fallback": "0,0"}
        samples, split = [], []
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, val = line[1:].partition("=")
                    meta[key] = val
                    continue
                subj, obj, label, sp = line.split("\t")
                samples.append(Sample(NodeId.parse(subj), NodeId.parse(obj), int(label)))
                split.append(sp)
        n_other, n_random = (int(x) for x in meta["fallback"].split(","))
        return cls(
            name=name,
            relation=meta["relation"],
            pair_type=PairType(meta["pair_type"]),
            samples=samples,
            split=split,
            generation_seed=int(meta["seed"]),
            n_fallback_other=n_other,
            n_fallback_random=n_random,
        )


def extract_positive_pairs(
    kg: KnowledgeGraph, relation: str, seed: SeedVocabulary, pair_type: PairType
) -> list[Sample]:
    """Label-1 samples for a relation at a pair level, restricted to the seed.

    Unary relations keep their (class) objects unrestricted but require at
    most MAX_UNARY_OBJECTS distinct ones; only the subject needs an
    embedding at training time.
    """
    pairs = kg.project_pairs(relation, pair_type)
    if pair_type == PairType.UNARY:
        kept = {(s, o) for s, o in pairs if s in seed}
        if len({o for _, o in kept}) > MAX_UNARY_OBJECTS:
            raise DatasetError(
                f"relation {relation!r} has more than {MAX_UNARY_OBJECTS} distinct "
                "objects; not a unary class relation"
            )
    else:
        kept = {(s, o) for s, o in pairs if s in seed and o in seed}
    return [Sample(s, o, 1) for s, o in sorted(kept)]


def _sample_pairs(subjects, objects, excluded, target, rng, forbid_reflexive):
    """Uniform distinct pairs from subjects x objects minus exclusions."""
    subjects, objects = sorted(subjects), sorted(objects)
    n_cand = len(subjects) * len(objects)
    if n_cand == 0 or target <= 0:
        return []
    if n_cand <= _ENUMERATION_CAP:
        candidates = [
            (s, o)
            for s, o in itertools.product(subjects, objects)
            if (s, o) not in excluded and not (forbid_reflexive and s == o)
        ]
        order = rng.permutation(len(candidates))
        return [candidates[i] for i in order[:target]]
    chosen: list = []
    chosen_set = set()
    attempts = 0
    max_attempts = 50 * target + 10_000
    while len(chosen) < target and attempts < max_attempts:
        attempts += 1
        s = subjects[rng.integers(len(subjects))]
        o = objects[rng.integers(len(objects))]
        if (s, o) in excluded or (s, o) in chosen_set or (forbid_reflexive and s == o):
            continue
        chosen.append((s, o))
        chosen_set.add((s, o))
    return chosen


def negative_switch(positives: list[Sample], target_count: int, rng_seed: int) -> list[Sample]:
    """Negatives by recombining the positives' subject and object vocabularies.

    Reflexive pairs are excluded unless the relation itself has reflexive
    positives. May return fewer than target_count when the cross product
    is exhausted; the caller handles the shortfall.
    """
    if not positives or any(s.label != 1 for s in positives):
        raise DatasetError("negative_switch requires non-empty label-1 samples")
    pos_pairs = {(s.subject, s.object) for s in positives}
    subjects = {s.subject for s in positives}
    objects = {s.object for s in positives}
    forbid_reflexive = not any(s == o for s, o in pos_pairs)
    rng = np.random.default_rng(rng_seed)
    pairs = _sample_pairs(subjects, objects, pos_pairs, target_count, rng, forbid_reflexive)
    return [Sample(s, o, 0) for s, o in pairs]


def _domain_sets(seed: SeedVocabulary, pair_type: PairType):
    if pair_type == PairType.CONCEPT_CONCEPT:
        return seed.concepts, seed.concepts
    if pair_type == PairType.WORD_CONCEPT:
        return seed.words, seed.concepts
    if pair_type == PairType.WORD_WORD:
        return seed.words, seed.words
    raise DatasetError(f"no seed pair domain for pair type {pair_type.value}")


def fallback_negatives(
    kg: KnowledgeGraph,
    relation: str,
    seed: SeedVocabulary,
    pair_type: PairType,
    excluded: set,
    shortfall: int,
    rng_seed: int,
) -> tuple[list[Sample], int, int]:
    """Fill a negative shortfall: other relations' positives first, then random pairs.

    `excluded` must contain the relation's positive pairs plus negatives
    already chosen. Returns (samples, n_from_other, n_random).
    """
    if shortfall <= 0:
        raise DatasetError("fallback_negatives requires a positive shortfall")
    rng = np.random.default_rng(rng_seed)
    taken: list[Sample] = []
    excluded = set(excluded)

    others = sorted(
        r for r in kg.relations
        if r != relation and r != kg.word_concept_relation
    )
    pool = set()
    for other in others:
        try:
            pool |= {
                (s.subject, s.object)
                for s in extract_positive_pairs(kg, other, seed, pair_type)
            }
        except DatasetError:
            continue
    pool -= excluded
    pool_list = sorted(pool)
    order = rng.permutation(len(pool_list))
    for i in order[:shortfall]:
        s, o = pool_list[i]
        taken.append(Sample(s, o, 0))
        excluded.add((s, o))
    n_other = len(taken)

    n_random = 0
    if len(taken) < shortfall and pair_type != PairType.UNARY:
        subjects, objects = _domain_sets(seed, pair_type)
        pairs = _sample_pairs(
            subjects, objects, excluded, shortfall - len(taken), rng, forbid_reflexive=True
        )
        taken.extend(Sample(s, o, 0) for s, o in pairs)
        n_random = len(pairs)
    return taken, n_other, n_random


def split_dataset(samples: list[Sample], ratios=(0.90, 0.05, 0.05), rng_seed: int = 0) -> list[str]:
    """Deterministic stratified-by-label train/val/test assignment."""
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise DatasetError(f"split ratios must be three positive values summing to 1, got {ratios}")
    n = len(samples)
    if n < 20:
        raise DatasetError(f"need at least 20 samples to split, got {n}")
    n_val = max(1, round(n * ratios[1]))
    n_test = max(1, round(n * ratios[2]))
    if n_val + n_test >= n:
        raise DatasetError("split leaves no training samples")

    rng = np.random.default_rng(rng_seed)
    by_label: dict[int, list[int]] = {}
    for i, s in enumerate(samples):
        by_label.setdefault(s.label, []).append(i)
    labels = sorted(by_label)
    shuffled = {}
    for lab in labels:
        idx = np.array(by_label[lab])
        shuffled[lab] = [int(i) for i in idx[rng.permutation(len(idx))]]

    assignment = ["train"] * n
    cursor = {lab: 0 for lab in labels}
    donated = {lab: 0 for lab in labels}
    for split_name, quota in (("val", n_val), ("test", n_test)):
        # largest-remainder apportionment of the quota across labels
        shares = {lab: quota * len(by_label[lab]) / n for lab in labels}
        alloc = {lab: int(shares[lab]) for lab in labels}
        leftovers = quota - sum(alloc.values())
        order = sorted(
            labels,
            key=lambda lab: (-(shares[lab] - alloc[lab]), donated[lab], lab),
        )
        for lab in order[:leftovers]:
            alloc[lab] += 1
        for lab in labels:
            for _ in range(alloc[lab]):
                assignment[shuffled[lab][cursor[lab]]] = split_name
                cursor[lab] += 1
            donated[lab] += alloc[lab]
    return assignment


def gen_random_dataset(
    seed: SeedVocabulary, pair_type: PairType, x: int, rng_seed: int,
    ratios=(0.90, 0.05, 0.05),
) -> RelationDataset:
    """Baseline dataset of x random 'positive' pairs plus x disjoint negatives."""
    subjects, objects = _domain_sets(seed, pair_type)
    rng = np.random.default_rng(rng_seed)
    pairs = _sample_pairs(subjects, objects, set(), 2 * x, rng, forbid_reflexive=True)
    if len(pairs) < 2 * x:
        raise DatasetError(
            f"seed vocabulary too small for {2 * x} distinct random pairs "
            f"(got {len(pairs)})"
        )
    samples = [Sample(s, o, 1) for s, o in pairs[:x]]
    samples += [Sample(s, o, 0) for s, o in pairs[x:]]
    split = split_dataset(samples, ratios, derive_seed(rng_seed, "split"))
    return RelationDataset(
        name=f"random_{x}",
        relation=f"random_{x}",
        pair_type=pair_type,
        samples=samples,
        split=split,
        generation_seed=rng_seed,
    )


@dataclass
class ForgeConfig:
    master_seed: int = 0
    random_sizes: tuple = DEFAULT_RANDOM_SIZES
    min_total: int = 100  # smallest emitted dataset, lower bound 40
    pair_types: dict = field(default_factory=dict)  # relation -> list of PairType
    unary_relations: tuple = ()
    random_pair_type: PairType = PairType.WORD_WORD
    split_ratios: tuple = (0.90, 0.05, 0.05)

    def __post_init__(self):
        if self.min_total < 40:
            raise DatasetError("min_total below 40 is not supported")
        sizes = tuple(self.random_sizes)
        if not sizes or list(sizes) != sorted(set(sizes)):
            raise DatasetError("random_sizes must be non-empty and strictly increasing")
        self.random_sizes = sizes


@dataclass
class ManifestEntry:
    dataset: str
    relation: str
    group: str
    pair_type: str
    n_pos: int = 0
    n_neg: int = 0
    n_fallback_other: int = 0
    n_fallback_random: int = 0
    status: str = "ok"


def _forge_one(kg, seed, relation, pair_type, cfg) -> tuple[RelationDataset | None, ManifestEntry]:
    group = kg.relations[relation].group
    entry = ManifestEntry(
        dataset=f"{relation}__{pair_type.value}",
        relation=relation,
        group=group,
        pair_type=pair_type.value,
    )
    task_seed = derive_seed(cfg.master_seed, "forge", relation, pair_type.value)
    try:
        positives = extract_positive_pairs(kg, relation, seed, pair_type)
    except (DatasetError, KGError) as e:
        entry.status = f"skipped:{e}"
        return None, entry
    if not positives:
        entry.status = "skipped:no_positives"
        return None, entry
    entry.n_pos = len(positives)

    negatives = negative_switch(positives, len(positives), derive_seed(task_seed, "switch"))
    if len(negatives) < len(positives):
        excluded = {(s.subject, s.object) for s in positives}
        excluded |= {(s.subject, s.object) for s in negatives}
        extra, n_other, n_random = fallback_negatives(
            kg, relation, seed, pair_type, excluded,
            len(positives) - len(negatives), derive_seed(task_seed, "fallback"),
        )
        negatives += extra
        entry.n_fallback_other = n_other
        entry.n_fallback_random = n_random
    entry.n_neg = len(negatives)

    if len(positives) - len(negatives) > 1:
        entry.status = "skipped:unbalanced"
        return None, entry
    samples = positives + negatives
    if len(samples) < cfg.min_total:
        entry.status = "skipped:too_small"
        return None, entry
    split = split_dataset(samples, cfg.split_ratios, derive_seed(task_seed, "split"))
    ds = RelationDataset(
        name=entry.dataset,
        relation=relation,
        pair_type=pair_type,
        samples=samples,
        split=split,
        generation_seed=task_seed,
        n_fallback_other=entry.n_fallback_other,
        n_fallback_random=entry.n_fallback_random,
    )
    return ds, entry


def forge_all(
    kg: KnowledgeGraph, seed: SeedVocabulary, cfg: ForgeConfig
) -> tuple[list[RelationDataset], list[ManifestEntry]]:
    """Generate every (relation, pair type) dataset plus the random baselines.

    Skipped datasets are recorded in the manifest with a reason, never
    raised. The r_w relation itself is plumbing and gets no dataset.
    Switching assumes a closed world and does not filter transitive false
    negatives; that known limitation applies to every emitted dataset.
    """
    datasets: list[RelationDataset] = []
    manifest: list[ManifestEntry] = []
    pairwise = [PairType.CONCEPT_CONCEPT, PairType.WORD_CONCEPT, PairType.WORD_WORD]
    for relation in sorted(kg.relations):
        if relation == kg.word_concept_relation:
            continue
        if relation in cfg.pair_types:
            types = cfg.pair_types[relation]
        elif relation in cfg.unary_relations:
            types = [PairType.UNARY]
        else:
            types = pairwise
        for pt in types:
            ds, entry = _forge_one(kg, seed, relation, pt, cfg)
            manifest.append(entry)
            if ds is not None:
                datasets.append(ds)
    for x in cfg.random_sizes:
        entry = ManifestEntry(
            dataset=f"random_{x}",
            relation=f"random_{x}",
            group="random",
            pair_type=cfg.random_pair_type.value,
        )
        try:
            ds = gen_random_dataset(
                seed, cfg.random_pair_type, x,
                derive_seed(cfg.master_seed, "random", x),
                cfg.split_ratios,
            )
        except DatasetError as e:
            entry.status = f"skipped:{e}"
            manifest.append(entry)
            continue
        entry.n_pos = entry.n_neg = x
        manifest.append(entry)
        datasets.append(ds)
    return datasets, manifest
