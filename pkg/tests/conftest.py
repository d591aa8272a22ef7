import numpy as np
import pytest

from relprobe.datasets import RelationDataset, Sample, negative_switch, split_dataset
from relprobe.embeddings import EmbeddingSpace, SeedVocabulary
from relprobe.kg import CONCEPT, WORD, KnowledgeGraph, NodeId, PairType, Triple


def w(name):
    return NodeId(WORD, name)


def c(name):
    return NodeId(CONCEPT, name)


@pytest.fixture
def toy_kg():
    """hyp(c1->c2) with words w1 -> c1 and w2, w3 -> c2, plus a second relation."""
    triples = [
        Triple("hyp", c("c1"), c("c2")),
        Triple("mero", c("c2"), c("c1")),
        Triple("rw", w("w1"), c("c1")),
        Triple("rw", w("w2"), c("c2")),
        Triple("rw", w("w3"), c("c2")),
    ]
    return KnowledgeGraph(triples, word_concept_relation="rw")


@pytest.fixture
def full_seed():
    """Seed vocabulary that admits everything used by the toy fixtures."""
    words = {w(f"w{i}") for i in range(30)}
    concepts = {c(f"c{i}") for i in range(30)}
    return SeedVocabulary({WORD: words, CONCEPT: concepts})


def planted_setup(d=32, n=1000, noise=0.01, seed=1, switch_seed=7, split_seed=3,
                  ratios=(0.90, 0.05, 0.05)):
    """Synthetic space and dataset where the relation is object = subject + offset."""
    rng = np.random.default_rng(seed)
    subs = [w(f"s{i}") for i in range(n)]
    objs = [w(f"o{i}") for i in range(n)]
    offset = rng.uniform(-1.0, 1.0, d)
    s_mat = rng.uniform(-0.5, 0.5, (n, d))
    o_mat = s_mat + offset + rng.normal(0.0, noise, (n, d))
    space = EmbeddingSpace("planted", subs + objs, np.vstack([s_mat, o_mat]))
    positives = [Sample(s, o, 1) for s, o in zip(subs, objs)]
    negatives = negative_switch(positives, n, switch_seed)
    samples = positives + negatives
    split = split_dataset(samples, ratios, rng_seed=split_seed)
    dataset = RelationDataset(
        "planted__word_word", "planted", PairType.WORD_WORD, samples, split, 0
    )
    return space, dataset
