"""Embedding space loading, random baseline spaces and seed vocabularies.

Spaces are read from word2vec text files: a ``<count> <dim>`` header, then
one token per line followed by its components. Token kind prefixes are the
same as in the KG files (``c:``, ``i:``; unprefixed tokens are words).
"""

from __future__ import annotations

import numpy as np

from .kg import CONCEPT, INSTANCE, WORD, NodeId

DEFAULT_KIND_RULES = {"c:": CONCEPT, "i:": INSTANCE, "w:": WORD}

ALL_KINDS = (CONCEPT, INSTANCE, WORD)


class EmbeddingError(ValueError):
    """Malformed embedding file or failed lookup."""


class EmbeddingSpace:
    """Immutable vocabulary -> vector map with a cached component std.

    component_std is the sample standard deviation over all |V|*d matrix
    entries; it scales the per-batch input perturbation during training.
    """

    def __init__(self, name: str, nodes: list[NodeId], matrix: np.ndarray):
        if matrix.ndim != 2 or matrix.shape[0] != len(nodes):
            raise EmbeddingError(f"space {name!r}: matrix shape {matrix.shape} "
                                 f"does not match {len(nodes)} tokens")
        if matrix.shape[1] < 1:
            raise EmbeddingError(f"space {name!r}: dimension must be >= 1")
        if not np.all(np.isfinite(matrix)):
            raise EmbeddingError(f"space {name!r}: non-finite vector component")
        self.name = name
        self.matrix = np.ascontiguousarray(matrix, dtype=np.float64)
        self.matrix.setflags(write=False)
        self.dimension = matrix.shape[1]
        self._index = {n: i for i, n in enumerate(nodes)}
        if len(self._index) != len(nodes):
            raise EmbeddingError(f"space {name!r}: duplicate token")
        self.vocabulary = frozenset(self._index)
        self.component_std = (
            float(np.std(self.matrix, ddof=1)) if self.matrix.size > 1 else 0.0
        )

    def __contains__(self, n: NodeId) -> bool:
        return n in self._index

    def lookup(self, n: NodeId) -> np.ndarray:
        try:
            return self.matrix[self._index[n]]
        except KeyError:
            raise EmbeddingError(
                f"token {n.serialize()!r} not in vocabulary of space {self.name!r}"
            ) from None

    def rows_for(self, nodes) -> np.ndarray:
        """Stacked vectors for a sequence of nodes, in order."""
        idx = [self._index[n] for n in nodes]
        return self.matrix[idx]

    def vocab_by_kind(self) -> dict[str, set[NodeId]]:
        out: dict[str, set[NodeId]] = {k: set() for k in ALL_KINDS}
        for n in self._index:
            out[n.kind].add(n)
        return out


def _parse_token(token: str, kind_rules: dict[str, str]) -> NodeId:
    for prefix, kind in kind_rules.items():
        if token.startswith(prefix):
            return NodeId(kind, token[len(prefix):])
    return NodeId(WORD, token)


def load_embeddings(path, kind_rules: dict[str, str] | None = None,
                    name: str | None = None) -> EmbeddingSpace:
    """Load a word2vec text file; validates header count, arity and finiteness."""
    rules = DEFAULT_KIND_RULES if kind_rules is None else kind_rules
    name = name or str(path)
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise EmbeddingError(f"{path}: header must be '<count> <dim>'")
        count, dim = int(header[0]), int(header[1])
        nodes, rows, seen = [], [], set()
        for lineno, line in enumerate(f, start=2):
            parts = line.rstrip("\n").split(" ")
            if parts and parts[-1] == "":
                parts.pop()  # tolerate trailing space, common in exports
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise EmbeddingError(
                    f"{path}:{lineno}: expected token + {dim} components, "
                    f"got {len(parts) - 1}"
                )
            node = _parse_token(parts[0], rules)
            if node in seen:
                raise EmbeddingError(f"{path}:{lineno}: duplicate token {parts[0]!r}")
            seen.add(node)
            nodes.append(node)
            rows.append(np.array(parts[1:], dtype=np.float64))
    if len(nodes) != count:
        raise EmbeddingError(
            f"{path}: header declares {count} tokens but file contains {len(nodes)}"
        )
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    return EmbeddingSpace(name, nodes, matrix)


def save_embeddings(space: EmbeddingSpace, path) -> None:
    nodes = sorted(space.vocabulary, key=lambda n: n.serialize())
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(nodes)} {space.dimension}\n")
        for n in nodes:
            token = n.serialize() if n.kind != WORD else n.name
            comps = " ".join(repr(float(x)) for x in space.lookup(n))
            f.write(f"{token} {comps}\n")


def make_random_space(vocab, d: int, seed: int, name: str = "rand") -> EmbeddingSpace:
    """Random baseline space: components i.i.d. uniform on [-0.5, 0.5]."""
    nodes = sorted(vocab, key=lambda n: n.serialize())
    if not nodes:
        raise EmbeddingError("random space requires a non-empty vocabulary")
    if d < 1:
        raise EmbeddingError("random space dimension must be >= 1")
    rng = np.random.default_rng(seed)
    matrix = rng.uniform(-0.5, 0.5, size=(len(nodes), d))
    return EmbeddingSpace(name, nodes, matrix)


class SeedVocabulary:
    """Per-kind intersection of the studied spaces' vocabularies.

    Each kind is intersected only over the spaces that declare coverage of
    that kind, so a word-only space does not empty the concept seed.
    """

    def __init__(self, by_kind: dict[str, set[NodeId]]):
        self.by_kind = {k: frozenset(by_kind.get(k, ())) for k in ALL_KINDS}

    @property
    def words(self):
        return self.by_kind[WORD]

    @property
    def concepts(self):
        """Concept and instance nodes together; datasets treat them identically."""
        return self.by_kind[CONCEPT] | self.by_kind[INSTANCE]

    def __contains__(self, n: NodeId) -> bool:
        return n in self.by_kind[n.kind]

    def all_nodes(self):
        return frozenset().union(*self.by_kind.values())


def seed_vocabulary(spaces: list[EmbeddingSpace],
                    coverage: dict[str, set[str]]) -> SeedVocabulary:
    """Intersect vocabularies per node kind over the spaces claiming that kind."""
    if not spaces:
        raise EmbeddingError("seed vocabulary needs at least one space")
    for s in spaces:
        if s.name not in coverage:
            raise EmbeddingError(f"no kind coverage declared for space {s.name!r}")
    by_kind: dict[str, set[NodeId]] = {}
    for kind in ALL_KINDS:
        claiming = [s for s in spaces if kind in coverage[s.name]]
        if not claiming:
            by_kind[kind] = set()
            continue
        acc = {n for n in claiming[0].vocabulary if n.kind == kind}
        for s in claiming[1:]:
            acc &= s.vocabulary
        by_kind[kind] = acc
    return SeedVocabulary(by_kind)
