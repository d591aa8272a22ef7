"""Knowledge graph loading, validation and querying.

The graph is the silver standard from which relation-pair datasets are
generated. File format: UTF-8 TSV, one triple per line as
``relation<TAB>subject<TAB>object``. Node ids carry a kind prefix
(``c:`` concept, ``i:`` instance, ``w:`` word). Lines starting with ``#``
are comments; the directive ``#rw=<relation>`` names the word-to-concept
relation used for projecting concept pairs to word pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


CONCEPT = "concept"
INSTANCE = "instance"
WORD = "word"

KIND_PREFIX = {CONCEPT: "c:", INSTANCE: "i:", WORD: "w:"}
PREFIX_KIND = {v: k for k, v in KIND_PREFIX.items()}


class KGError(ValueError):
    """Malformed KG file or invalid graph query."""


class PairType(str, Enum):
    CONCEPT_CONCEPT = "concept_concept"
    WORD_CONCEPT = "word_concept"
    WORD_WORD = "word_word"
    UNARY = "unary"


@dataclass(frozen=True, order=True)
class NodeId:
    kind: str
    name: str

    def __post_init__(self):
        if self.kind not in KIND_PREFIX:
            raise KGError(f"unknown node kind {self.kind!r}")
        if not self.name or any(c in "\t\n\r" for c in self.name):
            raise KGError(f"invalid node name {self.name!r}")

    @classmethod
    def parse(cls, token: str) -> "NodeId":
        prefix, kind = token[:2], PREFIX_KIND.get(token[:2])
        if kind is None:
            raise KGError(f"node id {token!r} has no known kind prefix (c:/i:/w:)")
        return cls(kind, token[len(prefix):])

    def serialize(self) -> str:
        return KIND_PREFIX[self.kind] + self.name

    @property
    def is_word(self) -> bool:
        return self.kind == WORD


@dataclass(frozen=True)
class RelationType:
    name: str
    group: str = ""


@dataclass(frozen=True, order=True)
class Triple:
    relation: str
    subject: NodeId
    object: NodeId


@dataclass(frozen=True)
class RelationStats:
    relation: str
    pair_counts: dict  # pair type value -> count
    object_subject_ratio: float
    vocab_total: int


class KnowledgeGraph:
    """Immutable triple store with word-to-concept projection support."""

    def __init__(self, triples, relations=None, word_concept_relation=None):
        self.triples = frozenset(triples)
        self.word_concept_relation = word_concept_relation

        names = {t.relation for t in self.triples}
        self.relations: dict[str, RelationType] = {}
        for r in relations or ():
            if r.name in self.relations:
                raise KGError(f"duplicate relation type {r.name!r}")
            self.relations[r.name] = r
        for name in sorted(names):
            self.relations.setdefault(name, RelationType(name))

        self.nodes = frozenset(n for t in self.triples for n in (t.subject, t.object))

        self._by_relation: dict[str, list[Triple]] = {}
        for t in sorted(self.triples):
            self._by_relation.setdefault(t.relation, []).append(t)

        # r_w index: concept/instance -> words naming it
        self._words_of: dict[NodeId, set[NodeId]] = {}
        if word_concept_relation is not None:
            for t in self._by_relation.get(word_concept_relation, ()):
                if t.subject.kind != WORD or t.object.kind == WORD:
                    raise KGError(
                        f"r_w triple {t.subject.serialize()} -> "
                        f"{t.object.serialize()} must link a word to a concept/instance"
                    )
                self._words_of.setdefault(t.object, set()).add(t.subject)

    def __eq__(self, other):
        return (
            isinstance(other, KnowledgeGraph)
            and self.triples == other.triples
            and self.nodes == other.nodes
            and set(self.relations) == set(other.relations)
            and self.word_concept_relation == other.word_concept_relation
        )

    def triples_of(self, relation: str) -> list[Triple]:
        if relation not in self.relations:
            raise KGError(f"unknown relation {relation!r}")
        return self._by_relation.get(relation, [])

    def words_of(self, n: NodeId) -> set[NodeId]:
        """All words w with an r_w triple (w -> n). Requires a concept/instance node."""
        if n.kind == WORD:
            raise KGError(f"words_of called on word node {n.serialize()!r}")
        if self.word_concept_relation is None:
            raise KGError("graph has no #rw= directive; word projection unavailable")
        return set(self._words_of.get(n, ()))

    def project_pairs(self, relation: str, pair_type: PairType,
                      strict_rw: bool = True) -> set[tuple[NodeId, NodeId]]:
        """Distinct (subject, object) pairs of a relation at the given pair level.

        Concept-level triples are projected down to words via r_w; triples
        already stated at the target level are included as-is. Only direct
        triples are considered, never transitive closures. With strict_rw,
        projecting concept triples on a graph lacking an r_w directive is an
        error; otherwise such triples simply contribute no word pairs
        (summary counting).
        """
        triples = self.triples_of(relation)
        pairs: set[tuple[NodeId, NodeId]] = set()
        if pair_type == PairType.UNARY:
            return {(t.subject, t.object) for t in triples}

        def words(node):
            if self.word_concept_relation is None:
                if strict_rw:
                    raise KGError(
                        "graph has no #rw= directive; word projection unavailable"
                    )
                return ()
            return self._words_of.get(node, ())

        for t in triples:
            s_word, o_word = t.subject.is_word, t.object.is_word
            if pair_type == PairType.CONCEPT_CONCEPT:
                if not s_word and not o_word:
                    pairs.add((t.subject, t.object))
            elif pair_type == PairType.WORD_CONCEPT:
                if s_word and not o_word:
                    pairs.add((t.subject, t.object))
                elif not s_word and not o_word:
                    for w in words(t.subject):
                        pairs.add((w, t.object))
            elif pair_type == PairType.WORD_WORD:
                if s_word and o_word:
                    pairs.add((t.subject, t.object))
                elif not s_word and not o_word:
                    for wi in words(t.subject):
                        for wj in words(t.object):
                            pairs.add((wi, wj))
        return pairs

    def relation_stats(self, relation: str) -> RelationStats:
        triples = self.triples_of(relation)
        subjects = {t.subject for t in triples}
        objects = {t.object for t in triples}
        ratio = len(objects) / len(subjects) if subjects else 0.0
        counts = {
            pt.value: len(self.project_pairs(relation, pt, strict_rw=False))
            for pt in (PairType.CONCEPT_CONCEPT, PairType.WORD_CONCEPT, PairType.WORD_WORD)
        }
        return RelationStats(
            relation=relation,
            pair_counts=counts,
            object_subject_ratio=ratio,
            vocab_total=len(subjects | objects),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            if self.word_concept_relation is not None:
                f.write(f"#rw={self.word_concept_relation}\n")
            for t in sorted(self.triples):
                f.write(f"{t.relation}\t{t.subject.serialize()}\t{t.object.serialize()}\n")


def load_kg(path, groups: dict[str, str] | None = None) -> KnowledgeGraph:
    """Parse a TSV triple file. `groups` optionally maps relation name -> category label."""
    triples = []
    rw = None
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                if line.startswith("#rw="):
                    rw = line[len("#rw="):].strip()
                    if not rw:
                        raise KGError(f"{path}:{lineno}: empty #rw= directive")
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise KGError(
                    f"{path}:{lineno}: expected relation<TAB>subject<TAB>object, "
                    f"got {len(parts)} field(s)"
                )
            rel, subj, obj = parts
            try:
                triples.append(Triple(rel, NodeId.parse(subj), NodeId.parse(obj)))
            except KGError as e:
                raise KGError(f"{path}:{lineno}: {e}") from e
    relations = None
    if groups:
        names = {t.relation for t in triples}
        relations = [RelationType(n, groups[n]) for n in sorted(names & set(groups))]
    return KnowledgeGraph(triples, relations=relations, word_concept_relation=rw)


def kg_summary_rows(kg: KnowledgeGraph) -> list[dict]:
    """One row per relation with the dataset-summary columns (CSV report)."""
    rows = []
    for name in sorted(kg.relations):
        st = kg.relation_stats(name)
        rows.append(
            {
                "relation": name,
                "group": kg.relations[name].group,
                "concept_pairs": st.pair_counts[PairType.CONCEPT_CONCEPT.value],
                "word_concept_pairs": st.pair_counts[PairType.WORD_CONCEPT.value],
                "word_pairs": st.pair_counts[PairType.WORD_WORD.value],
                "obj_subj_ratio": st.object_subject_ratio,
                "vocab_total": st.vocab_total,
            }
        )
    return rows
