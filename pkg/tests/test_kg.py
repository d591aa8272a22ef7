import pytest

from relprobe.kg import (
    CONCEPT,
    INSTANCE,
    WORD,
    KGError,
    KnowledgeGraph,
    NodeId,
    PairType,
    Triple,
    kg_summary_rows,
    load_kg,
)

from conftest import c, w


def write_kg(tmp_path, text, name="kg.tsv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestNodeId:
    def test_parse_round_trip(self):
        for token, kind in [("c:spice", CONCEPT), ("i:gemini", INSTANCE), ("w:mild", WORD)]:
            n = NodeId.parse(token)
            assert n.kind == kind
            assert n.serialize() == token

    def test_equality_is_kind_and_name(self):
        assert NodeId.parse("c:x") == NodeId(CONCEPT, "x")
        assert NodeId.parse("c:x") != NodeId.parse("w:x")

    def test_unknown_prefix_rejected(self):
        with pytest.raises(KGError):
            NodeId.parse("q:thing")

    def test_bad_names_rejected(self):
        with pytest.raises(KGError):
            NodeId(WORD, "")
        with pytest.raises(KGError):
            NodeId(WORD, "a\tb")


class TestLoadKg:
    def test_two_line_fixture(self, tmp_path):
        path = write_kg(tmp_path, "#rw=r_w\nhyp\tc:spice\tc:flavorer\nr_w\tw:cinnamon\tc:spice\n")
        kg = load_kg(path)
        assert len(kg.nodes) == 3
        assert set(kg.relations) == {"hyp", "r_w"}
        assert len(kg.triples) == 2
        assert kg.word_concept_relation == "r_w"

    def test_empty_file_is_empty_graph(self, tmp_path):
        kg = load_kg(write_kg(tmp_path, ""))
        assert len(kg.nodes) == 0
        assert len(kg.triples) == 0

    def test_malformed_line_reports_line_number(self, tmp_path):
        with pytest.raises(KGError, match=":1:"):
            load_kg(write_kg(tmp_path, "hyp\tc:a\n"))

    def test_unknown_prefix_reports_line(self, tmp_path):
        with pytest.raises(KGError, match=":2:"):
            load_kg(write_kg(tmp_path, "hyp\tc:a\tc:b\nhyp\tz:a\tc:b\n"))

    def test_duplicate_lines_collapse(self, tmp_path):
        kg = load_kg(write_kg(tmp_path, "hyp\tc:a\tc:b\nhyp\tc:a\tc:b\n"))
        assert len(kg.triples) == 1

    def test_missing_rw_defers_error(self, tmp_path):
        kg = load_kg(write_kg(tmp_path, "hyp\tc:a\tc:b\n"))
        with pytest.raises(KGError, match="rw"):
            kg.words_of(c("a"))

    def test_groups_applied(self, tmp_path):
        kg = load_kg(write_kg(tmp_path, "hyp\tc:a\tc:b\n"), groups={"hyp": "Hypernymy"})
        assert kg.relations["hyp"].group == "Hypernymy"

    def test_round_trip(self, tmp_path):
        src = write_kg(tmp_path, "#rw=rw\nhyp\tc:a\tc:b\nrw\tw:x\tc:a\nmero\ti:q\tc:b\n")
        kg = load_kg(src)
        out = tmp_path / "out.tsv"
        kg.save(out)
        assert load_kg(out) == kg

    def test_invalid_rw_triple_rejected(self):
        with pytest.raises(KGError, match="r_w"):
            KnowledgeGraph([Triple("rw", c("a"), c("b"))], word_concept_relation="rw")


class TestQueries:
    def test_words_of(self, toy_kg):
        assert toy_kg.words_of(c("c2")) == {w("w2"), w("w3")}
        assert toy_kg.words_of(c("c1")) == {w("w1")}

    def test_words_of_unlinked_concept_is_empty(self, toy_kg):
        assert KnowledgeGraph(
            list(toy_kg.triples) + [Triple("hyp", c("c9"), c("c2"))],
            word_concept_relation="rw",
        ).words_of(c("c9")) == set()

    def test_words_of_word_node_errors(self, toy_kg):
        with pytest.raises(KGError):
            toy_kg.words_of(w("w1"))

    def test_unknown_relation(self, toy_kg):
        with pytest.raises(KGError):
            toy_kg.triples_of("nope")


class TestRelationStats:
    def test_two_subjects_one_object(self):
        kg = KnowledgeGraph([
            Triple("r", c("a"), c("x")),
            Triple("r", c("b"), c("x")),
        ])
        st = kg.relation_stats("r")
        assert st.object_subject_ratio == pytest.approx(0.5)
        assert st.vocab_total == 3
        assert st.pair_counts[PairType.CONCEPT_CONCEPT.value] == 2

    def test_singleton(self):
        kg = KnowledgeGraph([Triple("r", c("a"), c("b"))])
        st = kg.relation_stats("r")
        assert st.object_subject_ratio == pytest.approx(1.0)
        assert st.vocab_total == 2

    def test_unknown_relation(self, toy_kg):
        with pytest.raises(KGError):
            toy_kg.relation_stats("nope")

    def test_brute_force_recount(self, toy_kg):
        for name in toy_kg.relations:
            triples = [t for t in toy_kg.triples if t.relation == name]
            st = toy_kg.relation_stats(name)
            subs = {t.subject for t in triples}
            objs = {t.object for t in triples}
            assert st.object_subject_ratio == pytest.approx(len(objs) / len(subs))
            assert st.vocab_total == len(subs | objs)
            assert st.vocab_total <= len(toy_kg.nodes)


class TestProjection:
    def test_word_word_projection(self, toy_kg):
        pairs = toy_kg.project_pairs("hyp", PairType.WORD_WORD)
        assert pairs == {(w("w1"), w("w2")), (w("w1"), w("w3"))}

    def test_word_concept_projection(self, toy_kg):
        pairs = toy_kg.project_pairs("hyp", PairType.WORD_CONCEPT)
        assert pairs == {(w("w1"), c("c2"))}

    def test_concept_projection_is_identity(self, toy_kg):
        assert toy_kg.project_pairs("hyp", PairType.CONCEPT_CONCEPT) == {(c("c1"), c("c2"))}

    def test_direct_word_triples_kept(self):
        kg = KnowledgeGraph([Triple("der", w("a"), w("b"))])
        assert kg.project_pairs("der", PairType.WORD_WORD) == {(w("a"), w("b"))}
        assert kg.project_pairs("der", PairType.CONCEPT_CONCEPT) == set()


def test_summary_rows(toy_kg):
    rows = kg_summary_rows(toy_kg)
    assert [r["relation"] for r in rows] == ["hyp", "mero", "rw"]
    hyp = rows[0]
    assert hyp["word_pairs"] == 2
    assert hyp["concept_pairs"] == 1
    assert hyp["vocab_total"] == 2
