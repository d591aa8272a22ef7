import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relprobe.embeddings import (
    EmbeddingError,
    EmbeddingSpace,
    load_embeddings,
    make_random_space,
    save_embeddings,
    seed_vocabulary,
)
from relprobe.kg import CONCEPT, WORD

from conftest import c, w


def write_vec(tmp_path, text, name="sp.vec"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoad:
    def test_small_file(self, tmp_path):
        sp = load_embeddings(write_vec(tmp_path, "2 3\nfoo 1 2 3\nc:bar 0.5 -1 0\n"))
        assert len(sp.vocabulary) == 2
        assert sp.dimension == 3
        assert w("foo") in sp
        assert c("bar") in sp
        np.testing.assert_array_equal(sp.lookup(w("foo")), [1.0, 2.0, 3.0])

    def test_header_count_mismatch(self, tmp_path):
        bad = "5 2\n" + "".join(f"t{i} 0 1\n" for i in range(4))
        with pytest.raises(EmbeddingError, match="header"):
            load_embeddings(write_vec(tmp_path, bad))

    def test_arity_mismatch(self, tmp_path):
        with pytest.raises(EmbeddingError, match="components"):
            load_embeddings(write_vec(tmp_path, "1 3\nfoo 1 2\n"))

    def test_non_finite_rejected(self, tmp_path):
        with pytest.raises(EmbeddingError, match="finite"):
            load_embeddings(write_vec(tmp_path, "1 2\nfoo nan 1\n"))

    def test_duplicate_token_is_error(self, tmp_path):
        with pytest.raises(EmbeddingError, match="duplicate"):
            load_embeddings(write_vec(tmp_path, "2 1\nfoo 1\nfoo 2\n"))

    def test_all_zero_vectors_load_with_zero_std(self, tmp_path):
        sp = load_embeddings(write_vec(tmp_path, "2 2\na 0 0\nb 0 0\n"))
        assert sp.component_std == 0.0

    def test_lookup_bit_exact(self, tmp_path):
        sp = load_embeddings(write_vec(tmp_path, "1 2\nfoo 0.123456789012345 -7e-3\n"))
        vec = sp.lookup(w("foo"))
        assert vec[0] == float("0.123456789012345")
        assert vec[1] == float("-7e-3")

    def test_oov_names_token_and_space(self, tmp_path):
        sp = load_embeddings(write_vec(tmp_path, "1 1\nfoo 1\n"), name="sp")
        with pytest.raises(EmbeddingError, match=r"w:nope.*'sp'"):
            sp.lookup(w("nope"))

    def test_lookup_immutable(self, tmp_path):
        sp = load_embeddings(write_vec(tmp_path, "1 1\nfoo 1\n"))
        v1 = sp.lookup(w("foo"))
        with pytest.raises(ValueError):
            v1[0] = 9.0
        np.testing.assert_array_equal(v1, sp.lookup(w("foo")))

    def test_save_round_trip(self, tmp_path):
        sp = load_embeddings(write_vec(tmp_path, "2 2\nfoo 0.1 -2 \nc:bar 3 4\n"))
        out = tmp_path / "rt.vec"
        save_embeddings(sp, out)
        sp2 = load_embeddings(out)
        assert sp2.vocabulary == sp.vocabulary
        for n in sp.vocabulary:
            np.testing.assert_array_equal(sp2.lookup(n), sp.lookup(n))


class TestComponentStd:
    def test_matches_recomputation(self, tmp_path):
        rng = np.random.default_rng(0)
        nodes = [w(f"t{i}") for i in range(50)]
        mat = rng.normal(size=(50, 7))
        sp = EmbeddingSpace("x", nodes, mat)
        assert sp.component_std == pytest.approx(np.std(mat, ddof=1), rel=1e-9)


class TestRandomSpace:
    def test_deterministic(self):
        vocab = {w(f"t{i}") for i in range(20)}
        a = make_random_space(vocab, 5, seed=3)
        b = make_random_space(vocab, 5, seed=3)
        np.testing.assert_array_equal(a.matrix, b.matrix)

    def test_seed_sensitivity(self):
        vocab = {w(f"t{i}") for i in range(20)}
        a = make_random_space(vocab, 5, seed=3)
        b = make_random_space(vocab, 5, seed=4)
        assert not np.array_equal(a.matrix, b.matrix)

    def test_component_std_near_uniform_analytic(self):
        vocab = {w(f"t{i}") for i in range(1000)}
        sp = make_random_space(vocab, 300, seed=0)
        assert 0.283 <= sp.component_std <= 0.294

    def test_per_dimension_mean_near_zero(self):
        # 1e5 components: per-dimension mean std is sigma/sqrt(12500) ~ 0.0026
        vocab = {w(f"t{i}") for i in range(12500)}
        sp = make_random_space(vocab, 8, seed=5)
        assert np.all(np.abs(sp.matrix.mean(axis=0)) < 0.02)

    def test_empty_vocab_and_zero_dim(self):
        with pytest.raises(EmbeddingError):
            make_random_space(set(), 3, seed=0)
        with pytest.raises(EmbeddingError):
            make_random_space({w("a")}, 0, seed=0)


def space_of(names, name="sp"):
    nodes = [w(n) if not n.startswith("c:") else c(n[2:]) for n in names]
    return EmbeddingSpace(name, nodes, np.zeros((len(nodes), 2)) + np.arange(len(nodes))[:, None])


class TestSeedVocabulary:
    def test_word_intersection(self):
        s1 = space_of(["a", "b", "cc"], "s1")
        s2 = space_of(["b", "cc", "e"], "s2")
        seed = seed_vocabulary([s1, s2], {"s1": {WORD}, "s2": {WORD}})
        assert seed.words == {w("b"), w("cc")}

    def test_single_space_identity(self):
        s1 = space_of(["a", "c:x"], "s1")
        seed = seed_vocabulary([s1], {"s1": {WORD, CONCEPT}})
        assert seed.words == {w("a")}
        assert seed.concepts == {c("x")}

    def test_per_kind_coverage(self):
        s1 = space_of(["a", "b", "c:x", "c:y"], "s1")
        s2 = space_of(["a", "b", "c:y"], "s2")
        s3 = space_of(["a", "b"], "s3")  # word-only space
        seed = seed_vocabulary(
            [s1, s2, s3],
            {"s1": {WORD, CONCEPT}, "s2": {WORD, CONCEPT}, "s3": {WORD}},
        )
        assert seed.words == {w("a"), w("b")}
        assert seed.concepts == {c("y")}  # intersected over s1, s2 only

    def test_unclaimed_kind_is_empty(self):
        s1 = space_of(["a"], "s1")
        seed = seed_vocabulary([s1], {"s1": {WORD}})
        assert seed.concepts == set()

    def test_monotone_shrinking(self):
        s1 = space_of(["a", "b", "d"], "s1")
        s2 = space_of(["b", "d"], "s2")
        cov = {"s1": {WORD}, "s2": {WORD}}
        before = seed_vocabulary([s1], cov)
        after = seed_vocabulary([s1, s2], cov)
        for kind in before.by_kind:
            assert after.by_kind[kind] <= before.by_kind[kind]


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=200), st.integers(min_value=1, max_value=16),
       st.integers(min_value=0, max_value=2**31))
def test_random_space_std_recomputable(n, d, seed):
    sp = make_random_space({w(f"t{i}") for i in range(n)}, d, seed)
    assert sp.component_std == pytest.approx(np.std(sp.matrix, ddof=1), rel=1e-9)
    assert np.all(np.abs(sp.matrix) <= 0.5)
