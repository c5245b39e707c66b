import numpy as np
import pytest
import scipy.sparse as sp

from conftest import random_counts
from oracles import naive_plsa_sweep
from topicbench import plsa as P
from topicbench.corpus import Vocabulary
from topicbench.errors import ConfigError, DataFormatError


def fit_counts():
    return sp.csr_matrix(np.array([[2, 0], [0, 2]], dtype=np.int64))


class TestInit:
    def test_k1_degenerate(self):
        counts = fit_counts()
        model = P.plsa_init(P.PlsaConfig(k=1, seed=3), 2, 2, counts)
        assert model.word_given_topic.shape == (1, 2)
        assert np.all(model.topic_given_doc == 1.0)

    def test_seed_determinism(self):
        counts = fit_counts()
        a = P.plsa_init(P.PlsaConfig(k=3, seed=7), 2, 2, counts)
        b = P.plsa_init(P.PlsaConfig(k=3, seed=7), 2, 2, counts)
        assert np.array_equal(a.word_given_topic, b.word_given_topic)
        assert np.array_equal(a.topic_given_doc, b.topic_given_doc)

    def test_doc_prior_from_rowsums(self):
        counts = sp.csr_matrix(np.array([[2, 1], [1, 0]], dtype=np.int64))
        model = P.plsa_init(P.PlsaConfig(k=2, seed=0), 2, 2, counts)
        assert np.allclose(model.doc_prior, [0.75, 0.25])

    def test_all_zero_matrix_error(self):
        counts = sp.csr_matrix((2, 2), dtype=np.int64)
        with pytest.raises(DataFormatError):
            P.plsa_init(P.PlsaConfig(k=1), 2, 2, counts)

    def test_rows_stochastic(self):
        counts = fit_counts()
        model = P.plsa_init(P.PlsaConfig(k=4, seed=1), 2, 2, counts)
        assert np.allclose(model.word_given_topic.sum(axis=1), 1.0, atol=1e-9)
        assert np.allclose(model.topic_given_doc.sum(axis=1), 1.0, atol=1e-9)


class TestIterate:
    def test_k1_closed_form_and_fixed_point(self):
        counts = sp.csr_matrix(np.array([[3, 1], [1, 2]], dtype=np.int64))
        model = P.plsa_init(P.PlsaConfig(k=1, seed=0), 2, 2, counts)
        m1, _ = P.plsa_iterate(model, counts)
        freq = np.array([4, 3]) / 7.0
        assert np.allclose(m1.word_given_topic[0], freq, atol=1e-9)
        assert np.all(m1.topic_given_doc == pytest.approx(1.0))
        m2, _ = P.plsa_iterate(m1, counts)
        assert np.allclose(m1.word_given_topic, m2.word_given_topic, atol=1e-12)

    def test_2x2_specialization(self):
        counts = fit_counts()
        model = P.plsa_fit(counts, P.PlsaConfig(k=2, seed=11, max_iters=500, tol=1e-12))
        phi = model.word_given_topic
        # topics must specialize to one word each, up to permutation
        best = min(
            np.abs(phi - np.eye(2)).max(),
            np.abs(phi - np.eye(2)[::-1]).max(),
        )
        assert best < 1e-3

    def test_monotone_per_sweep(self):
        rng = np.random.default_rng(0)
        counts = random_counts(rng, 8, 6)
        model = P.plsa_init(P.PlsaConfig(k=3, seed=1), 8, 6, counts)
        prev = None
        for _ in range(25):
            model, ll = P.plsa_iterate(model, counts)
            if prev is not None:
                assert ll >= prev - 1e-8
            prev = ll

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(42)
        for trial in range(10):
            n, v, k = rng.integers(2, 6), rng.integers(2, 6), rng.integers(1, 3)
            counts = random_counts(rng, int(n), int(v))
            model = P.plsa_init(P.PlsaConfig(k=int(k), seed=trial), int(n), int(v), counts)
            got, ll = P.plsa_iterate(model, counts)
            phi, theta, ll_ref = naive_plsa_sweep(
                counts.toarray(), model.word_given_topic,
                model.topic_given_doc, model.doc_prior,
            )
            assert np.allclose(got.word_given_topic, phi, atol=1e-12)
            assert np.allclose(got.topic_given_doc, theta, atol=1e-12)
            assert ll == pytest.approx(ll_ref, abs=1e-9)

    def test_vocab_permutation_equivariance(self):
        rng = np.random.default_rng(9)
        counts = random_counts(rng, 6, 5)
        perm = rng.permutation(5)
        model = P.plsa_init(P.PlsaConfig(k=2, seed=4), 6, 5, counts)
        m1, ll1 = P.plsa_iterate(model, counts)

        permuted_model = P.PlsaModel(
            word_given_topic=model.word_given_topic[:, perm],
            topic_given_doc=model.topic_given_doc.copy(),
            doc_prior=model.doc_prior.copy(),
            config=model.config,
        )
        counts_p = sp.csr_matrix(counts.toarray()[:, perm])
        m2, ll2 = P.plsa_iterate(permuted_model, counts_p)
        assert np.allclose(m1.word_given_topic[:, perm], m2.word_given_topic, atol=1e-9)
        assert ll1 == pytest.approx(ll2, abs=1e-9)


class TestFit:
    def test_huge_tol_stops_early(self):
        counts = fit_counts()
        model = P.plsa_fit(counts, P.PlsaConfig(k=2, seed=0, tol=1.0, max_iters=100))
        assert 1 <= len(model.ll_trace) <= 2

    def test_trace_determinism(self):
        rng = np.random.default_rng(2)
        counts = random_counts(rng, 10, 8)
        cfg = P.PlsaConfig(k=3, seed=5, max_iters=30)
        a = P.plsa_fit(counts, cfg)
        b = P.plsa_fit(counts, cfg)
        assert a.ll_trace == b.ll_trace
        assert np.array_equal(a.word_given_topic, b.word_given_topic)

    def test_restarts_pick_best(self):
        rng = np.random.default_rng(6)
        counts = random_counts(rng, 10, 8)
        single = P.plsa_fit(counts, P.PlsaConfig(k=3, seed=5, max_iters=40, restarts=1))
        multi = P.plsa_fit(counts, P.PlsaConfig(k=3, seed=5, max_iters=40, restarts=4))
        assert multi.ll_trace[-1] >= single.ll_trace[-1] - 1e-6

    def test_stochastic_rows_after_fit(self):
        rng = np.random.default_rng(8)
        counts = random_counts(rng, 12, 7)
        model = P.plsa_fit(counts, P.PlsaConfig(k=4, seed=2, max_iters=20))
        assert np.allclose(model.word_given_topic.sum(axis=1), 1.0, atol=1e-9)
        assert np.allclose(model.topic_given_doc.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(model.word_given_topic >= 0)
        assert np.all(model.topic_given_doc >= 0)

    def test_invalid_config(self):
        with pytest.raises(ConfigError, match="k"):
            P.PlsaConfig(k=0).validate()


class TestTopWordsAndDominance:
    def make_model(self, phi, theta):
        theta = np.asarray(theta, dtype=float)
        n = theta.shape[0]
        return P.PlsaModel(
            word_given_topic=np.asarray(phi, dtype=float),
            topic_given_doc=np.asarray(theta, dtype=float),
            doc_prior=np.full(n, 1.0 / n),
        )

    def test_top_words_sorted(self):
        vocab = Vocabulary.from_terms(["a", "b", "c"])
        model = self.make_model([[0.5, 0.3, 0.2]], [[1.0]])
        assert P.plsa_top_words(model, 0, 2, vocab) == [("a", 0.5), ("b", 0.3)]

    def test_tie_breaks_lexicographic(self):
        vocab = Vocabulary.from_terms(["b", "a"])
        model = self.make_model([[0.5, 0.5]], [[1.0]])
        assert P.plsa_top_words(model, 0, 2, vocab) == [("a", 0.5), ("b", 0.5)]

    def test_n_beyond_vocab(self):
        vocab = Vocabulary.from_terms(["a", "b"])
        model = self.make_model([[0.6, 0.4]], [[1.0]])
        assert len(P.plsa_top_words(model, 0, 10, vocab)) == 2

    def test_dominant_histogram(self):
        model = self.make_model([[0.5, 0.5], [0.5, 0.5]],
                                [[0.9, 0.1], [0.2, 0.8]])
        assert P.plsa_dominant_topics(model).tolist() == [1, 1]

    def test_dominant_tie_goes_low(self):
        model = self.make_model([[0.5, 0.5], [0.5, 0.5]],
                                [[0.5, 0.5], [0.5, 0.5]])
        assert P.plsa_dominant_topics(model).tolist() == [2, 0]

    def test_kept_mask_excludes_docs(self):
        model = self.make_model([[1.0], [0.0]],
                                [[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        hist = P.plsa_dominant_topics(model, kept_mask=[True, False, True])
        assert hist.tolist() == [1, 1]


class TestSnapshot:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(12)
        counts = random_counts(rng, 6, 5)
        model = P.plsa_fit(counts, P.PlsaConfig(k=2, seed=1, max_iters=10))
        path = tmp_path / "model.bin"
        P.save_model(model, path)
        back = P.load_model(path)
        assert np.array_equal(back.word_given_topic, model.word_given_topic)
        assert np.array_equal(back.topic_given_doc, model.topic_given_doc)
        assert np.array_equal(back.doc_prior, model.doc_prior)
        assert back.ll_trace == model.ll_trace
        assert back.config.to_dict() == model.config.to_dict()

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "junk.bin"
        p.write_bytes(b"NOPE!!")
        with pytest.raises(DataFormatError, match="snapshot"):
            P.load_model(p)
