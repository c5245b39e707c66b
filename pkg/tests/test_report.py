import json

import numpy as np
import pytest
from scipy.spatial.distance import jensenshannon

from topicbench import cluster as CL
from topicbench import coherence as CO
from topicbench import corpus as C
from topicbench import plsa as P
from topicbench import report as R
from topicbench import synthetic
from topicbench.errors import DataFormatError


class TestJensenShannon:
    def test_matches_scipy(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            p = rng.random(5)
            p /= p.sum()
            q = rng.random(5)
            q /= q.sum()
            ours = R.jensen_shannon_distance(p, q)
            ref = jensenshannon(p, q, base=2)
            assert ours == pytest.approx(ref, abs=1e-12)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            ps = rng.random((3, 6))
            ps /= ps.sum(axis=1, keepdims=True)
            d01 = R.jensen_shannon_distance(ps[0], ps[1])
            d12 = R.jensen_shannon_distance(ps[1], ps[2])
            d02 = R.jensen_shannon_distance(ps[0], ps[2])
            assert d02 <= d01 + d12 + 1e-9


class TestIntertopicMap:
    def test_identical_rows(self):
        rows = np.tile([0.2, 0.3, 0.5], (3, 1))
        m = R.intertopic_map(rows, "jensen_shannon")
        assert np.allclose(m["distances"], 0.0, atol=1e-12)
        assert np.allclose(m["coords"] - m["coords"][0], 0.0, atol=1e-9)

    def test_two_orthogonal_rows_cosine(self):
        rows = np.array([[1.0, 0.0], [0.0, 2.0]])
        m = R.intertopic_map(rows, "cosine")
        assert m["distances"][0][1] == pytest.approx(1.0, abs=1e-12)
        gap = np.linalg.norm(np.asarray(m["coords"][0]) - np.asarray(m["coords"][1]))
        assert gap == pytest.approx(1.0, abs=1e-9)

    def test_three_points_embed_exactly(self):
        # three distributions; 3 points always embed exactly in 2-D
        rows = np.array([
            [0.8, 0.1, 0.1],
            [0.1, 0.8, 0.1],
            [0.2, 0.3, 0.5],
        ])
        m = R.intertopic_map(rows, "jensen_shannon")
        coords = np.asarray(m["coords"])
        d = np.asarray(m["distances"])
        for i in range(3):
            for j in range(3):
                got = np.linalg.norm(coords[i] - coords[j])
                assert got == pytest.approx(d[i, j], abs=1e-6)

    def test_single_topic_origin(self):
        m = R.intertopic_map(np.array([[0.5, 0.5]]), "jensen_shannon")
        assert np.asarray(m["coords"]).tolist() == [[0.0, 0.0]]

    def test_matrix_properties(self):
        rng = np.random.default_rng(2)
        rows = rng.random((5, 7))
        rows /= rows.sum(axis=1, keepdims=True)
        m = R.intertopic_map(rows, "jensen_shannon")
        d = np.asarray(m["distances"])
        assert np.allclose(d, d.T, atol=1e-12)
        assert np.allclose(np.diag(d), 0.0, atol=1e-12)
        assert np.all(d >= 0)

    def test_non_distribution_rows_rejected(self):
        with pytest.raises(DataFormatError):
            R.intertopic_map(np.array([[1.0, 2.0], [0.5, 0.5]]), "jensen_shannon")


class TestHistograms:
    def test_plsa_argmax(self):
        import scipy.sparse as sp
        model = P.PlsaModel(
            word_given_topic=np.array([[1.0], [1.0]]) / 1,
            topic_given_doc=np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
            doc_prior=np.array([1 / 3] * 3),
        )
        counts = sp.csr_matrix(np.array([[2], [2], [4]], dtype=np.int64))
        out = R.dominant_topic_histogram_plsa(model, counts, np.array([True] * 3))
        assert out["doc_counts"] == [2, 1]
        assert out["token_mass"] == pytest.approx([4.0, 4.0])

    def test_cluster_sizes_and_noise(self):
        assign = CL.ClusterAssignment(
            labels=np.array([0, 0, 1, -1]), n_clusters=2, stability=[1.0, 0.5])
        out = R.dominant_topic_histogram_clusters(assign, np.array([True] * 4))
        assert out["doc_counts"] == [2, 1]
        assert out["noise_count"] == 1

    def test_uniform_rows_tie_to_topic_zero(self):
        import scipy.sparse as sp
        model = P.PlsaModel(
            word_given_topic=np.full((2, 1), 1.0),
            topic_given_doc=np.full((4, 2), 0.5),
            doc_prior=np.full(4, 0.25),
        )
        counts = sp.csr_matrix(np.ones((4, 1), dtype=np.int64))
        out = R.dominant_topic_histogram_plsa(model, counts, np.ones(4, dtype=bool))
        assert out["doc_counts"] == [4, 0]
        assert out["token_mass"][0] == pytest.approx(out["token_mass"][1], abs=1e-9)


def small_corpus(n_docs=120, n_topics=3, seed=5):
    docs, _ = synthetic.make_documents(n_docs=n_docs, n_topics=n_topics,
                                       doc_len=40, seed=seed)
    cfg = C.PreprocessConfig(min_df=5, max_df_ratio=0.5)
    stop = set(synthetic.STOPWORDS)
    return C.build_corpus(docs, cfg, stopwords=stop)


class TestCompare:
    def run(self, corp, seed=3):
        return R.compare(
            corp,
            P.PlsaConfig(k=3, seed=seed, max_iters=60),
            CL.ClusterParams(min_cluster_size=10),
            CO.CoherenceConfig(window=110, top_n=10),
            lsa_dim=20, pca_dim=5, seed=seed,
        )

    def test_schema_contract(self):
        corp = small_corpus()
        rep = self.run(corp)
        obj = rep.to_json()
        assert set(obj["models"]) == {"plsa", "clusterpipe"}
        for name in ("plsa", "clusterpipe"):
            m = obj["models"][name]
            assert m["run"]["wall_time_seconds"] > 0
            assert -1.0 <= m["coherence"]["mean"] <= 1.0
            assert m["topics"]["topics"]
            assert len(m["intertopic_map"]["coords"]) == m["n_topics"]
        assert "outlier_fraction" in obj["models"]["clusterpipe"]

    def test_determinism_modulo_walltime(self):
        corp = small_corpus()
        a = self.run(corp).to_json()
        b = self.run(corp).to_json()

        def strip(o):
            for m in o["models"].values():
                m["run"]["wall_time_seconds"] = None
            return o

        assert strip(a) == strip(b)

    def test_report_round_trip(self, tmp_path):
        corp = small_corpus()
        rep = self.run(corp)
        jpath = tmp_path / "report.json"
        tpath = tmp_path / "report.txt"
        R.save_report(rep, jpath, tpath)
        assert R.load_report(jpath) == rep.to_json()
        text = tpath.read_text()
        assert "SUMMARY" in text and "mean C_v" in text

    def test_render_text_contains_topics(self):
        corp = small_corpus()
        rep = self.run(corp)
        text = R.render_text(rep)
        assert "CLUSTERPIPE" in text and "PLSA" in text
        json.dumps(rep.to_json())  # must be serializable
