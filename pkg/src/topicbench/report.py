"""Comparison harness: run both pipelines, score them identically, and
emit the side-by-side artifacts (topic tables, intertopic map data,
dominant-topic histograms, runtime table)."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import cluster as _cluster
from . import coherence as _coherence
from . import embed as _embed
from . import plsa as _plsa
from .errors import DataFormatError

REPORT_FORMAT = "topicbench-report"
REPORT_VERSION = 1


@dataclass
class RunRecord:
    model: str                  # "plsa" | "clusterpipe"
    wall_time_seconds: float
    config: dict
    corpus_fingerprint: dict    # doc count, vocab size, content hash

    def to_json(self):
        return {
            "model": self.model,
            "wall_time_seconds": self.wall_time_seconds,
            "config": self.config,
            "corpus_fingerprint": self.corpus_fingerprint,
        }


@dataclass
class ComparisonReport:
    corpus_summary: dict
    plsa: dict          # topics, coherence, run, n_topics, histogram, map
    clusterpipe: dict   # ... plus outlier_fraction
    notes: list = field(default_factory=list)

    def to_json(self):
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "corpus": self.corpus_summary,
            "models": {"plsa": self.plsa, "clusterpipe": self.clusterpipe},
            "notes": self.notes,
        }


def jensen_shannon_distance(p, q):
    """sqrt of the base-2 Jensen-Shannon divergence; a metric in [0, 1]."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    m = 0.5 * (p + q)

    def kl(x, y):
        nz = x > 0
        return float(np.sum(x[nz] * np.log2(x[nz] / y[nz])))

    jsd = 0.5 * kl(p, m) + 0.5 * kl(q, m)
    return float(np.sqrt(max(jsd, 0.0)))


def _pairwise_distances(rows, metric):
    c = rows.shape[0]
    d = np.zeros((c, c))
    if metric == "cosine":
        norms = np.linalg.norm(rows, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        unit = rows / safe[:, None]
        sim = unit @ unit.T
        d = 1.0 - np.clip(sim, -1.0, 1.0)
        np.fill_diagonal(d, 0.0)
        d = np.maximum(d, 0.0)
    elif metric == "jensen_shannon":
        sums = rows.sum(axis=1)
        if np.any(rows < -1e-12) or np.any(np.abs(sums - 1.0) > 1e-6):
            raise DataFormatError(
                "jensen_shannon needs probability-distribution rows "
                "(nonnegative, summing to 1)"
            )
        for i in range(c):
            for j in range(i + 1, c):
                d[i, j] = d[j, i] = jensen_shannon_distance(rows[i], rows[j])
    else:
        raise DataFormatError("unknown intertopic metric %r" % metric)
    return d


def classical_mds_2d(d):
    """Double-center the squared distances and embed on the top 2 axes."""
    c = d.shape[0]
    if c == 1:
        return np.zeros((1, 2))
    j = np.eye(c) - np.ones((c, c)) / c
    b = -0.5 * j @ (d ** 2) @ j
    vals, vecs = np.linalg.eigh(b)
    order = np.argsort(vals)[::-1][:2]
    coords = np.zeros((c, 2))
    for axis, idx in enumerate(order):
        lam = max(vals[idx], 0.0)
        col = vecs[:, idx] * np.sqrt(lam)
        i = int(np.argmax(np.abs(col)))
        if col[i] < 0:
            col = -col
        coords[:, axis] = col
    return coords


def intertopic_map(topic_vectors, metric):
    """Symmetric zero-diagonal distance matrix plus 2-D MDS coordinates."""
    rows = np.asarray(topic_vectors, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise DataFormatError("topic_vectors must be a nonempty 2-D array")
    d = _pairwise_distances(rows, metric)
    coords = classical_mds_2d(d)
    return {"metric": metric, "distances": d, "coords": coords}


def dominant_topic_histogram_plsa(model, counts, kept_mask):
    """Argmax document counts per topic plus soft per-topic token mass."""
    hist = _plsa.plsa_dominant_topics(model, kept_mask)
    n_d = np.asarray(counts.sum(axis=1), dtype=np.float64).ravel()
    kept = np.asarray(kept_mask, dtype=bool)
    mass = (n_d[kept, None] * model.topic_given_doc[kept]).sum(axis=0)
    return {"doc_counts": hist.tolist(), "token_mass": mass.tolist()}


def dominant_topic_histogram_clusters(assignment, kept_mask):
    kept = np.asarray(kept_mask, dtype=bool)
    labels = assignment.labels[kept]
    sizes = [int((labels == c).sum()) for c in range(assignment.n_clusters)]
    return {"doc_counts": sizes, "noise_count": int((labels == -1).sum())}


def plsa_topic_set(model, vocab, top_n=10):
    hist = _plsa.plsa_dominant_topics(model)
    topics = []
    for z in range(model.k):
        words = _plsa.plsa_top_words(model, z, top_n, vocab)
        topics.append((z, int(hist[z]), words))
    return _cluster.TopicSet(topics=topics, outlier_fraction=0.0, provenance="plsa")


def compare(corpus, plsa_config, cluster_params, coherence_config,
            embeddings=None, lsa_dim=50, pca_dim=5, seed=0, top_n=10):
    """Run both pipelines end-to-end and assemble the comparison report.

    The clusterpipe timing covers embedding (or EMB1 load), reduction,
    clustering and c-TF-IDF; the PLSA timing covers the EM fit. Both are
    scored with the same coherence configuration.
    """
    fingerprint = {
        "n_docs": corpus.n_docs,
        "vocab_size": len(corpus.vocab),
        "content_hash": corpus.fingerprint(),
    }
    notes = [
        "preprocessing df thresholds: min_df=%d max_df_ratio=%g"
        % (corpus.config.min_df, corpus.config.max_df_ratio),
        "dimensionality reduction: PCA to r=%d (deterministic substitute "
        "for a nonlinear reducer)" % pca_dim,
        "intertopic projection: classical MDS (exact for <= 3 topics)",
    ]

    # --- PLSA pipeline ---
    t0 = time.perf_counter()
    model = _plsa.plsa_fit(corpus.counts, plsa_config)
    plsa_time = time.perf_counter() - t0
    plsa_topics = plsa_topic_set(model, corpus.vocab, top_n=top_n)
    plsa_coh = _coherence.cv_coherence(plsa_topics, corpus.token_seqs, coherence_config)
    plsa_map = intertopic_map(model.word_given_topic, "jensen_shannon")
    plsa_hist = dominant_topic_histogram_plsa(model, corpus.counts, corpus.kept_mask)
    plsa_run = RunRecord(
        model="plsa", wall_time_seconds=plsa_time,
        config=plsa_config.to_dict(), corpus_fingerprint=fingerprint,
    )

    # --- embed / cluster / c-TF-IDF pipeline ---
    t0 = time.perf_counter()
    if embeddings is None:
        dim = min(lsa_dim, corpus.n_docs, len(corpus.vocab))
        emb = _embed.lsa_embed(corpus.counts, dim, seed=seed)
        emb_source = {"source": "lsa", "dim": dim}
    else:
        emb = embeddings
        emb_source = {"source": "external", "dim": emb.dim}
    reduced = _embed.reduce_pca(emb, min(pca_dim, emb.dim),
                                mask=corpus.kept_mask, seed=seed)
    assignment = _cluster.hdbscan_fit(reduced, cluster_params, corpus.kept_mask)
    if assignment.n_clusters > 0:
        weights, ctfidf_warnings = _cluster.c_tf_idf(corpus.counts, assignment.labels)
        cl_topics = _cluster.top_words_per_cluster(
            weights, corpus.vocab, assignment.labels, n=top_n,
            kept_mask=corpus.kept_mask,
        )
    else:
        raise DataFormatError(
            "clustering stage produced no clusters; lower min_cluster_size"
        )
    cluster_time = time.perf_counter() - t0
    cl_coh = _coherence.cv_coherence(cl_topics, corpus.token_seqs, coherence_config)
    cl_map = intertopic_map(weights, "cosine")
    cl_hist = dominant_topic_histogram_clusters(assignment, corpus.kept_mask)
    cl_run = RunRecord(
        model="clusterpipe", wall_time_seconds=cluster_time,
        config={**cluster_params.to_dict(), "embedding": emb_source,
                "pca_dim": pca_dim}, corpus_fingerprint=fingerprint,
    )

    def map_json(m):
        return {
            "metric": m["metric"],
            "distances": np.asarray(m["distances"]).tolist(),
            "coords": np.asarray(m["coords"]).tolist(),
        }

    return ComparisonReport(
        corpus_summary={
            **fingerprint,
            "kept_docs": int(np.asarray(corpus.kept_mask).sum()),
            "preprocess_config": corpus.config.to_dict(),
        },
        plsa={
            "topics": plsa_topics.to_json(),
            "coherence": plsa_coh.to_json(),
            "run": plsa_run.to_json(),
            "n_topics": model.k,
            "intertopic_map": map_json(plsa_map),
            "dominant_topics": plsa_hist,
        },
        clusterpipe={
            "topics": cl_topics.to_json(),
            "coherence": cl_coh.to_json(),
            "run": cl_run.to_json(),
            "n_topics": assignment.n_clusters,
            "outlier_fraction": cl_topics.outlier_fraction,
            "intertopic_map": map_json(cl_map),
            "dominant_topics": cl_hist,
        },
        notes=notes,
    )


def render_text(report):
    """Fixed-width plain-text tables mirroring the JSON report."""
    obj = report.to_json() if hasattr(report, "to_json") else report
    lines = []
    add = lines.append
    corp = obj["corpus"]
    add("TOPIC MODEL COMPARISON")
    add("=" * 70)
    add("corpus: %d docs (%d kept), vocabulary %d terms"
        % (corp["n_docs"], corp["kept_docs"], corp["vocab_size"]))
    add("fingerprint: %s" % corp["content_hash"][:16])
    add("")
    for name in ("clusterpipe", "plsa"):
        m = obj["models"][name]
        add("%s: top words per topic" % name.upper())
        add("-" * 70)
        for t in m["topics"]["topics"]:
            words = ", ".join(w["term"] for w in t["words"])
            add("  topic %-3d (%4d docs)  %s" % (t["id"], t["size"], words))
        add("")
    add("SUMMARY")
    add("-" * 70)
    add("%-14s %10s %10s %12s %10s" % ("model", "n_topics", "mean C_v",
                                       "runtime (s)", "outliers"))
    for name in ("clusterpipe", "plsa"):
        m = obj["models"][name]
        frac = m.get("outlier_fraction")
        add("%-14s %10d %10.4f %12.2f %10s" % (
            name, m["n_topics"], m["coherence"]["mean"],
            m["run"]["wall_time_seconds"],
            ("%.3f" % frac) if frac is not None else "-",
        ))
    add("")
    if obj.get("notes"):
        add("notes:")
        for n in obj["notes"]:
            add("  - %s" % n)
    return "\n".join(lines) + "\n"


def save_report(report, json_path, text_path=None):
    obj = report.to_json() if hasattr(report, "to_json") else report
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
    if text_path:
        with open(text_path, "w", encoding="utf-8") as fh:
            fh.write(render_text(obj))


def load_report(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
