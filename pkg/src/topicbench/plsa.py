"""Asymmetric PLSA fit by expectation-maximization.

The model keeps P(w|z) (topic-word), P(z|d) (document-topic) and a fixed
document prior P(d) proportional to each document's token mass. The
responsibilities P(z|d,w) exist only transiently inside one EM sweep and
only at nonzero count cells.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataFormatError

EPS = 1e-12
SNAPSHOT_MAGIC = b"PLSA1\n"


@dataclass
class PlsaConfig:
    k: int = 6
    max_iters: int = 200
    tol: float = 1e-6
    seed: int = 0
    restarts: int = 1

    def validate(self):
        if self.k < 1:
            raise ConfigError("k must be >= 1 (got %d)" % self.k)
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1 (got %d)" % self.max_iters)
        if self.tol <= 0:
            raise ConfigError("tol must be > 0 (got %g)" % self.tol)
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1 (got %d)" % self.restarts)

    def to_dict(self):
        return {
            "k": self.k, "max_iters": self.max_iters, "tol": self.tol,
            "seed": self.seed, "restarts": self.restarts,
        }


@dataclass
class PlsaModel:
    word_given_topic: np.ndarray   # K x V, rows sum to 1
    topic_given_doc: np.ndarray    # N x K, rows sum to 1
    doc_prior: np.ndarray          # N, sums to 1
    ll_trace: list = field(default_factory=list)
    config: PlsaConfig | None = None

    @property
    def k(self):
        return self.word_given_topic.shape[0]


def _nonzero_triplets(counts):
    coo = counts.tocoo()
    return (
        np.asarray(coo.row, dtype=np.int64),
        np.asarray(coo.col, dtype=np.int64),
        np.asarray(coo.data, dtype=np.float64),
    )


def plsa_init(config, n_docs, vocab_size, counts):
    """Seeded random row-stochastic starting point; P(d) from token mass."""
    config.validate()
    rowsum = np.asarray(counts.sum(axis=1), dtype=np.float64).ravel()
    total = rowsum.sum()
    if total <= 0:
        raise DataFormatError("count matrix is all zero; cannot initialize PLSA")
    rng = np.random.default_rng(config.seed)
    phi = rng.uniform(0.1, 1.0, size=(config.k, vocab_size))
    phi /= phi.sum(axis=1, keepdims=True)
    theta = rng.uniform(0.1, 1.0, size=(n_docs, config.k))
    theta /= theta.sum(axis=1, keepdims=True)
    if config.k == 1:
        theta[:] = 1.0
    prior = rowsum / total
    return PlsaModel(
        word_given_topic=phi, topic_given_doc=theta,
        doc_prior=prior, ll_trace=[], config=config,
    )


def plsa_iterate(model, counts):
    """One EM sweep; returns (updated model, post-update log-likelihood)."""
    rows, cols, n = _nonzero_triplets(counts)
    K = model.k
    N, V = model.topic_given_doc.shape[0], model.word_given_topic.shape[1]

    # E-step at nonzero cells: r(z|d,w) prop P(w|z) P(z|d)
    joint = model.topic_given_doc[rows] * model.word_given_topic[:, cols].T  # nnz x K
    denom = joint.sum(axis=1)
    denom = np.where(denom > 0, denom, 1.0)
    resp = joint / denom[:, None]
    weighted = resp * n[:, None]

    # M-step with additive floor so no row normalizes over zero mass
    phi = np.empty((K, V))
    theta = np.empty((N, K))
    for z in range(K):
        phi[z] = np.bincount(cols, weights=weighted[:, z], minlength=V)
        theta[:, z] = np.bincount(rows, weights=weighted[:, z], minlength=N)
    phi += EPS
    phi /= phi.sum(axis=1, keepdims=True)
    theta += EPS
    theta /= theta.sum(axis=1, keepdims=True)

    new_model = PlsaModel(
        word_given_topic=phi, topic_given_doc=theta,
        doc_prior=model.doc_prior, ll_trace=list(model.ll_trace),
        config=model.config,
    )
    ll = log_likelihood(new_model, counts, triplets=(rows, cols, n))
    return new_model, ll


def log_likelihood(model, counts, triplets=None):
    """L = sum_{d,w} n(d,w) log( P(d) sum_z P(z|d) P(w|z) )."""
    if triplets is None:
        triplets = _nonzero_triplets(counts)
    rows, cols, n = triplets
    mix = np.einsum(
        "ik,ik->i", model.topic_given_doc[rows], model.word_given_topic[:, cols].T
    )
    return float(np.sum(n * (np.log(mix) + np.log(model.doc_prior[rows]))))


def plsa_fit(counts, config):
    """EM until relative log-likelihood improvement < tol or max_iters.

    With restarts > 1 the restart with the highest final likelihood wins;
    restart r uses seed stream (seed, r) so runs are fully reproducible.
    """
    config.validate()
    n_docs, vocab_size = counts.shape
    best = None
    for r in range(config.restarts):
        sub = PlsaConfig(
            k=config.k, max_iters=config.max_iters, tol=config.tol,
            seed=config.seed if config.restarts == 1 else None, restarts=1,
        )
        if sub.seed is None:
            sub.seed = int(np.random.default_rng([config.seed, r]).integers(2**31))
        model = plsa_init(sub, n_docs, vocab_size, counts)
        prev = None
        for _ in range(config.max_iters):
            model, ll = plsa_iterate(model, counts)
            model.ll_trace.append(ll)
            if prev is not None and (ll - prev) < config.tol * abs(prev):
                break
            prev = ll
        model.config = config
        if best is None or model.ll_trace[-1] > best.ll_trace[-1]:
            best = model
    return best


def plsa_top_words(model, topic, n, vocab):
    """n highest-P(w|z) terms for one topic; ties broken lexicographically."""
    if not (0 <= topic < model.k):
        raise ConfigError("topic index %d out of range" % topic)
    row = model.word_given_topic[topic]
    order = sorted(range(len(vocab.terms)), key=lambda j: (-row[j], vocab.terms[j]))
    return [(vocab.terms[j], float(row[j])) for j in order[:n]]


def plsa_dominant_topics(model, kept_mask=None):
    """Histogram of argmax-topic assignments over kept documents."""
    theta = model.topic_given_doc
    if kept_mask is not None:
        theta = theta[np.asarray(kept_mask, dtype=bool)]
    assign = np.argmax(theta, axis=1)  # lowest index wins ties
    return np.bincount(assign, minlength=model.k)


def save_model(model, path):
    """Versioned binary snapshot: JSON header + little-endian float64 blocks."""
    K, V = model.word_given_topic.shape
    N = model.topic_given_doc.shape[0]
    header = {
        "k": K, "vocab_size": V, "n_docs": N,
        "config": model.config.to_dict() if model.config else None,
        "ll_trace": list(map(float, model.ll_trace)),
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<I", len(payload)))
        fh.write(payload)
        fh.write(np.ascontiguousarray(model.word_given_topic, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.topic_given_doc, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.doc_prior, dtype="<f8").tobytes())


def load_model(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(SNAPSHOT_MAGIC))
        if magic != SNAPSHOT_MAGIC:
            raise DataFormatError("%s: not a PLSA model snapshot" % path)
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        K, V, N = header["k"], header["vocab_size"], header["n_docs"]
        body = fh.read()
    need = 8 * (K * V + N * K + N)
    if len(body) != need:
        raise DataFormatError(
            "%s: truncated snapshot (%d bytes, expected %d)" % (path, len(body), need)
        )
    buf = np.frombuffer(body, dtype="<f8")
    phi = buf[: K * V].reshape(K, V).copy()
    theta = buf[K * V: K * V + N * K].reshape(N, K).copy()
    prior = buf[K * V + N * K:].copy()
    cfg = PlsaConfig(**header["config"]) if header.get("config") else None
    return PlsaModel(
        word_given_topic=phi, topic_given_doc=theta, doc_prior=prior,
        ll_trace=list(header.get("ll_trace", [])), config=cfg,
    )
