"""C_v topic coherence from boolean sliding-window co-occurrence counts.

A window of fixed length slides over each document's token sequence with
stride 1 (a document shorter than the window is one window). Each window
counts a term and an unordered term pair at most once. Topic scores are
cosine similarities between NPMI context vectors under the one-set
segmentation, averaged per topic and then across topics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ConfigError, DataFormatError


@dataclass
class CoherenceConfig:
    window: int = 110
    top_n: int = 10
    epsilon: float = 1e-12
    gamma: float = 1.0   # exponent on NPMI in context vectors (fixed)

    def validate(self):
        if self.window < 1:
            raise ConfigError("window must be >= 1 (got %d)" % self.window)
        if self.top_n < 2:
            raise ConfigError("top_n must be >= 2 (got %d)" % self.top_n)
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0 (got %g)" % self.epsilon)

    def to_dict(self):
        return {
            "window": self.window, "top_n": self.top_n,
            "epsilon": self.epsilon, "gamma": self.gamma,
        }


@dataclass
class WindowStats:
    n_windows: int
    occur: dict          # term -> window count
    cooccur: dict        # (term_a, term_b) sorted tuple -> window count
    warnings: list = field(default_factory=list)

    def pair(self, a, b):
        if a == b:
            return self.occur.get(a, 0)
        key = (a, b) if a < b else (b, a)
        return self.cooccur.get(key, 0)


@dataclass
class CoherenceReport:
    per_topic: list
    mean: float
    config: CoherenceConfig
    excluded: list = field(default_factory=list)   # topic ids with < 2 present terms
    warnings: list = field(default_factory=list)

    def to_json(self):
        return {
            "metric": "c_v",
            "window": self.config.window,
            "top_n": self.config.top_n,
            "per_topic": self.per_topic,
            "mean": self.mean,
            "excluded_topics": self.excluded,
        }


def window_stats(token_seqs, topic_terms, config):
    """Boolean sliding-window occurrence and pair counts over topic_terms."""
    terms = set(topic_terms)
    w = config.window
    n_windows = 0
    occur = {}
    cooccur = {}
    for seq in token_seqs:
        if not seq:
            continue
        length = len(seq)
        starts = range(1) if length <= w else range(length - w + 1)
        for s in starts:
            present = sorted({t for t in seq[s:s + w] if t in terms})
            n_windows += 1
            for t in present:
                occur[t] = occur.get(t, 0) + 1
            for a, b in combinations(present, 2):
                cooccur[(a, b)] = cooccur.get((a, b), 0) + 1
    return WindowStats(n_windows=n_windows, occur=occur, cooccur=cooccur)


def npmi(a, b, stats, epsilon=1e-12):
    """Normalized pointwise mutual information of an unordered term pair.

    NPMI(t, t) is 1 by definition; a term absent from every window scores
    0 (recorded as a warning by the caller).
    """
    if a == b:
        return 1.0
    if stats.n_windows == 0:
        return 0.0
    pa = stats.occur.get(a, 0) / stats.n_windows
    pb = stats.occur.get(b, 0) / stats.n_windows
    if pa == 0.0 or pb == 0.0:
        return 0.0
    pab = stats.pair(a, b) / stats.n_windows
    num = math.log((pab + epsilon) / (pa * pb))
    den = -math.log(pab + epsilon)
    return num / den


def cv_coherence(topics, token_seqs, config):
    """Score each topic's word set; returns per-topic scores and their mean.

    ``topics`` is a sequence of (topic_id, word list) pairs; a TopicSet is
    accepted directly. A topic with fewer than two corpus-present words is
    excluded from the mean and flagged.
    """
    config.validate()
    pairs = _as_word_lists(topics, config.top_n)
    all_terms = set()
    for _, words in pairs:
        all_terms.update(words)
    stats = window_stats(token_seqs, all_terms, config)

    per_topic = []
    excluded = []
    warnings = []
    for tid, words in pairs:
        present = [t for t in words if stats.occur.get(t, 0) > 0]
        missing = [t for t in words if stats.occur.get(t, 0) == 0]
        if missing:
            warnings.append(
                "topic %s: %d word(s) absent from corpus" % (tid, len(missing))
            )
        if len(present) < 2:
            excluded.append(tid)
            continue
        per_topic.append((tid, _topic_score(present, stats, config)))
    if not per_topic:
        raise DataFormatError("no topic has >= 2 corpus-present words to score")
    scores = [s for _, s in per_topic]
    return CoherenceReport(
        per_topic=scores,
        mean=float(np.mean(scores)),
        config=config,
        excluded=excluded,
        warnings=warnings,
    )


def _topic_score(words, stats, config):
    k = len(words)
    m = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            v = npmi(words[i], words[j], stats, config.epsilon)
            m[i, j] = v if config.gamma == 1.0 else math.copysign(abs(v) ** config.gamma, v)
    v_star = m.sum(axis=0)   # accumulated context vector of the full set
    sims = [_cosine(m[i], v_star) for i in range(k)]
    return float(np.mean(sims))


def _cosine(u, v):
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _as_word_lists(topics, top_n):
    if hasattr(topics, "topics"):   # TopicSet
        return [(tid, [t for t, _ in words[:top_n]]) for tid, _size, words in topics.topics]
    out = []
    for tid, words in topics:
        words = [w[0] if isinstance(w, tuple) else w for w in words]
        out.append((tid, words[:top_n]))
    return out
