"""Seeded synthetic incident-narrative corpora with planted topics.

Used for the bundled fixtures and for tests: each document is generated
from one of a handful of disjoint aviation-style word pools plus a small
shared background vocabulary, so topic structure is known by construction.
"""
from __future__ import annotations

import json

import numpy as np

from .corpus import RawDocument

TOPIC_POOLS = [
    ["engine", "power", "cylinder", "oil", "exhaust", "throttle", "rpm",
     "compression", "magneto", "carburetor", "piston", "valve"],
    ["runway", "landing", "gear", "brake", "touchdown", "flare", "tire",
     "centerline", "taxiway", "rollout", "veered", "overrun"],
    ["fuel", "tank", "pump", "selector", "gallons", "starvation", "mixture",
     "exhaustion", "vent", "line", "contamination", "quantity"],
    ["wind", "gust", "weather", "visibility", "cloud", "turbulence", "icing",
     "crosswind", "ceiling", "fog", "precipitation", "thermal"],
    ["rotor", "helicopter", "hover", "collective", "tail", "autorotation",
     "blade", "skid", "cyclic", "torque", "pedal", "downwash"],
]

BACKGROUND = ["pilot", "airplane", "flight", "reported", "during", "airport"]

STOPWORDS = [
    "the", "and", "of", "a", "an", "to", "in", "on", "was", "were", "is",
    "at", "that", "with", "for", "it", "his", "her", "had", "from", "by",
]


def make_documents(n_docs=500, n_topics=5, doc_len=60, seed=0,
                   background_rate=0.15):
    """Generate documents with a known planted topic per document.

    Returns (documents, true_topics). Topic assignment cycles through the
    pools so every planted topic gets n_docs // n_topics documents.
    """
    if n_topics > len(TOPIC_POOLS):
        raise ValueError("at most %d planted topics" % len(TOPIC_POOLS))
    rng = np.random.default_rng(seed)
    docs = []
    true_topics = []
    for i in range(n_docs):
        z = i % n_topics
        pool = TOPIC_POOLS[z]
        # peaked within-pool distribution so top words are stable
        weights = 1.0 / (1.0 + np.arange(len(pool)))
        weights /= weights.sum()
        words = []
        for _ in range(doc_len):
            if rng.random() < background_rate:
                words.append(BACKGROUND[int(rng.integers(len(BACKGROUND)))])
            else:
                words.append(pool[int(rng.choice(len(pool), p=weights))])
        stuffing = rng.choice(STOPWORDS, size=doc_len // 4)
        order = rng.permutation(len(words))
        text = " ".join(list(np.array(words)[order]) + list(stuffing))
        docs.append(RawDocument(id="syn-%04d" % i, text=text,
                                meta={"planted_topic": str(z)}))
        true_topics.append(z)
    return docs, true_topics


def write_jsonl(docs, path, text_field="narrative"):
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            obj = {"id": d.id, text_field: d.text}
            obj.update(d.meta)
            fh.write(json.dumps(obj) + "\n")


def sample_counts(word_given_topic, n_docs, tokens_per_doc, seed=0,
                  topic_assignment=None):
    """Draw a document-term count matrix from known topic-word distributions.

    Each document is assigned one topic (cycling unless given) and its
    tokens are a multinomial draw from that topic's distribution.
    """
    k, v = word_given_topic.shape
    rng = np.random.default_rng(seed)
    counts = np.zeros((n_docs, v), dtype=np.int64)
    topics = []
    for d in range(n_docs):
        z = topic_assignment[d] if topic_assignment is not None else d % k
        counts[d] = rng.multinomial(tokens_per_doc, word_given_topic[z])
        topics.append(z)
    return counts, topics
