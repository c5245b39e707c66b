"""Corpus encoding and EMB1 serialization."""
from __future__ import annotations

import hashlib
import json
import struct
import sys
from datetime import datetime, timezone

import numpy as np

EMB1_MAGIC = b"EMB1"
DEFAULT_MODEL = "all-MiniLM-L6-v2"


class ExportError(Exception):
    pass


def read_corpus(path, text_field="narrative"):
    """One text per JSONL line, in line order; missing field -> empty text."""
    texts = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExportError("%s: bad JSON on line %d: %s" % (path, lineno, exc))
            texts.append(str(obj.get(text_field, "")))
    return texts


def hashing_encoder(dim):
    """Deterministic feature-hashing bag-of-words encoder (offline fallback).

    Identical texts map to identical vectors, so duplicated corpus lines
    stay nearest neighbors; useful for tests and air-gapped machines.
    """
    def encode(texts):
        out = np.zeros((len(texts), dim), dtype=np.float32)
        for i, text in enumerate(texts):
            for tok in text.lower().split():
                digest = hashlib.sha256(tok.encode("utf-8")).digest()
                bucket = int.from_bytes(digest[:4], "little") % dim
                sign = 1.0 if digest[4] % 2 == 0 else -1.0
                out[i, bucket] += sign
            norm = np.linalg.norm(out[i])
            if norm > 0:
                out[i] /= norm
        return out
    return encode


def load_encoder(model_name):
    """Return (encode_fn, dim). 'hashing:<dim>' never touches the network."""
    if model_name.startswith("hashing:"):
        dim = int(model_name.split(":", 1)[1])
        if dim < 1:
            raise ExportError("hashing dimension must be >= 1")
        return hashing_encoder(dim), dim
    try:
        from sentence_transformers import SentenceTransformer
    except ImportError as exc:
        raise ExportError(
            "sentence-transformers is not installed; install it or use the "
            "hashing:<dim> model (%s)" % exc)
    try:
        model = SentenceTransformer(model_name)
    except Exception as exc:
        raise ExportError("could not load model %r: %s" % (model_name, exc))
    dim = model.get_sentence_embedding_dimension()

    def encode(texts):
        return np.asarray(
            model.encode(texts, batch_size=64, show_progress_bar=False),
            dtype=np.float32)
    return encode, dim


def write_emb1(vectors, path):
    arr = np.ascontiguousarray(vectors, dtype="<f4")
    n, d = arr.shape
    with open(path, "wb") as fh:
        fh.write(EMB1_MAGIC)
        fh.write(struct.pack("<II", n, d))
        fh.write(arr.tobytes())


def corpus_hash(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def export(corpus_path, text_field, model_name, out_path):
    """Encode the corpus and write EMB1 + manifest; returns the manifest."""
    texts = read_corpus(corpus_path, text_field)
    if not texts:
        raise ExportError("%s contains no documents" % corpus_path)
    encode, dim = load_encoder(model_name)
    n_empty = sum(1 for t in texts if not t.strip())
    if n_empty:
        print("warning: %d empty-text document(s) get zero vectors" % n_empty,
              file=sys.stderr)
    vectors = encode(texts)
    for i, t in enumerate(texts):
        if not t.strip():
            vectors[i] = 0.0
    if vectors.shape != (len(texts), dim):
        raise ExportError("encoder returned shape %s, expected (%d, %d)"
                          % (vectors.shape, len(texts), dim))
    write_emb1(vectors, out_path)
    manifest = {
        "model_name": model_name,
        "dim": int(dim),
        "n_docs": len(texts),
        "corpus_sha256": corpus_hash(corpus_path),
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    with open(str(out_path) + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest
