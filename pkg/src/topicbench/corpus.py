"""JSONL ingestion and deterministic corpus preprocessing.

Turns raw narrative records into token sequences, a lexicographically
sorted vocabulary, and a sparse document-term count matrix. Everything
here is pure and deterministic: the same input files and config always
produce a byte-identical corpus.
"""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DataFormatError

CACHE_FORMAT = "topicbench-corpus"
CACHE_VERSION = 1

_VOWELS = set("aeiouy")


@dataclass
class RawDocument:
    id: str
    text: str
    meta: dict = field(default_factory=dict)


@dataclass
class PreprocessConfig:
    lowercase: bool = True
    stopword_path: str | None = None
    normalizer: str = "suffix_stemmer"  # none | suffix_stemmer | lemma_lexicon
    lemma_path: str | None = None
    min_token_len: int = 2
    min_df: int = 5
    max_df_ratio: float = 0.5

    def validate(self):
        if self.min_df < 1:
            raise ConfigError("min_df must be >= 1 (got %d)" % self.min_df)
        if not (0.0 < self.max_df_ratio <= 1.0):
            raise ConfigError(
                "max_df_ratio must lie in (0, 1] (got %g)" % self.max_df_ratio
            )
        if self.min_token_len < 1:
            raise ConfigError(
                "min_token_len must be >= 1 (got %d)" % self.min_token_len
            )
        if self.normalizer not in ("none", "suffix_stemmer", "lemma_lexicon"):
            raise ConfigError("unknown normalizer %r" % self.normalizer)

    def to_dict(self):
        return {
            "lowercase": self.lowercase,
            "stopword_path": self.stopword_path,
            "normalizer": self.normalizer,
            "lemma_path": self.lemma_path,
            "min_token_len": self.min_token_len,
            "min_df": self.min_df,
            "max_df_ratio": self.max_df_ratio,
        }


@dataclass
class Vocabulary:
    terms: list
    index: dict

    @classmethod
    def from_terms(cls, terms):
        terms = list(terms)
        return cls(terms=terms, index={t: i for i, t in enumerate(terms)})

    def __len__(self):
        return len(self.terms)


@dataclass
class Corpus:
    docs: list                 # RawDocument, input order
    token_seqs: list           # per-doc token list after preprocessing
    vocab: Vocabulary
    counts: sp.csr_matrix      # N x V nonnegative integer counts
    kept_mask: np.ndarray      # False for docs with an all-zero count row
    config: PreprocessConfig
    warnings: list = field(default_factory=list)

    @property
    def n_docs(self):
        return len(self.docs)

    def fingerprint(self):
        """Stable content hash over vocabulary, counts and token sequences."""
        h = hashlib.sha256()
        for t in self.vocab.terms:
            h.update(t.encode("utf-8"))
            h.update(b"\x00")
        coo = self.counts.tocoo()
        h.update(np.asarray(coo.row, dtype="<i8").tobytes())
        h.update(np.asarray(coo.col, dtype="<i8").tobytes())
        h.update(np.asarray(coo.data, dtype="<i8").tobytes())
        for seq in self.token_seqs:
            h.update(("\x1f".join(seq)).encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()


def load_jsonl(path, text_field="narrative"):
    """Read one RawDocument per JSONL line.

    Returns (documents, warnings). A line without the text field yields a
    document with empty text plus a warning; malformed JSON raises
    DataFormatError naming the line number.
    """
    docs = []
    warnings = []
    seen_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(
                    "%s: malformed JSON on line %d: %s" % (path, lineno, exc)
                ) from exc
            if not isinstance(obj, dict):
                raise DataFormatError(
                    "%s: line %d is not a JSON object" % (path, lineno)
                )
            doc_id = str(obj.get("id", "")) or "doc-%d" % lineno
            if doc_id in seen_ids:
                raise DataFormatError(
                    "%s: duplicate document id %r on line %d" % (path, doc_id, lineno)
                )
            seen_ids.add(doc_id)
            if text_field in obj:
                text = str(obj[text_field])
            else:
                text = ""
                warnings.append(
                    "line %d (%s): missing text field %r" % (lineno, doc_id, text_field)
                )
            meta = {
                k: str(v) for k, v in obj.items() if k not in ("id", text_field)
            }
            docs.append(RawDocument(id=doc_id, text=text, meta=meta))
    return docs, warnings


def load_stopwords(path):
    """One lowercase word per line; '#' starts a comment."""
    words = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                words.add(line)
    return words


def load_lemma_lexicon(path):
    """Tab-separated surface<TAB>lemma pairs."""
    lex = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataFormatError(
                    "%s: line %d is not surface<TAB>lemma" % (path, lineno)
                )
            lex[parts[0]] = parts[1]
    return lex


def tokenize(text):
    """Split on non-alphanumeric boundaries (character scan, no regex)."""
    tokens = []
    cur = []
    for ch in text:
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            tokens.append("".join(cur))
            cur = []
    if cur:
        tokens.append("".join(cur))
    return tokens


def _has_vowel(s):
    return any(c in _VOWELS for c in s)


def _undouble(s):
    # stopp -> stop; double l/s/z kept (fall, pass, buzz stay intact)
    if len(s) >= 2 and s[-1] == s[-2] and s[-1] not in _VOWELS and s[-1] not in "lsz":
        return s[:-1]
    return s


def stem(word):
    """Deterministic rule-based suffix stripping (Porter-style, abridged).

    Rules fire in order; each keeps a stem of at least three characters.
    """
    w = word
    if len(w) > 3:
        if w.endswith("sses"):
            w = w[:-2]
        elif w.endswith("ies"):
            w = w[:-3] + "i"
        elif w.endswith("ss"):
            pass
        elif w.endswith("s"):
            w = w[:-1]
    if len(w) > 4 and w.endswith("eed"):
        w = w[:-1]
    elif len(w) > 4 and w.endswith("ed") and _has_vowel(w[:-2]):
        w = _undouble(w[:-2])
    elif len(w) > 5 and w.endswith("ing") and _has_vowel(w[:-3]):
        w = _undouble(w[:-3])
    if len(w) > 4 and w.endswith("ly"):
        w = w[:-2]
    if len(w) > 4 and w.endswith("e"):
        w = w[:-1]
    return w


def preprocess(text, config, stopwords, lemma_lexicon=None):
    """Tokenize, case-fold, filter, then normalize one document's text.

    Pure function; order of surviving tokens is preserved.
    """
    tokens = tokenize(text)
    if config.lowercase:
        tokens = [t.lower() for t in tokens]
    tokens = [
        t for t in tokens
        if len(t) >= config.min_token_len and t not in stopwords
    ]
    if config.normalizer == "suffix_stemmer":
        tokens = [stem(t) for t in tokens]
    elif config.normalizer == "lemma_lexicon":
        lex = lemma_lexicon or {}
        tokens = [lex.get(t, t) for t in tokens]
    return tokens


def build_vocabulary(token_seqs, config):
    """Terms with min_df <= df <= max_df_ratio * N, sorted lexicographically."""
    n = len(token_seqs)
    if n == 0:
        raise DataFormatError("cannot build a vocabulary from zero documents")
    df = {}
    for seq in token_seqs:
        for t in set(seq):
            df[t] = df.get(t, 0) + 1
    max_df = config.max_df_ratio * n
    terms = sorted(t for t, d in df.items() if config.min_df <= d <= max_df)
    if not terms:
        raise DataFormatError(
            "vocabulary is empty after document-frequency filtering; "
            "relax min_df (%d) or max_df_ratio (%g)"
            % (config.min_df, config.max_df_ratio)
        )
    return Vocabulary.from_terms(terms)


def build_doc_term_matrix(token_seqs, vocab):
    """Sparse N x V counts plus a mask marking docs with no in-vocab tokens."""
    indptr = [0]
    indices = []
    data = []
    for seq in token_seqs:
        counts = {}
        for tok in seq:
            j = vocab.index.get(tok)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        for j in sorted(counts):
            indices.append(j)
            data.append(counts[j])
        indptr.append(len(indices))
    mat = sp.csr_matrix(
        (np.asarray(data, dtype=np.int64),
         np.asarray(indices, dtype=np.int64),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(token_seqs), len(vocab)),
    )
    kept = np.diff(mat.indptr) > 0
    return mat, kept


def build_corpus(docs, config, stopwords=None, lemma_lexicon=None, threads=1):
    """Preprocess documents and assemble the full Corpus.

    threads > 1 runs per-document preprocessing in a thread pool; results
    are assembled in input order so output is independent of thread count.
    """
    config.validate()
    if stopwords is None:
        stopwords = load_stopwords(config.stopword_path) if config.stopword_path else set()
    if lemma_lexicon is None and config.normalizer == "lemma_lexicon":
        if config.lemma_path is None:
            raise ConfigError("normalizer=lemma_lexicon requires lemma_path")
        lemma_lexicon = load_lemma_lexicon(config.lemma_path)

    def work(doc):
        return preprocess(doc.text, config, stopwords, lemma_lexicon)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            token_seqs = list(pool.map(work, docs))
    else:
        token_seqs = [work(d) for d in docs]

    warnings = []
    vocab = build_vocabulary(token_seqs, config)
    counts, kept = build_doc_term_matrix(token_seqs, vocab)
    n_empty = int((~kept).sum())
    if n_empty:
        warnings.append("%d document(s) have no in-vocabulary tokens" % n_empty)
    return Corpus(
        docs=list(docs), token_seqs=token_seqs, vocab=vocab,
        counts=counts, kept_mask=kept, config=config, warnings=warnings,
    )


def save_corpus(corpus, out_dir):
    """Write the versioned on-disk corpus cache (a directory)."""
    os.makedirs(out_dir, exist_ok=True)
    meta = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "n_docs": corpus.n_docs,
        "vocab_size": len(corpus.vocab),
        "config": corpus.config.to_dict(),
        "warnings": corpus.warnings,
        "fingerprint": corpus.fingerprint(),
    }
    with open(os.path.join(out_dir, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    with open(os.path.join(out_dir, "vocab.txt"), "w", encoding="utf-8") as fh:
        for t in corpus.vocab.terms:
            fh.write(t + "\n")
    sp.save_npz(os.path.join(out_dir, "counts.npz"), corpus.counts)
    np.save(os.path.join(out_dir, "kept.npy"), corpus.kept_mask)
    with open(os.path.join(out_dir, "tokens.jsonl"), "w", encoding="utf-8") as fh:
        for seq in corpus.token_seqs:
            fh.write(json.dumps(seq) + "\n")
    with open(os.path.join(out_dir, "docs.jsonl"), "w", encoding="utf-8") as fh:
        for d in corpus.docs:
            fh.write(json.dumps({"id": d.id, "text": d.text, "meta": d.meta}) + "\n")


def load_corpus(cache_dir):
    """Read a corpus cache written by save_corpus."""
    meta_path = os.path.join(cache_dir, "meta.json")
    if not os.path.isdir(cache_dir) or not os.path.exists(meta_path):
        raise DataFormatError("%s is not a corpus cache directory" % cache_dir)
    with open(meta_path, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta.get("format") != CACHE_FORMAT:
        raise DataFormatError("%s: unknown cache format %r" % (cache_dir, meta.get("format")))
    if meta.get("version") != CACHE_VERSION:
        raise DataFormatError(
            "%s: cache version %r not supported" % (cache_dir, meta.get("version"))
        )
    with open(os.path.join(cache_dir, "vocab.txt"), "r", encoding="utf-8") as fh:
        terms = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
    vocab = Vocabulary.from_terms(terms)
    counts = sp.load_npz(os.path.join(cache_dir, "counts.npz")).tocsr()
    kept = np.load(os.path.join(cache_dir, "kept.npy"))
    token_seqs = []
    with open(os.path.join(cache_dir, "tokens.jsonl"), "r", encoding="utf-8") as fh:
        for line in fh:
            token_seqs.append(json.loads(line))
    docs = []
    with open(os.path.join(cache_dir, "docs.jsonl"), "r", encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            docs.append(RawDocument(id=obj["id"], text=obj["text"], meta=obj["meta"]))
    cfg = PreprocessConfig(**meta["config"])
    return Corpus(
        docs=docs, token_seqs=token_seqs, vocab=vocab, counts=counts,
        kept_mask=kept, config=cfg, warnings=list(meta.get("warnings", [])),
    )
