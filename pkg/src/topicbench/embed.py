"""Per-document dense vectors: EMB1 file I/O, built-in LSA, PCA reduction.

EMB1 layout (bit-exact): magic b"EMB1", little-endian uint32 n_docs,
little-endian uint32 dim, then n_docs*dim little-endian float32 values in
row-major corpus order. A .csv path is read as a header-free matrix.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DataFormatError

EMB1_MAGIC = b"EMB1"


@dataclass
class EmbeddingMatrix:
    vectors: np.ndarray     # N x D float64
    source: str             # "external" | "lsa"

    @property
    def dim(self):
        return self.vectors.shape[1]

    @property
    def n_docs(self):
        return self.vectors.shape[0]


def write_emb1(vectors, path):
    arr = np.ascontiguousarray(vectors, dtype="<f4")
    n, d = arr.shape
    with open(path, "wb") as fh:
        fh.write(EMB1_MAGIC)
        fh.write(struct.pack("<II", n, d))
        fh.write(arr.tobytes())


def load_embeddings(path, expected_n):
    """Read an EMB1 (or .csv) embedding file and validate it against the corpus."""
    if str(path).endswith(".csv"):
        mat = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    else:
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != EMB1_MAGIC:
                raise DataFormatError("%s: bad magic %r, expected EMB1" % (path, magic))
            head = fh.read(8)
            if len(head) != 8:
                raise DataFormatError("%s: truncated EMB1 header" % path)
            n, d = struct.unpack("<II", head)
            body = fh.read()
        need = 4 * n * d
        if len(body) != need:
            raise DataFormatError(
                "%s: truncated EMB1 payload (%d bytes, expected %d)"
                % (path, len(body), need)
            )
        mat = np.frombuffer(body, dtype="<f4").reshape(n, d).astype(np.float64)
    if mat.shape[0] != expected_n:
        raise DataFormatError(
            "%s: embedding count %d != corpus %d" % (path, mat.shape[0], expected_n)
        )
    bad = ~np.isfinite(mat)
    if bad.any():
        row = int(np.argwhere(bad.any(axis=1))[0][0])
        raise DataFormatError("%s: non-finite value in row %d" % (path, row))
    return EmbeddingMatrix(vectors=mat, source="external")


def tfidf_weight(counts):
    """tf * log(N/df); a term present in every document gets zero weight."""
    counts = counts.tocsr()
    n = counts.shape[0]
    df = np.asarray((counts > 0).sum(axis=0), dtype=np.float64).ravel()
    idf = np.zeros_like(df)
    nz = df > 0
    idf[nz] = np.log(n / df[nz])
    return counts.multiply(idf).tocsr().astype(np.float64)


def randomized_svd(a, k, seed=0, n_iter=4, oversample=10):
    """Rank-k truncated SVD by seeded randomized subspace iteration.

    Sign convention: each left singular vector is flipped so that its
    largest-magnitude entry is positive (right vector flipped to match).
    """
    m, n = a.shape
    if k < 1 or k > min(m, n):
        raise ConfigError("svd rank %d out of range for %dx%d matrix" % (k, m, n))
    p = min(n, k + oversample)
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((n, p))
    q, _ = np.linalg.qr(a @ omega)
    for _ in range(n_iter):
        z, _ = np.linalg.qr(a.T @ q)
        q, _ = np.linalg.qr(a @ z)
    b = q.T @ a
    b = np.asarray(b)
    ub, s, vt = np.linalg.svd(b, full_matrices=False)
    u = q @ ub
    u, s, vt = u[:, :k], s[:k], vt[:k]
    for j in range(k):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
            vt[j] = -vt[j]
    return u, s, vt


def lsa_embed(counts, dim, seed=0):
    """TF-IDF weighted truncated SVD document factors, rows L2-normalized.

    Documents with no in-vocabulary tokens keep an all-zero row.
    """
    n, v = counts.shape
    if dim < 1 or dim > min(n, v):
        raise ConfigError("lsa dim %d out of range for %dx%d counts" % (dim, n, v))
    x = tfidf_weight(counts)
    u, s, _ = randomized_svd(x, dim, seed=seed)
    emb = u * s
    norms = np.linalg.norm(emb, axis=1)
    nz = norms > 1e-15
    emb[nz] /= norms[nz, None]
    emb[~nz] = 0.0
    return EmbeddingMatrix(vectors=emb, source="lsa")


def reduce_pca(emb, r, mask=None, seed=0):
    """Mean-center unmasked rows and project onto the top-r principal axes.

    Masked rows come out all-zero and are ignored when estimating the mean.
    """
    x = emb.vectors
    n, d = x.shape
    if r < 1 or r > d:
        raise ConfigError("pca rank %d out of range for dim %d" % (r, d))
    if mask is None:
        mask = np.ones(n, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    active = x[mask]
    if active.shape[0] == 0:
        raise DataFormatError("no unmasked rows to reduce")
    mean = active.mean(axis=0)
    centered = active - mean
    rank = min(r, active.shape[0])
    _, _, vt = randomized_svd(centered, rank, seed=seed)
    out = np.zeros((n, r))
    out[mask, :rank] = centered @ vt.T
    return EmbeddingMatrix(vectors=out, source=emb.source)
