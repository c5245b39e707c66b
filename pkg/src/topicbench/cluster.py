"""Density-based hierarchical clustering and c-TF-IDF topic words.

The clustering path is the standard density pipeline: core distances,
mutual reachability, Prim minimum spanning tree, single-linkage
hierarchy, condensed tree at min_cluster_size, per-cluster stability and
excess-of-mass selection. Points outside every selected cluster get the
noise label -1. All tie-breaks are by index, so results are fully
deterministic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, DataFormatError


@dataclass
class ClusterParams:
    min_cluster_size: int = 10
    min_samples: int | None = None   # defaults to min_cluster_size
    metric: str = "euclidean"
    selection: str = "excess_of_mass"

    def validate(self):
        if self.min_cluster_size < 2:
            raise ConfigError(
                "min_cluster_size must be >= 2 (got %d)" % self.min_cluster_size
            )
        if self.min_samples is not None and self.min_samples < 1:
            raise ConfigError("min_samples must be >= 1 (got %d)" % self.min_samples)
        if self.metric != "euclidean":
            raise ConfigError("unsupported metric %r" % self.metric)
        if self.selection != "excess_of_mass":
            raise ConfigError("unsupported selection %r" % self.selection)

    @property
    def effective_min_samples(self):
        return self.min_samples if self.min_samples is not None else self.min_cluster_size

    def to_dict(self):
        return {
            "min_cluster_size": self.min_cluster_size,
            "min_samples": self.effective_min_samples,
            "metric": self.metric,
            "selection": self.selection,
        }


@dataclass
class ClusterAssignment:
    labels: np.ndarray              # length N; -1 = noise, clusters by decreasing size
    n_clusters: int
    stability: list                 # per final cluster
    warnings: list = field(default_factory=list)

    def sizes(self):
        return [int((self.labels == c).sum()) for c in range(self.n_clusters)]


@dataclass
class TopicSet:
    topics: list                    # (topic_id, size, [(term, weight), ...])
    outlier_fraction: float
    provenance: str                 # "ctfidf" | "plsa"

    def to_json(self):
        return {
            "provenance": self.provenance,
            "outlier_fraction": self.outlier_fraction,
            "topics": [
                {
                    "id": tid,
                    "size": size,
                    "words": [{"term": t, "weight": w} for t, w in words],
                }
                for tid, size, words in self.topics
            ],
        }

    @classmethod
    def from_json(cls, obj):
        topics = [
            (t["id"], t["size"], [(w["term"], w["weight"]) for w in t["words"]])
            for t in obj["topics"]
        ]
        return cls(
            topics=topics,
            outlier_fraction=obj["outlier_fraction"],
            provenance=obj["provenance"],
        )


def core_distances(dist, min_samples):
    """Distance to each point's min_samples-th nearest neighbor (self excluded)."""
    m = dist.shape[0]
    k = min(min_samples, m - 1)
    srt = np.sort(dist, axis=1)
    return srt[:, k]  # column 0 is the zero self-distance


def mutual_reachability(dist, core):
    return np.maximum(np.maximum.outer(core, core), dist)


def prim_mst(weights):
    """MST edges (u, v, w) of a dense symmetric weight matrix.

    np.argmin picks the lowest index on ties, which fixes the tie-break
    as the smallest (index, index) pair.
    """
    m = weights.shape[0]
    in_tree = np.zeros(m, dtype=bool)
    best = np.full(m, np.inf)
    best_from = np.zeros(m, dtype=np.int64)
    in_tree[0] = True
    best = weights[0].copy()
    best[0] = np.inf
    edges = []
    for _ in range(m - 1):
        v = int(np.argmin(best))
        u = int(best_from[v])
        edges.append((min(u, v), max(u, v), float(best[v])))
        in_tree[v] = True
        best[v] = np.inf
        improve = (weights[v] < best) & ~in_tree
        best_from[improve] = v
        best = np.where(improve, weights[v], best)
    return edges


def single_linkage(edges, m):
    """Merge MST edges in ascending order into a binary dendrogram.

    Returns (children, dist, size) arrays for internal nodes m..2m-2.
    """
    order = sorted(range(len(edges)), key=lambda i: (edges[i][2], edges[i][0], edges[i][1]))
    parent = list(range(2 * m - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    children = np.zeros((m - 1, 2), dtype=np.int64)
    dists = np.zeros(m - 1)
    sizes = np.ones(2 * m - 1, dtype=np.int64)
    nxt = m
    for i in order:
        u, v, w = edges[i]
        a, b = find(u), find(v)
        children[nxt - m] = (a, b)
        dists[nxt - m] = w
        sizes[nxt] = sizes[a] + sizes[b]
        parent[a] = parent[b] = nxt
        nxt += 1
    return children, dists, sizes


def _leaves_under(node, children, m):
    out = []
    stack = [node]
    while stack:
        x = stack.pop()
        if x < m:
            out.append(x)
        else:
            stack.extend(children[x - m])
    return sorted(out)


def condense_tree(children, dists, sizes, m, min_cluster_size):
    """Condensed tree edges (parent_cluster, child, lambda, child_size).

    child < 0 encodes a child cluster id (-1 - cid); child >= 0 is a point.
    Cluster 0 is the root. A child subtree smaller than min_cluster_size
    sheds its points into the parent at the split's lambda.
    """
    root = 2 * m - 2
    relabel = {root: 0}
    next_label = 1
    edges = []
    cluster_children = {0: []}
    cluster_birth = {0: 0.0}
    stack = [root]
    while stack:
        node = stack.pop()
        if node < m:
            continue
        cid = relabel[node]
        left, right = children[node - m]
        d = dists[node - m]
        lam = np.inf if d <= 0 else 1.0 / d
        lsz = sizes[left] if left >= m else 1
        rsz = sizes[right] if right >= m else 1
        big_l = lsz >= min_cluster_size
        big_r = rsz >= min_cluster_size
        if big_l and big_r:
            for ch, csz in ((left, lsz), (right, rsz)):
                new = next_label
                next_label += 1
                relabel[ch] = new
                cluster_children[new] = []
                cluster_children[cid].append(new)
                cluster_birth[new] = lam
                edges.append((cid, -1 - new, lam, int(csz)))
                stack.append(ch)
        elif not big_l and not big_r:
            for p in _leaves_under(left, children, m):
                edges.append((cid, p, lam, 1))
            for p in _leaves_under(right, children, m):
                edges.append((cid, p, lam, 1))
        else:
            big, small = (left, right) if big_l else (right, left)
            relabel[big] = cid
            for p in _leaves_under(small, children, m):
                edges.append((cid, p, lam, 1))
            stack.append(big)
    return edges, cluster_children, cluster_birth


def cluster_stabilities(edges, cluster_birth):
    """stability(c) = sum over members leaving c of (lambda_leave - lambda_birth)."""
    stab = {c: 0.0 for c in cluster_birth}
    for parent, child, lam, size in edges:
        birth = cluster_birth[parent]
        if np.isinf(lam) and np.isinf(birth):
            continue
        stab[parent] += (lam - birth) * size
    return stab


def excess_of_mass_selection(cluster_children, stab):
    """Pick the clusters maximizing summed stability, never the root --
    unless the root is the only cluster (all points merged at one scale)."""
    clusters = sorted(cluster_children)
    if clusters == [0]:
        return {0}
    chosen = {}
    subtree = {}
    for c in reversed(clusters):
        kids = cluster_children[c]
        kid_sum = sum(subtree[k] for k in kids)
        if c == 0:
            chosen[c] = False
            subtree[c] = kid_sum
        elif not kids or stab[c] >= kid_sum:
            chosen[c] = True
            subtree[c] = stab[c]
        else:
            chosen[c] = False
            subtree[c] = kid_sum
    # a chosen cluster with a chosen ancestor yields to the ancestor
    selected = set()
    stack = [(0, False)]
    while stack:
        c, covered = stack.pop()
        take = chosen.get(c, False) and not covered
        if take:
            selected.add(c)
        for k in cluster_children[c]:
            stack.append((k, covered or take))
    return selected


def hdbscan_fit(emb, params, kept_mask=None):
    """Cluster the unmasked embedding rows; masked rows are always noise."""
    params.validate()
    x = emb.vectors
    n = x.shape[0]
    if kept_mask is None:
        kept_mask = np.ones(n, dtype=bool)
    kept_mask = np.asarray(kept_mask, dtype=bool)
    active = np.flatnonzero(kept_mask)
    m = len(active)
    labels = np.full(n, -1, dtype=np.int64)
    if m < params.min_cluster_size:
        return ClusterAssignment(
            labels=labels, n_clusters=0, stability=[],
            warnings=["only %d unmasked points < min_cluster_size %d; all noise"
                      % (m, params.min_cluster_size)],
        )

    pts = x[active]
    dist = cdist(pts, pts, metric="euclidean")
    core = core_distances(dist, params.effective_min_samples)
    mreach = mutual_reachability(dist, core)
    np.fill_diagonal(mreach, 0.0)
    edges = prim_mst(mreach)
    children, dists, sizes = single_linkage(edges, m)
    cedges, cluster_children, cluster_birth = condense_tree(
        children, dists, sizes, m, params.min_cluster_size
    )
    stab = cluster_stabilities(cedges, cluster_birth)
    selected = excess_of_mass_selection(cluster_children, stab)

    # point -> owning condensed cluster, then up to the nearest selected one
    point_cluster = {}
    cluster_parent = {}
    for parent, child, _lam, _size in cedges:
        if child >= 0:
            point_cluster[child] = parent
        else:
            cluster_parent[-1 - child] = parent
    raw = np.full(m, -1, dtype=np.int64)
    for p in range(m):
        c = point_cluster.get(p)
        while c is not None:
            if c in selected:
                raw[p] = c
                break
            c = cluster_parent.get(c)

    # renumber selected clusters 0..C-1 by decreasing size (then cluster id)
    sizes_by_cluster = {c: int((raw == c).sum()) for c in selected}
    final = [c for c in selected if sizes_by_cluster[c] > 0]
    final.sort(key=lambda c: (-sizes_by_cluster[c], c))
    remap = {c: i for i, c in enumerate(final)}
    for p in range(m):
        if raw[p] >= 0:
            labels[active[p]] = remap[raw[p]]
    stability = [float(stab[c]) for c in final]
    return ClusterAssignment(
        labels=labels, n_clusters=len(final), stability=stability, warnings=[],
    )


def c_tf_idf(counts, labels):
    """Class-based TF-IDF weights, one row per cluster.

    Per-class counts tf are normalized within the class; the idf factor is
    log(1 + A/f_t) with f_t the term's total count over all classes and A
    the mean per-class token total. Noise documents never contribute.
    """
    labels = np.asarray(labels)
    classes = np.unique(labels[labels >= 0])
    if len(classes) == 0:
        raise DataFormatError("no non-noise classes to compute c-TF-IDF over")
    v = counts.shape[1]
    c = int(classes.max()) + 1
    tf = np.zeros((c, v))
    counts = counts.tocsr()
    warnings = []
    for ci in range(c):
        member = np.flatnonzero(labels == ci)
        if len(member):
            tf[ci] = np.asarray(counts[member].sum(axis=0), dtype=np.float64).ravel()
    totals = tf.sum(axis=1)
    tf_hat = np.zeros_like(tf)
    for ci in range(c):
        if totals[ci] > 0:
            tf_hat[ci] = tf[ci] / totals[ci]
        else:
            warnings.append("class %d has zero tokens" % ci)
    f_t = tf.sum(axis=0)
    a = totals.mean()
    idf = np.zeros(v)
    nz = f_t > 0
    idf[nz] = np.log1p(a / f_t[nz])
    return tf_hat * idf, warnings


def top_words_per_cluster(weights, vocab, labels, n=10, kept_mask=None):
    """TopicSet with each cluster's n highest-weight terms (nonzero only)."""
    labels = np.asarray(labels)
    if kept_mask is None:
        kept_mask = np.ones(len(labels), dtype=bool)
    kept_mask = np.asarray(kept_mask, dtype=bool)
    n_unmasked = int(kept_mask.sum())
    noise = int(((labels == -1) & kept_mask).sum())
    topics = []
    for ci in range(weights.shape[0]):
        row = weights[ci]
        nzj = np.flatnonzero(row > 0)
        order = sorted(nzj, key=lambda j: (-row[j], vocab.terms[j]))
        words = [(vocab.terms[j], float(row[j])) for j in order[:n]]
        size = int((labels == ci).sum())
        topics.append((ci, size, words))
    topics.sort(key=lambda t: (-t[1], t[0]))
    topics = [(i, size, words) for i, (_, size, words) in enumerate(topics)]
    frac = noise / n_unmasked if n_unmasked else 0.0
    return TopicSet(topics=topics, outlier_fraction=float(frac), provenance="ctfidf")


def save_topics(topic_set, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(topic_set.to_json(), fh, indent=2)


def load_topics(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError("%s: not valid topics JSON: %s" % (path, exc)) from exc
    try:
        return TopicSet.from_json(obj)
    except (KeyError, TypeError) as exc:
        raise DataFormatError("%s: missing topics field %s" % (path, exc)) from exc
