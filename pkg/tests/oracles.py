"""Independent reference implementations used only by the test suite.

These are deliberately naive (dense loops, no shared code with the
package) so they can serve as oracles for the production paths.
"""
import math
from itertools import combinations

import numpy as np

EPS = 1e-12


def naive_plsa_sweep(counts, phi, theta, prior):
    """One dense EM sweep over every (d, w) cell; returns (phi, theta, ll)."""
    counts = np.asarray(counts, dtype=float)
    n_docs, vocab = counts.shape
    k = phi.shape[0]
    new_phi = np.zeros_like(phi)
    new_theta = np.zeros_like(theta)
    for d in range(n_docs):
        for w in range(vocab):
            if counts[d, w] == 0:
                continue
            resp = np.array([phi[z, w] * theta[d, z] for z in range(k)])
            s = resp.sum()
            if s > 0:
                resp /= s
            for z in range(k):
                new_phi[z, w] += counts[d, w] * resp[z]
                new_theta[d, z] += counts[d, w] * resp[z]
    new_phi += EPS
    for z in range(k):
        new_phi[z] /= new_phi[z].sum()
    new_theta += EPS
    for d in range(n_docs):
        new_theta[d] /= new_theta[d].sum()
    ll = 0.0
    for d in range(n_docs):
        for w in range(vocab):
            if counts[d, w] == 0:
                continue
            mix = sum(new_theta[d, z] * new_phi[z, w] for z in range(k))
            ll += counts[d, w] * (math.log(mix) + math.log(prior[d]))
    return new_phi, new_theta, ll


def naive_cv(topic_word_lists, token_seqs, window=110, epsilon=1e-12):
    """Direct-loop C_v: boolean windows, NPMI vectors, cosine, one mean."""
    all_terms = set()
    for words in topic_word_lists:
        all_terms.update(words)
    windows = []
    for seq in token_seqs:
        if not seq:
            continue
        if len(seq) <= window:
            spans = [seq]
        else:
            spans = [seq[s:s + window] for s in range(len(seq) - window + 1)]
        for span in spans:
            windows.append({t for t in span if t in all_terms})
    nw = len(windows)
    occur = {t: sum(1 for win in windows if t in win) for t in all_terms}
    co = {}
    for a, b in combinations(sorted(all_terms), 2):
        co[(a, b)] = sum(1 for win in windows if a in win and b in win)

    def npmi(a, b):
        if a == b:
            return 1.0
        pa, pb = occur[a] / nw, occur[b] / nw
        if pa == 0 or pb == 0:
            return 0.0
        key = (a, b) if a < b else (b, a)
        pab = co[key] / nw
        return math.log((pab + epsilon) / (pa * pb)) / (-math.log(pab + epsilon))

    scores = []
    for words in topic_word_lists:
        present = [w for w in words if occur.get(w, 0) > 0]
        if len(present) < 2:
            scores.append(None)
            continue
        k = len(present)
        sims = []
        for i in range(k):
            vi = [npmi(present[i], present[j]) for j in range(k)]
            vs = [sum(npmi(present[m], present[j]) for m in range(k)) for j in range(k)]
            num = sum(x * y for x, y in zip(vi, vs))
            ni = math.sqrt(sum(x * x for x in vi))
            ns = math.sqrt(sum(y * y for y in vs))
            sims.append(num / (ni * ns) if ni > 0 and ns > 0 else 0.0)
        scores.append(sum(sims) / k)
    return scores


def kruskal_mst_weight(weights):
    """Total MST weight by Kruskal over the full edge list."""
    m = weights.shape[0]
    edges = sorted(
        (weights[i, j], i, j) for i in range(m) for j in range(i + 1, m)
    )
    parent = list(range(m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    total = 0.0
    used = 0
    for w, i, j in edges:
        a, b = find(i), find(j)
        if a != b:
            parent[a] = b
            total += w
            used += 1
            if used == m - 1:
                break
    return total


def hand_ctfidf(class_counts):
    """Evaluate the c-TF-IDF formula with plain Python loops.

    class_counts: list of dicts term -> count. Returns dict
    (class, term) -> weight.
    """
    terms = sorted({t for c in class_counts for t in c})
    totals = [sum(c.values()) for c in class_counts]
    a = sum(totals) / len(class_counts)
    f = {t: sum(c.get(t, 0) for c in class_counts) for t in terms}
    out = {}
    for ci, c in enumerate(class_counts):
        for t in terms:
            tf_hat = c.get(t, 0) / totals[ci] if totals[ci] else 0.0
            out[(ci, t)] = tf_hat * math.log(1 + a / f[t]) if f[t] else 0.0
    return out
