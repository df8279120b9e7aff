"""Query-constrained extractive summarizers for per-date candidate sets.

All four methods share one eligibility rule: only sentences containing at
least one query keyphrase (case-insensitive substring) may appear in the
output. Ineligible sentences still shape centroids, graphs and clusters.
Every method is deterministic; ties always break on (article_id, index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import vectors
from .vectors import SparseVector, TfidfModel

PAGERANK_DAMPING = 0.85
PAGERANK_TOL = 1e-8
PAGERANK_MAX_ITER = 200

SUBMOD_ALPHA = 6.0
SUBMOD_LAMBDA = 0.3
SUBMOD_CLUSTER_DIVISOR = 5
SUBMOD_LLOYD_ITERS = 10


@dataclass(frozen=True)
class SummaryRequest:
    candidates: tuple
    k: int
    queries: tuple[str, ...]
    model: TfidfModel

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("summary length k must be >= 1")


def is_eligible(sentence, queries) -> bool:
    """Output constraint: the sentence must contain a query keyphrase.
    Multi-word phrases must match contiguously (substring semantics)."""
    if not queries:
        return True
    text = sentence.text.lower()
    return any(q.lower() in text for q in queries)


def _prepared(req: SummaryRequest):
    """Sorted candidates, their vectors, and the eligible index list."""
    cands = sorted(req.candidates, key=lambda s: s.key)
    vecs = [vectors.vectorize(s.tokens, req.model) for s in cands]
    eligible = [i for i, s in enumerate(cands) if is_eligible(s, req.queries)]
    return cands, vecs, eligible


def _similarity_matrix(vecs, n_features) -> np.ndarray:
    """Dense pairwise cosine matrix for unit-norm sparse vectors."""
    n = len(vecs)
    if n == 0:
        return np.zeros((0, 0))
    indptr = [0]
    indices = []
    data = []
    for v in vecs:
        for i, w in v.pairs:
            indices.append(i)
            data.append(w)
        indptr.append(len(indices))
    X = sp.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(n, n_features))
    return np.asarray((X @ X.T).todense())


def summarize_centroid_opt(req: SummaryRequest) -> list:
    """Greedily grow the summary whose mean vector best matches the
    centroid of all candidates; stop early once no sentence improves it."""
    cands, vecs, eligible = _prepared(req)
    if not cands or not eligible:
        return []
    centroid = vectors.mean(vecs)
    chosen: list[int] = []
    running = SparseVector()
    current = 0.0
    while len(chosen) < req.k:
        best_i = None
        best_obj = current
        best_vec = None
        for i in eligible:
            if i in chosen:
                continue
            summed = vectors.add(running, vecs[i])
            obj = vectors.cosine(summed, centroid)
            if obj > best_obj:
                best_i = i
                best_obj = obj
                best_vec = summed
        if best_i is None:
            break
        chosen.append(best_i)
        running = best_vec
        current = best_obj
    return [cands[i] for i in chosen]


def summarize_centroid_rank(req: SummaryRequest) -> list:
    """Top-k eligible sentences by similarity to the candidate centroid."""
    cands, vecs, eligible = _prepared(req)
    if not cands or not eligible:
        return []
    centroid = vectors.mean(vecs)
    scored = [(-vectors.cosine(vecs[i], centroid), cands[i].key, i) for i in eligible]
    scored.sort()
    return [cands[i] for _, _, i in scored[:req.k]]


def _pagerank(S: np.ndarray) -> np.ndarray:
    """Power iteration with uniform teleport. Rows without outgoing weight
    simply leak mass; there is no dangling redistribution."""
    n = S.shape[0]
    if n == 0:
        return np.zeros(0)
    out_sums = S.sum(axis=1)
    P = np.zeros_like(S)
    nonzero = out_sums > 0.0
    P[nonzero] = S[nonzero] / out_sums[nonzero, None]
    rank = np.full(n, 1.0 / n)
    teleport = (1.0 - PAGERANK_DAMPING) / n
    for _ in range(PAGERANK_MAX_ITER):
        updated = teleport + PAGERANK_DAMPING * (P.T @ rank)
        if np.abs(updated - rank).sum() < PAGERANK_TOL:
            rank = updated
            break
        rank = updated
    return rank


def summarize_textrank(req: SummaryRequest) -> list:
    """PageRank over the sentence similarity graph; top-k eligible nodes."""
    cands, vecs, eligible = _prepared(req)
    if not cands or not eligible:
        return []
    S = _similarity_matrix(vecs, req.model.n_features)
    np.fill_diagonal(S, 0.0)
    ranks = _pagerank(S)
    scored = [(-ranks[i], cands[i].key, i) for i in eligible]
    scored.sort()
    return [cands[i] for _, _, i in scored[:req.k]]


def _farthest_first_seeds(S: np.ndarray, n_groups: int) -> list[int]:
    """Deterministic seeding: start from the lowest id, then repeatedly add
    the point farthest from its nearest seed (ties to the lower index)."""
    n = S.shape[0]
    seeds = [0]
    nearest = S[0].copy()
    while len(seeds) < n_groups:
        best, best_sim = None, math.inf
        for i in range(n):
            if i in seeds:
                continue
            if nearest[i] < best_sim:
                best, best_sim = i, nearest[i]
        seeds.append(best)
        nearest = np.maximum(nearest, S[best])
    return seeds


def _diversity_clusters(vecs, S: np.ndarray):
    """Group candidates into ceil(n/5) clusters: farthest-first seeds, then
    a few rounds of mean reassignment. Returns (labels, sim-to-centroid)."""
    n = len(vecs)
    n_groups = max(1, math.ceil(n / SUBMOD_CLUSTER_DIVISOR))
    if n_groups >= n:
        labels = list(range(n))
        return labels, [1.0 if vecs[i] else 0.0 for i in range(n)]
    seeds = _farthest_first_seeds(S, n_groups)
    centroids = [vecs[s] for s in seeds]
    labels = [0] * n
    for _ in range(SUBMOD_LLOYD_ITERS):
        changed = False
        for i in range(n):
            sims = [vectors.cosine(vecs[i], c) for c in centroids]
            best = max(range(n_groups), key=lambda g: (sims[g], -g))
            if best != labels[i]:
                labels[i] = best
                changed = True
        for g in range(n_groups):
            members = [vecs[i] for i in range(n) if labels[i] == g]
            if members:
                centroids[g] = vectors.mean(members)
        if not changed:
            break
    sim_to_centroid = [vectors.cosine(vecs[i], centroids[labels[i]]) for i in range(n)]
    return labels, sim_to_centroid


def submodular_objective(S, caps, labels, sim_to_centroid, subset) -> float:
    """Coverage plus clustered diversity value of a candidate subset.

    Coverage of each sentence i is capped at alpha times its average
    similarity; the diversity term rewards drawing from distinct clusters
    through a square root."""
    subset = list(subset)
    n = S.shape[0]
    if subset:
        cover = S[:, subset].sum(axis=1)
    else:
        cover = np.zeros(n)
    value = float(np.minimum(cover, caps).sum())
    by_cluster: dict[int, float] = {}
    for s in subset:
        by_cluster[labels[s]] = by_cluster.get(labels[s], 0.0) + sim_to_centroid[s]
    for total in by_cluster.values():
        value += SUBMOD_LAMBDA * math.sqrt(total)
    return value


def summarize_submodular(req: SummaryRequest) -> list:
    """Greedy maximization of the coverage + diversity objective."""
    cands, vecs, eligible = _prepared(req)
    if not cands or not eligible:
        return []
    S = _similarity_matrix(vecs, req.model.n_features)
    caps = SUBMOD_ALPHA * S.sum(axis=1) / len(cands)
    labels, sim_to_centroid = _diversity_clusters(vecs, S)
    chosen: list[int] = []
    cover = np.zeros(len(cands))
    cluster_mass: dict[int, float] = {}
    while len(chosen) < req.k:
        best_i = None
        best_gain = -math.inf
        for i in eligible:
            if i in chosen:
                continue
            coverage_gain = float(
                np.minimum(cover + S[:, i], caps).sum() - np.minimum(cover, caps).sum())
            mass = cluster_mass.get(labels[i], 0.0)
            diversity_gain = SUBMOD_LAMBDA * (
                math.sqrt(mass + sim_to_centroid[i]) - math.sqrt(mass))
            gain = coverage_gain + diversity_gain
            if gain > best_gain:
                best_i = i
                best_gain = gain
        if best_i is None:
            break
        chosen.append(best_i)
        cover = cover + S[:, best_i]
        cluster_mass[labels[best_i]] = (
            cluster_mass.get(labels[best_i], 0.0) + sim_to_centroid[best_i])
    return [cands[i] for i in chosen]


SUMMARIZERS = {
    "centroid-opt": summarize_centroid_opt,
    "centroid-rank": summarize_centroid_rank,
    "textrank": summarize_textrank,
    "submodular": summarize_submodular,
}


def run(name: str, req: SummaryRequest) -> list:
    try:
        fn = SUMMARIZERS[name]
    except KeyError:
        raise ValueError("unknown summarizer %r" % name)
    return fn(req)
