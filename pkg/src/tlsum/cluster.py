"""Event detection by temporally constrained Markov clustering of articles.

Articles published at most one day apart are connected by edges weighted
with the cosine similarity of their TF-IDF vectors. Markov clustering on
that graph yields event clusters; each cluster is dated by its most
frequently mentioned date, ranked, and summarized into a timeline entry.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from datetime import date, timedelta

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import dateselect, summarize, vectors
from .corpus import Timeline

log = logging.getLogger(__name__)

MCL_INFLATION = 2.0
MCL_EXPANSION = 2
MCL_PRUNE = 1e-5
MCL_TOL = 1e-8
MCL_MAX_ITER = 100

CLUSTER_FEATURE_NAMES = (
    "n_articles",
    "pub_span_days",
    "max_pub_count",
    "max_mention_count",
    "sum_mention_counts",
)

LABEL_DATE_ACCURACY = "date-accuracy"
LABEL_ROUGE = "rouge"


@dataclass(frozen=True)
class ArticleGraph:
    ids: tuple[str, ...]  # sorted article ids; node index = position
    edges: tuple[tuple[int, int, float], ...]  # i < j, weight > 0


@dataclass(frozen=True)
class ArticleCluster:
    article_ids: tuple[str, ...]  # sorted
    cluster_date: date | None = None
    features: tuple[float, ...] | None = None
    score: float = 0.0


@dataclass(frozen=True)
class ClustConfig:
    ranker: str = "size"  # size | datementioncount | regression
    summarizer: str = "centroid-opt"
    l: int | None = None
    k: int | None = None
    ranker_model: "dateselect.LinearModel | None" = None


def article_tokens(article) -> list[str]:
    out = []
    for sentence in article.sentences:
        out.extend(sentence.tokens)
    return out


def fit_article_model(articles):
    return vectors.fit([article_tokens(a) for a in articles])


def build_temporal_graph(articles, model) -> ArticleGraph:
    """Edges only between articles published at most 1 day apart, weighted
    by cosine similarity; zero-similarity pairs carry no edge."""
    ordered = sorted(articles, key=lambda a: a.id)
    ids = tuple(a.id for a in ordered)
    index = {a_id: i for i, a_id in enumerate(ids)}
    vecs = {a.id: vectors.vectorize(article_tokens(a), model) for a in ordered}
    by_day: dict[date, list[str]] = defaultdict(list)
    for a in ordered:
        by_day[a.pub_date].append(a.id)
    edges = []

    def connect(id_a, id_b):
        w = vectors.dot(vecs[id_a], vecs[id_b])
        if w > 0.0:
            i, j = index[id_a], index[id_b]
            if i > j:
                i, j = j, i
            edges.append((i, j, w))

    one = timedelta(days=1)
    for day in sorted(by_day):
        same = by_day[day]
        for a_pos in range(len(same)):
            for b_pos in range(a_pos + 1, len(same)):
                connect(same[a_pos], same[b_pos])
        for id_a in same:
            for id_b in by_day.get(day + one, ()):
                connect(id_a, id_b)
    edges.sort()
    return ArticleGraph(ids=ids, edges=tuple(edges))


def _column_normalize(M: sp.csr_matrix) -> sp.csr_matrix:
    sums = np.asarray(M.sum(axis=0)).ravel()
    inv = np.zeros_like(sums)
    nonzero = sums > 0.0
    inv[nonzero] = 1.0 / sums[nonzero]
    return (M @ sp.diags(inv)).tocsr()


def mcl(graph: ArticleGraph, inflation: float = MCL_INFLATION,
        expansion: int = MCL_EXPANSION) -> list[ArticleCluster]:
    """Markov clustering: alternate walk expansion and inflation on the
    column-stochastic matrix until the entries stop moving, then read the
    clusters off the connected components of the nonzero pattern."""
    n = len(graph.ids)
    if n == 0:
        return []
    rows, cols, data = [], [], []
    for i, j, w in graph.edges:
        rows.extend((i, j))
        cols.extend((j, i))
        data.extend((w, w))
    for i in range(n):  # self-loops
        rows.append(i)
        cols.append(i)
        data.append(1.0)
    M = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    M = _column_normalize(M)
    for _ in range(MCL_MAX_ITER):
        previous = M
        expanded = M
        for _ in range(expansion - 1):
            expanded = (expanded @ M).tocsr()
        expanded.data = np.power(expanded.data, inflation)
        expanded = _column_normalize(expanded)
        expanded.data[expanded.data < MCL_PRUNE] = 0.0
        expanded.eliminate_zeros()
        M = expanded
        diff = (M - previous).tocsr()
        change = np.abs(diff.data).max() if diff.nnz else 0.0
        if change < MCL_TOL:
            break
    pattern = M + M.T
    _, labels = connected_components(pattern, directed=False)
    groups: dict[int, list[str]] = defaultdict(list)
    for node, label in enumerate(labels):
        groups[label].append(graph.ids[node])
    clusters = [ArticleCluster(article_ids=tuple(sorted(g))) for g in groups.values()]
    clusters.sort(key=lambda c: c.article_ids[0])
    return clusters


def _cluster_articles(cluster, articles):
    wanted = set(cluster.article_ids)
    return [a for a in articles if a.id in wanted]


def _mention_counts(members) -> Counter:
    counts: Counter = Counter()
    for article in members:
        for sentence in article.sentences:
            for mention in sentence.mentions:
                counts[mention.resolved] += 1
    return counts


def assign_cluster_date(cluster: ArticleCluster, articles) -> date:
    """The most frequently mentioned date inside the cluster; ties go to
    the earlier date. With no mentions at all, fall back to the most
    common publication date."""
    members = _cluster_articles(cluster, articles)
    counts = _mention_counts(members)
    if counts:
        return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
    pubs = Counter(a.pub_date for a in members)
    return sorted(pubs.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


def cluster_features(cluster: ArticleCluster, task) -> tuple[float, ...]:
    members = _cluster_articles(cluster, task.articles)
    pubs = [a.pub_date for a in members]
    span = (max(pubs) - min(pubs)).days
    max_pub = max(Counter(pubs).values())
    mention_counts = _mention_counts(members)
    max_mention = max(mention_counts.values()) if mention_counts else 0
    total_mentions = sum(mention_counts.values())
    return (
        float(len(members)),
        float(span),
        float(max_pub),
        float(max_mention),
        float(total_mentions),
    )


def collection_mention_counts(task) -> Counter:
    """Date mention counts over the whole collection (used by the
    datementioncount ranker, which deliberately does not restrict itself
    to mentions inside a cluster)."""
    return _mention_counts(task.articles)


def prepare_clusters(task, art_model=None) -> list[ArticleCluster]:
    """Cluster a task's articles and attach dates and features."""
    if not task.articles:
        return []
    if art_model is None:
        art_model = fit_article_model(task.articles)
    graph = build_temporal_graph(task.articles, art_model)
    clusters = mcl(graph)
    out = []
    for c in clusters:
        dated = replace(c, cluster_date=assign_cluster_date(c, task.articles))
        out.append(replace(dated, features=cluster_features(dated, task)))
    return out


def cluster_candidates(cluster: ArticleCluster, task) -> list:
    """Summarization input: the first 5 sentences of each member article."""
    members = _cluster_articles(cluster, task.articles)
    members.sort(key=lambda a: a.id)
    out = []
    for article in members:
        out.extend(article.sentences[:5])
    return out


def train_cluster_regressor(training_tasks, label_mode: str, summarizer: str = "centroid-opt",
                            prepared=None) -> "dateselect.LinearModel":
    """Ridge regression from cluster features to one of two labels:
    date-accuracy (cluster date appears in the ground truth) or the
    ROUGE-1 F1 of the cluster summary against the ground-truth entry
    (0 when the cluster date is off the timeline)."""
    from .evaluate import rouge_n, rouge_tokens

    if label_mode not in (LABEL_DATE_ACCURACY, LABEL_ROUGE):
        raise ValueError("unknown label mode %r" % label_mode)
    rows = []
    labels = []
    for task in training_tasks:
        clusters = prepared[task.name] if prepared else prepare_clusters(task)
        gold = dict(task.ground_truth.entries)
        sent_model = None
        for c in clusters:
            rows.append(c.features)
            if c.cluster_date not in gold:
                labels.append(0.0)
                continue
            if label_mode == LABEL_DATE_ACCURACY:
                labels.append(1.0)
                continue
            if sent_model is None:
                sent_model = vectors.fit(
                    [s.tokens for a in task.articles for s in a.sentences])
            _, k = _lengths(task, ClustConfig())
            request = summarize.SummaryRequest(
                candidates=tuple(cluster_candidates(c, task)), k=k,
                queries=task.queries, model=sent_model)
            summary = summarize.run(summarizer, request)
            if not summary:
                labels.append(0.0)
                continue
            cand_tokens = [t for s in summary for t in rouge_tokens(s.text)]
            ref_tokens = [t for s in gold[c.cluster_date] for t in rouge_tokens(s)]
            labels.append(rouge_n(cand_tokens, ref_tokens, 1)[2])
    if not rows:
        raise ValueError("no clusters in the training tasks")
    return dateselect.fit_linear(rows, labels, dateselect.MODE_REGRESSION)


def rank_clusters(clusters, method: str, model=None, mention_counts=None):
    """Order clusters by the chosen score, descending; ties go to the
    earlier cluster date, then the smallest member id."""
    scored = []
    for c in clusters:
        if method == "size":
            score = float(len(c.article_ids))
        elif method == "datementioncount":
            if mention_counts is None:
                raise ValueError("datementioncount ranking needs collection-wide counts")
            score = float(mention_counts.get(c.cluster_date, 0))
        elif method == "regression":
            if model is None:
                raise ValueError("regression ranking needs a trained model")
            score = float(model.score(c.features))
        else:
            raise ValueError("unknown cluster ranking method %r" % method)
        scored.append(replace(c, score=score))
    scored.sort(key=lambda c: (-c.score, c.cluster_date, c.article_ids[0]))
    return scored


def _lengths(task, config) -> tuple[int, int]:
    l = config.l if config.l is not None else task.ground_truth.l
    k = config.k if config.k is not None else max(1, round(task.ground_truth.k))
    return l, k


def build_clust_timeline(task, config: ClustConfig, art_model=None, sent_model=None) -> Timeline:
    """Walk the ranked clusters, skipping any whose date is already used or
    whose sentences yield no query-bearing summary, until l entries exist."""
    if not task.articles:
        log.warning("empty-collection: task %s has no articles", task.name)
        return Timeline()
    clusters = prepare_clusters(task, art_model)
    if sent_model is None:
        sent_model = vectors.fit([s.tokens for a in task.articles for s in a.sentences])
    mention_counts = None
    if config.ranker == "datementioncount":
        mention_counts = collection_mention_counts(task)
    ranked = rank_clusters(clusters, config.ranker,
                           model=config.ranker_model, mention_counts=mention_counts)
    l, k = _lengths(task, config)
    used_dates = set()
    entries = []
    for c in ranked:
        if len(entries) >= l:
            break
        if c.cluster_date in used_dates:
            continue
        request = summarize.SummaryRequest(
            candidates=tuple(cluster_candidates(c, task)), k=k,
            queries=task.queries, model=sent_model)
        summary = summarize.run(config.summarizer, request)
        if not summary:
            continue
        used_dates.add(c.cluster_date)
        entries.append((c.cluster_date, tuple(s.text for s in summary)))
    if not entries:
        log.warning("no-summarizable-clusters: task %s produced an empty timeline", task.name)
    return Timeline.from_pairs(entries)


def clusters_to_json(clusters) -> list[dict]:
    """Debug dump structure for the CLI."""
    return [
        {
            "article_ids": list(c.article_ids),
            "cluster_date": c.cluster_date.isoformat() if c.cluster_date else None,
            "features": list(c.features) if c.features else None,
            "score": c.score,
        }
        for c in clusters
    ]
