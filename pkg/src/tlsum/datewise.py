"""Per-date candidate selection and date-wise timeline assembly.

For each ranked candidate date d, two sentence sets are gathered: sentences
published on or up to 2 days after d (first 5 of each article body), and
sentences anywhere in the collection that textually mention d. A combined
date vector scores the pooled candidates; a knee point on the sorted score
curve cuts off the best ones. Dates whose candidates cannot be summarized
are skipped until the timeline reaches its target length.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date, timedelta

from . import dateselect, summarize, vectors
from .corpus import Sentence, Timeline
from .vectors import SparseVector

log = logging.getLogger(__name__)

P_WINDOW_DAYS = 2  # "closely after d" pinned to d+2

STRATEGY_P = "p"
STRATEGY_M = "m"
STRATEGY_PM_MEAN = "pm-mean"
STRATEGY_PUB_DAY = "pub-day"  # baseline: every sentence published on d


class InsufficientEvidence(ValueError):
    """A date is missing one of its evidence sets (P empty or M empty)."""

    def __init__(self):
        super().__init__("insufficient-evidence")


@dataclass(frozen=True)
class DateCandidateSet:
    date: date
    p_sents: tuple[Sentence, ...]
    m_sents: tuple[Sentence, ...]
    date_vector: SparseVector
    selected: tuple[Sentence, ...]


@dataclass(frozen=True)
class DatewiseConfig:
    date_selector: str = "mentioncount"  # pubcount | mentioncount | supervised-clf | supervised-reg
    candidate_strategy: str = STRATEGY_PM_MEAN
    summarizer: str = "centroid-opt"
    titles_only: bool = False
    l: int | None = None  # None: ground-truth length
    k: int | None = None  # None: rounded ground-truth sentences per date
    selector_model: "dateselect.LinearModel | None" = None


def build_pd(day: date, articles) -> list[Sentence]:
    """First 5 body sentences of every article published in [d, d+2]."""
    upper = day + timedelta(days=P_WINDOW_DAYS)
    out = []
    for article in articles:
        if day <= article.pub_date <= upper:
            out.extend(article.sentences[:5])
    return out


def build_md(day: date, articles) -> list[Sentence]:
    """Every sentence that mentions d, regardless of publication date."""
    out = []
    for article in articles:
        for sentence in article.sentences:
            if any(m.resolved == day for m in sentence.mentions):
                out.append(sentence)
    return out


def _sentence_vector(sentence, model, cache):
    if cache is None:
        return vectors.vectorize(sentence.tokens, model)
    key = sentence.key
    v = cache.get(key)
    if v is None:
        v = vectors.vectorize(sentence.tokens, model)
        cache[key] = v
    return v


def date_vector(p_sents, m_sents, model, vec_cache=None) -> SparseVector:
    """Combine the mean vectors of both evidence sets, weighted by set size.

    A feature survives only where both means are positive; everything else
    is zeroed. The result is intentionally not renormalized."""
    if not p_sents or not m_sents:
        raise InsufficientEvidence()
    mean_p = vectors.mean([_sentence_vector(s, model, vec_cache) for s in p_sents])
    mean_m = vectors.mean([_sentence_vector(s, model, vec_cache) for s in m_sents])
    inv_p = 1.0 / len(p_sents)
    inv_m = 1.0 / len(m_sents)
    pp, mm = mean_p.pairs, mean_m.pairs
    i = j = 0
    out = []
    while i < len(pp) and j < len(mm):
        fi, wi = pp[i]
        fj, wj = mm[j]
        if fi == fj:
            out.append((fi, inv_p * wi + inv_m * wj))
            i += 1
            j += 1
        elif fi < fj:
            i += 1
        else:
            j += 1
    return SparseVector(tuple(out))


def knee_threshold(scores) -> float:
    """Threshold at the knee of the descending score curve.

    Scores are sorted descending, positions mapped onto [0, 1], values
    min-max normalized; the knee is the point with maximum perpendicular
    distance to the chord between the endpoints. Ties pick the smaller
    index (the higher threshold). With fewer than 3 scores, or all equal,
    the minimum score is returned so that every candidate survives."""
    scores = list(scores)
    if not scores:
        raise ValueError("knee_threshold of zero scores")
    if len(scores) < 3:
        return min(scores)
    ordered = sorted(scores, reverse=True)
    hi, lo = ordered[0], ordered[-1]
    if hi == lo:
        return lo
    n = len(ordered)
    span = hi - lo
    best_index = 0
    best_dist = -1.0
    # chord runs from (0, 1) to (1, 0), so distance ~ |x + y - 1|
    for i, y in enumerate(ordered):
        x = i / (n - 1)
        y_hat = (y - lo) / span
        dist = abs(x + y_hat - 1.0)
        if dist > best_dist:
            best_dist = dist
            best_index = i
    return ordered[best_index]


def _dedup_sorted(sentences):
    seen = set()
    out = []
    for s in sorted(sentences, key=lambda s: s.key):
        if s.key in seen:
            continue
        seen.add(s.key)
        out.append(s)
    return out


def select_candidates(day, articles, model, strategy, vec_cache=None) -> DateCandidateSet:
    """Pick the candidate sentences for one date.

    pm-mean scores the pooled P/M sentences against the date vector and
    keeps those at or above the knee threshold; p/m pass their raw set
    through unscored."""
    p = build_pd(day, articles)
    m = build_md(day, articles)
    if strategy == STRATEGY_P:
        return DateCandidateSet(day, tuple(p), tuple(m), SparseVector(), tuple(p))
    if strategy == STRATEGY_M:
        return DateCandidateSet(day, tuple(p), tuple(m), SparseVector(), tuple(m))
    if strategy != STRATEGY_PM_MEAN:
        raise ValueError("unknown candidate strategy %r" % strategy)
    xd = date_vector(p, m, model, vec_cache)
    pooled = _dedup_sorted(p + m)
    scores = [vectors.cosine(_sentence_vector(s, model, vec_cache), xd) for s in pooled]
    threshold = knee_threshold(scores)
    selected = tuple(s for s, sc in zip(pooled, scores) if sc >= threshold)
    return DateCandidateSet(day, tuple(p), tuple(m), xd, selected)


def _title_candidates(day, articles) -> list[Sentence]:
    """Title pseudo-sentences (index -1) of articles published in [d, d+2]."""
    upper = day + timedelta(days=P_WINDOW_DAYS)
    out = []
    for article in articles:
        if day <= article.pub_date <= upper and article.title:
            out.append(Sentence(
                article_id=article.id,
                index=-1,
                text=article.title,
                tokens=tuple(vectors.tokenize(article.title)),
                mentions=(),
                pub_date=article.pub_date,
            ))
    return out


def _candidates_for_date(day, task, model, config, vec_cache):
    """Candidate sentences for one date, with the documented fallbacks.

    Returns a possibly empty list; an empty list means the date cannot be
    summarized and is skipped by the assembly loop."""
    if config.candidate_strategy == STRATEGY_PUB_DAY:
        return [s for a in task.articles if a.pub_date == day for s in a.sentences]

    if config.titles_only:
        titles = _title_candidates(day, task.articles)
        if not titles or config.candidate_strategy != STRATEGY_PM_MEAN:
            return titles
        # score titles against the date vector built from body sentences
        try:
            xd = date_vector(build_pd(day, task.articles), build_md(day, task.articles),
                             model, vec_cache)
        except InsufficientEvidence:
            return titles
        titles = _dedup_sorted(titles)
        scores = [vectors.cosine(vectors.vectorize(t.tokens, model), xd) for t in titles]
        threshold = knee_threshold(scores)
        return [t for t, sc in zip(titles, scores) if sc >= threshold]

    try:
        return list(select_candidates(
            day, task.articles, model, config.candidate_strategy, vec_cache).selected)
    except InsufficientEvidence:
        # fall back to whichever evidence set exists, unscored
        p = build_pd(day, task.articles)
        if p:
            return p
        return build_md(day, task.articles)


def _ranked_dates(task, config, stats):
    selector = config.date_selector
    if selector == "pubcount":
        return dateselect.rank_pubcount(stats)
    if selector == "mentioncount":
        return dateselect.rank_mentioncount(stats)
    if selector in ("supervised-clf", "supervised-reg"):
        if config.selector_model is None:
            raise ValueError("supervised date selection needs a trained model")
        return dateselect.rank_dates_supervised(task, config.selector_model, stats)
    raise ValueError("unknown date selector %r" % selector)


def target_lengths(task, config) -> tuple[int, int]:
    l = config.l if config.l is not None else task.ground_truth.l
    k = config.k if config.k is not None else max(1, round(task.ground_truth.k))
    return l, k


def build_datewise_timeline(task, config: DatewiseConfig, model=None) -> Timeline:
    """Walk the ranked date list, summarizing each date until l dates have
    summaries. Dates yielding no summary (no candidates, no query-bearing
    sentence) are skipped. Entries come out sorted by date."""
    if model is None:
        units = [s.tokens for a in task.articles for s in a.sentences]
        if not units:
            log.warning("empty-collection: task %s has no sentences", task.name)
            return Timeline()
        model = vectors.fit(units)
    l, k = target_lengths(task, config)
    stats = dateselect.collect_dates(task)
    ranked = _ranked_dates(task, config, stats)
    vec_cache: dict = {}
    entries = []
    for day in ranked:
        if len(entries) >= l:
            break
        candidates = _candidates_for_date(day, task, model, config, vec_cache)
        if not candidates:
            continue
        request = summarize.SummaryRequest(
            candidates=tuple(candidates), k=k, queries=task.queries, model=model)
        chosen = summarize.run(config.summarizer, request)
        if not chosen:
            continue
        entries.append((day, tuple(s.text for s in chosen)))
    if not entries:
        log.warning("no-summarizable-dates: task %s produced an empty timeline", task.name)
    return Timeline.from_pairs(entries)
