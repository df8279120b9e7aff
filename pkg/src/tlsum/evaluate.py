"""Timeline evaluation: n-gram metrics, date metrics, oracles, significance
testing, rank correlation, adjacency statistics and the leave-one-out
experiment harness.

The alignment-based metric aligns each summary of one timeline to its best
counterpart in the other (many-to-one allowed), discounting matches by
1 / (1 + date distance in days), with one pass per direction.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from datetime import timedelta

import numpy as np

from . import cluster as cluster_mod
from . import datewise, dateselect, summarize, vectors
from .corpus import Timeline
from .stem import stem as porter_stem

ORACLE_POOL_WINDOW_DAYS = 5
DEFAULT_RESAMPLES = 10000
DEFAULT_SEED = 42


def rouge_tokens(text: str, stem: bool = False, drop_stopwords: bool = False) -> list[str]:
    """ROUGE tokenization: lowercase, punctuation stripped. Stemming and
    stopword removal are off by default and share the shipped word list."""
    tokens = vectors.tokenize(text)
    if drop_stopwords:
        stop = vectors.stopwords()
        tokens = [t for t in tokens if t not in stop]
    if stem:
        tokens = [porter_stem(t) for t in tokens]
    return tokens


def _ngram_counts(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _clipped_match(cand_counts: Counter, ref_counts: Counter) -> int:
    return sum(min(c, ref_counts[g]) for g, c in cand_counts.items())


def rouge_n(cand_tokens, ref_tokens, n: int):
    """Clipped n-gram precision, recall and F1. Empty side gives zeros."""
    cand_counts = _ngram_counts(cand_tokens, n)
    ref_counts = _ngram_counts(ref_tokens, n)
    total_cand = sum(cand_counts.values())
    total_ref = sum(ref_counts.values())
    if total_cand == 0 or total_ref == 0:
        return (0.0, 0.0, 0.0)
    match = _clipped_match(cand_counts, ref_counts)
    precision = match / total_cand
    recall = match / total_ref
    if precision + recall == 0.0:
        return (precision, recall, 0.0)
    return (precision, recall, 2 * precision * recall / (precision + recall))


def date_f1(system: Timeline, reference: Timeline):
    """Precision, recall and F1 over exact calendar-date matches."""
    sys_dates = set(system.dates)
    ref_dates = set(reference.dates)
    if not sys_dates or not ref_dates:
        return (0.0, 0.0, 0.0)
    hit = len(sys_dates & ref_dates)
    precision = hit / len(sys_dates)
    recall = hit / len(ref_dates)
    if precision + recall == 0.0:
        return (precision, recall, 0.0)
    return (precision, recall, 2 * precision * recall / (precision + recall))


def _date_tokens(timeline: Timeline, n: int, stem: bool, drop_stopwords: bool):
    """Per-date n-gram counts and totals of the concatenated summaries."""
    out = {}
    for day, sentences in timeline.entries:
        tokens = [t for s in sentences for t in rouge_tokens(s, stem, drop_stopwords)]
        counts = _ngram_counts(tokens, n)
        out[day] = (counts, sum(counts.values()))
    return out


def _directional_alignment(from_side, to_side) -> float:
    """One alignment pass: each date on the from side aligns to its best
    scoring date on the other side (many-to-one), where the score is the
    plain ROUGE F1 times the date-distance discount. Returns the weighted
    clipped match mass over the from side's total n-grams."""
    total = sum(t for _, t in from_side.values())
    if total == 0:
        return 0.0
    numerator = 0.0
    to_items = sorted(to_side.items())
    for day_f, (counts_f, total_f) in sorted(from_side.items()):
        if total_f == 0:
            continue
        best_score = 0.0
        best_pair = None
        for day_t, (counts_t, total_t) in to_items:
            if total_t == 0:
                continue
            match = _clipped_match(counts_f, counts_t)
            if match == 0:
                continue
            precision = match / total_f
            recall = match / total_t
            f1 = 2 * precision * recall / (precision + recall)
            weight = 1.0 / (1.0 + abs((day_f - day_t).days))
            score = f1 * weight
            if score > best_score:
                best_score = score
                best_pair = (weight, match)
        if best_pair is not None:
            weight, match = best_pair
            numerator += weight * match
    return numerator / total


def alignment_rouge(system: Timeline, reference: Timeline, n: int = 1,
                    stem: bool = False, drop_stopwords: bool = False) -> float:
    """Alignment-based ROUGE F1 between two timelines."""
    sys_side = _date_tokens(system, n, stem, drop_stopwords)
    ref_side = _date_tokens(reference, n, stem, drop_stopwords)
    if not sys_side or not ref_side:
        return 0.0
    precision = _directional_alignment(sys_side, ref_side)
    recall = _directional_alignment(ref_side, sys_side)
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def greedy_oracle(candidates, reference_sentences, k: int) -> list:
    """Iteratively add the candidate that most improves ROUGE-1 F1 against
    the reference summary; stop at k sentences, on exhaustion, or when the
    best addition would lower the objective. Ties take the lower
    (article_id, index)."""
    ref_tokens = [t for s in reference_sentences for t in rouge_tokens(s)]
    pool = sorted(candidates, key=lambda s: s.key)
    pool_tokens = [rouge_tokens(s.text) for s in pool]
    chosen: list[int] = []
    chosen_tokens: list[str] = []
    current = 0.0
    remaining = list(range(len(pool)))
    while len(chosen) < k and remaining:
        best_i = None
        best_f1 = -1.0
        for i in remaining:
            f1 = rouge_n(chosen_tokens + pool_tokens[i], ref_tokens, 1)[2]
            if f1 > best_f1:
                best_i = i
                best_f1 = f1
        if best_f1 < current:
            break
        chosen.append(best_i)
        chosen_tokens.extend(pool_tokens[best_i])
        current = best_f1
        remaining.remove(best_i)
    return [pool[i] for i in chosen]


def oracle_pool(task, day) -> list:
    """Oracle candidates for one date: every sentence mentioning it plus
    the first 5 sentences of articles published within the next 5 days."""
    upper = day + timedelta(days=ORACLE_POOL_WINDOW_DAYS)
    seen = set()
    out = []
    for article in task.articles:
        in_window = day <= article.pub_date <= upper
        for sentence in article.sentences:
            take = (in_window and sentence.index < 5) or any(
                m.resolved == day for m in sentence.mentions)
            if take and sentence.key not in seen:
                seen.add(sentence.key)
                out.append(sentence)
    out.sort(key=lambda s: s.key)
    return out


def _nearest_reference(day, ground_truth: Timeline):
    """Ground-truth summary of the date closest to day (ties earlier)."""
    best = min(ground_truth.entries,
               key=lambda entry: (abs((entry[0] - day).days), entry[0]))
    return best[1]


def oracle_timeline(task, mode: str, date_model=None, sent_model=None) -> Timeline:
    """Upper-bound timelines built with ground-truth access.

    date: true dates, regular centroid summarization. text: regression
    date selection, greedy ROUGE-optimized summaries. full: true dates and
    greedy ROUGE-optimized summaries. Dates with no query-bearing
    candidates are omitted."""
    if mode not in ("date", "text", "full"):
        raise ValueError("unknown oracle mode %r" % mode)
    gt = task.ground_truth
    l = gt.l
    k = max(1, round(gt.k))
    if mode == "text":
        if date_model is None:
            raise ValueError("text oracle needs a trained regression date model")
        days = dateselect.rank_dates_supervised(task, date_model)[:l]
    else:
        days = list(gt.dates)
    if sent_model is None:
        units = [s.tokens for a in task.articles for s in a.sentences]
        sent_model = vectors.fit(units) if units else None
    gold = dict(gt.entries)
    entries = []
    for day in days:
        pool = oracle_pool(task, day)
        eligible = [s for s in pool if summarize.is_eligible(s, task.queries)]
        if not eligible:
            continue
        if mode == "date":
            if sent_model is None:
                continue
            request = summarize.SummaryRequest(
                candidates=tuple(pool), k=k, queries=task.queries, model=sent_model)
            summary = summarize.summarize_centroid_opt(request)
        else:
            reference = gold.get(day)
            if reference is None:
                reference = _nearest_reference(day, gt)
            summary = greedy_oracle(eligible, reference, k)
        if not summary:
            continue
        entries.append((day, tuple(s.text for s in summary)))
    return Timeline.from_pairs(entries)


def approx_randomization(per_task_a, per_task_b, resamples: int = DEFAULT_RESAMPLES,
                         seed: int = DEFAULT_SEED) -> float:
    """Two-sided approximate randomization test on paired per-task scores.

    Each resample flips every pair with probability one half; the p-value
    is (count of resampled differences >= observed, plus 1) over
    (resamples + 1). Resample i draws from a generator seeded with
    [seed, i], so the result is independent of evaluation order."""
    a = np.asarray(per_task_a, dtype=float)
    b = np.asarray(per_task_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired score lists must have equal length")
    if a.size < 2:
        raise ValueError("need at least 2 paired scores")
    observed = abs(a.mean() - b.mean())
    at_least = 0
    for i in range(resamples):
        rng = np.random.default_rng([seed, i])
        flips = rng.random(a.size) < 0.5
        mean_a = np.where(flips, b, a).mean()
        mean_b = np.where(flips, a, b).mean()
        if abs(mean_a - mean_b) >= observed:
            at_least += 1
    return (at_least + 1) / (resamples + 1)


def _average_ranks(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=float)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for pos in range(i, j + 1):
            ranks[order[pos]] = avg
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Rank correlation: Pearson correlation of average ranks."""
    xs = list(xs)
    ys = list(ys)
    if len(xs) != len(ys) or len(xs) < 3:
        raise ValueError("need two equal-length lists of at least 3 values")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    sx = rx.std()
    sy = ry.std()
    if sx == 0.0 or sy == 0.0:
        raise ValueError("zero-variance")
    return float(((rx - rx.mean()) * (ry - ry.mean())).mean() / (sx * sy))


def adjacent_date_ratio(timeline: Timeline) -> float:
    """Fraction of consecutive date pairs exactly one day apart."""
    days = timeline.dates
    if len(days) < 2:
        return 0.0
    adjacent = sum(1 for a, b in zip(days, days[1:]) if (b - a).days == 1)
    return adjacent / (len(days) - 1)


@dataclass(frozen=True)
class EvalResult:
    ar1_f: float
    ar2_f: float
    date_f1: float
    per_task: tuple[tuple[str, tuple[float, float, float]], ...]
    timelines: tuple = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "aggregate": {
                "ar1_f": self.ar1_f,
                "ar2_f": self.ar2_f,
                "date_f1": self.date_f1,
            },
            "per_task": {
                name: {"ar1_f": s[0], "ar2_f": s[1], "date_f1": s[2]}
                for name, s in self.per_task
            },
        }

    def to_csv(self) -> str:
        lines = ["task,ar1_f,ar2_f,date_f1"]
        for name, (ar1, ar2, df1) in self.per_task:
            lines.append("%s,%.6f,%.6f,%.6f" % (name, ar1, ar2, df1))
        lines.append("MEAN,%.6f,%.6f,%.6f" % (self.ar1_f, self.ar2_f, self.date_f1))
        return "\n".join(lines) + "\n"


def evaluate_timeline(system: Timeline, reference: Timeline):
    """The three reported scores for one system timeline."""
    return (
        alignment_rouge(system, reference, 1),
        alignment_rouge(system, reference, 2),
        date_f1(system, reference)[2],
    )


def aggregate_results(per_task, timelines=()) -> EvalResult:
    """Aggregate per-task triples by plain means over tasks."""
    per_task = tuple(sorted(per_task))
    if per_task:
        ar1 = sum(s[0] for _, s in per_task) / len(per_task)
        ar2 = sum(s[1] for _, s in per_task) / len(per_task)
        df1 = sum(s[2] for _, s in per_task) / len(per_task)
    else:
        ar1 = ar2 = df1 = 0.0
    return EvalResult(ar1, ar2, df1, per_task, tuple(timelines))


@dataclass(frozen=True)
class MethodConfig:
    """One experiment configuration, covering all three method families."""

    method: str = "datewise"  # datewise | clust | pubcount
    date_selector: str = "mentioncount"
    candidate_strategy: str = "pm-mean"
    summarizer: str = "centroid-opt"
    cluster_ranker: str = "size"  # size | datementioncount | regression-dates | regression-rouge
    titles_only: bool = False
    seed: int = DEFAULT_SEED

    @property
    def needs_date_model(self) -> bool:
        return (self.method in ("datewise",)
                and self.date_selector in ("supervised-clf", "supervised-reg"))

    @property
    def needs_cluster_model(self) -> bool:
        return (self.method == "clust"
                and self.cluster_ranker in ("regression-dates", "regression-rouge"))

    @property
    def is_supervised(self) -> bool:
        return self.needs_date_model or self.needs_cluster_model


def train_models(config: MethodConfig, training_tasks, prepared_clusters=None):
    """Train whatever supervised component the configuration needs."""
    date_model = None
    cluster_model = None
    if config.needs_date_model:
        mode = (dateselect.MODE_CLASSIFICATION if config.date_selector == "supervised-clf"
                else dateselect.MODE_REGRESSION)
        date_model = dateselect.train_date_selector(training_tasks, mode)
    if config.needs_cluster_model:
        label_mode = (cluster_mod.LABEL_DATE_ACCURACY
                      if config.cluster_ranker == "regression-dates"
                      else cluster_mod.LABEL_ROUGE)
        cluster_model = cluster_mod.train_cluster_regressor(
            training_tasks, label_mode, prepared=prepared_clusters)
    return date_model, cluster_model


def build_for_task(task, config: MethodConfig, date_model=None, cluster_model=None) -> Timeline:
    """Generate the system timeline for one task under a configuration."""
    if config.method == "pubcount":
        dw = datewise.DatewiseConfig(
            date_selector="pubcount",
            candidate_strategy=datewise.STRATEGY_PUB_DAY,
            summarizer="centroid-opt",
        )
        return datewise.build_datewise_timeline(task, dw)
    if config.method == "datewise":
        dw = datewise.DatewiseConfig(
            date_selector=config.date_selector,
            candidate_strategy=config.candidate_strategy,
            summarizer=config.summarizer,
            titles_only=config.titles_only,
            selector_model=date_model,
        )
        return datewise.build_datewise_timeline(task, dw)
    if config.method == "clust":
        ranker = config.cluster_ranker
        if ranker in ("regression-dates", "regression-rouge"):
            ranker = "regression"
        cc = cluster_mod.ClustConfig(
            ranker=ranker,
            summarizer=config.summarizer,
            ranker_model=cluster_model,
        )
        return cluster_mod.build_clust_timeline(task, cc)
    raise ValueError("unknown method %r" % config.method)


def loocv(tasks, config: MethodConfig) -> EvalResult:
    """Leave-one-out cross-validation: train supervised components on all
    other tasks, generate and score the held-out task. Unsupervised
    configurations shortcut the training but keep the same loop."""
    tasks = list(tasks)
    if not tasks:
        raise ValueError("loocv of zero tasks")
    if config.is_supervised and len(tasks) < 2:
        raise ValueError("supervised configurations need at least 2 tasks")
    prepared = None
    if config.needs_cluster_model:
        prepared = {t.name: cluster_mod.prepare_clusters(t) for t in tasks}
    per_task = []
    timelines = []
    for i, task in enumerate(tasks):
        date_model = cluster_model = None
        if config.is_supervised:
            training = tasks[:i] + tasks[i + 1:]
            date_model, cluster_model = train_models(config, training, prepared)
        system = build_for_task(task, config, date_model, cluster_model)
        per_task.append((task.name, evaluate_timeline(system, task.ground_truth)))
        timelines.append((task.name, system))
    return aggregate_results(per_task, timelines)
