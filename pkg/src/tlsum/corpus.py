"""Article data model, corpus ingestion, dataset construction and statistics.

All types are immutable after construction and safe to share across worker
processes. Dates are calendar days everywhere; any time-of-day information
is discarded on ingestion.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from datetime import date, datetime, timedelta

from .datetags import DateMention, tag_date_mentions
from .vectors import tokenize

# Rejection codes emitted by filter_dataset_task
REASON_MIN_ENTRIES = "min-entries"
REASON_MENTION_COVERAGE = "mention-coverage"
REASON_ARTICLE_COUNT = "article-count"

MIN_TIMELINE_ENTRIES = 5
MIN_MENTION_COVERAGE = 0.5
MIN_QUERY_ARTICLES = 100
MAX_QUERY_ARTICLES = 3000  # exclusive


@dataclass(frozen=True)
class Sentence:
    article_id: str
    index: int
    text: str
    tokens: tuple[str, ...]
    mentions: tuple[DateMention, ...]
    pub_date: date

    @property
    def key(self) -> tuple[str, int]:
        """Identity used for dedup and deterministic tie-breaking."""
        return (self.article_id, self.index)


@dataclass(frozen=True)
class Article:
    id: str
    title: str
    pub_date: date
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class Timeline:
    """Date-ordered summary entries; dates strictly increasing, unique."""

    entries: tuple[tuple[date, tuple[str, ...]], ...] = ()

    def __post_init__(self):
        previous = None
        for day, sentences in self.entries:
            if previous is not None and day <= previous:
                raise ValueError("timeline dates must be strictly increasing")
            if not sentences:
                raise ValueError("timeline entry %s has no sentences" % day)
            previous = day

    @classmethod
    def from_pairs(cls, pairs) -> "Timeline":
        ordered = sorted((day, tuple(sents)) for day, sents in pairs)
        return cls(tuple(ordered))

    @property
    def dates(self) -> tuple[date, ...]:
        return tuple(day for day, _ in self.entries)

    @property
    def l(self) -> int:
        return len(self.entries)

    @property
    def m(self) -> int:
        return sum(len(sents) for _, sents in self.entries)

    @property
    def k(self) -> float:
        return self.m / self.l if self.entries else 0.0


@dataclass(frozen=True)
class Task:
    """One timeline-summarization problem instance."""

    name: str
    articles: tuple[Article, ...]
    queries: tuple[str, ...]
    ground_truth: Timeline
    topic: str = ""


@dataclass(frozen=True)
class DatasetStats:
    n_topics: int
    n_timelines: int
    avg_docs: float
    avg_sents: float
    avg_pubdates: float
    avg_duration_days: float
    avg_l: float
    avg_k: float
    avg_m: float
    comp_ratio_sents: float
    comp_ratio_dates: float
    date_cov_published: float
    date_cov_mentioned: float

    def to_dict(self) -> dict:
        return {
            "n_topics": self.n_topics,
            "n_timelines": self.n_timelines,
            "avg_docs": self.avg_docs,
            "avg_sents": self.avg_sents,
            "avg_pubdates": self.avg_pubdates,
            "avg_duration_days": self.avg_duration_days,
            "avg_l": self.avg_l,
            "avg_k": self.avg_k,
            "avg_m": self.avg_m,
            "comp_ratio_sents": self.comp_ratio_sents,
            "comp_ratio_dates": self.comp_ratio_dates,
            "date_cov_published": self.date_cov_published,
            "date_cov_mentioned": self.date_cov_mentioned,
        }


_ABBREVIATIONS = {"Mr", "Mrs", "Dr", "St", "U.S", "vs"}
_SPLIT_POINT = re.compile(r"[.!?]\s+(?=[A-Z0-9])")
_LAST_WORD = re.compile(r"[A-Za-z][A-Za-z.]*$")


def split_sentences(text: str) -> list[str]:
    """Split after ., ! or ? followed by whitespace and an uppercase letter
    or digit. A short abbreviation list suppresses false boundaries."""
    pieces = []
    start = 0
    for m in _SPLIT_POINT.finditer(text):
        word = _LAST_WORD.search(text, 0, m.start())
        if word and word.group(0) in _ABBREVIATIONS:
            continue
        piece = text[start:m.start() + 1].strip()
        if piece:
            pieces.append(piece)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        pieces.append(tail)
    return pieces


def build_article(article_id: str, title: str, pub_date: date, sentence_texts) -> Article:
    """Construct a fully tagged article from raw sentence strings."""
    sentences = tuple(
        Sentence(
            article_id=article_id,
            index=i,
            text=text,
            tokens=tuple(tokenize(text)),
            mentions=tuple(tag_date_mentions(text, pub_date)),
            pub_date=pub_date,
        )
        for i, text in enumerate(sentence_texts)
    )
    return Article(id=article_id, title=title, pub_date=pub_date, sentences=sentences)


def _parse_day(value: str) -> date:
    """Parse an ISO-8601 date or datetime down to the calendar day."""
    value = value.strip()
    try:
        return datetime.fromisoformat(value.replace("Z", "+00:00")).date()
    except ValueError:
        pass
    return date.fromisoformat(value[:10])


def parse_day_granular(value: str):
    """Return a date only for day-granular YYYY-MM-DD strings, else None."""
    if not re.fullmatch(r"\d{4}-\d{2}-\d{2}", value.strip()):
        return None
    try:
        return date.fromisoformat(value.strip())
    except ValueError:
        return None


def load_articles(path) -> list[Article]:
    """Read a JSONL article file, tag mentions, and sort by (pub_date, id).

    Each line holds one object with fields id, title, time, and either
    text (raw, split here) or sentences (pre-split, preferred).
    """
    articles = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError("%s: malformed JSON on line %d: %s" % (path, lineno, exc))
            if not isinstance(record, dict) or "id" not in record or "time" not in record:
                raise ValueError("%s: line %d is missing required fields" % (path, lineno))
            article_id = str(record["id"])
            try:
                pub = _parse_day(str(record["time"]))
            except ValueError:
                raise ValueError(
                    "article %s: unparseable date %r" % (article_id, record["time"]))
            if "sentences" in record and record["sentences"] is not None:
                texts = [str(s) for s in record["sentences"]]
            else:
                texts = split_sentences(str(record.get("text", "")))
            if not texts:
                raise ValueError("article %s: empty body" % article_id)
            articles.append(build_article(article_id, str(record.get("title", "")), pub, texts))
    articles.sort(key=lambda a: (a.pub_date, a.id))
    return articles


def dump_articles(articles, path) -> None:
    """Write articles as JSONL with pre-split sentences (round-trip safe)."""
    with open(path, "w", encoding="utf-8") as fh:
        for a in articles:
            record = {
                "id": a.id,
                "title": a.title,
                "time": a.pub_date.isoformat(),
                "sentences": [s.text for s in a.sentences],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_ground_truth(path):
    """Read a ground-truth JSON file.

    Returns (topic, queries, raw_entries) where raw_entries keeps the date
    strings untouched; they may lack day granularity and are cleaned by
    filter_dataset_task."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    topic = str(doc.get("topic", ""))
    queries = tuple(str(q) for q in doc.get("keywords", []))
    raw_entries = [(str(day), [str(s) for s in sents]) for day, sents in doc["timeline"]]
    return topic, queries, raw_entries


def dump_ground_truth(topic, queries, timeline: Timeline, path) -> None:
    doc = {
        "topic": topic,
        "keywords": list(queries),
        "timeline": [[day.isoformat(), list(sents)] for day, sents in timeline.entries],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=1)


def parse_timeline(raw_entries) -> Timeline:
    """Strict parse of day-granular raw entries into a Timeline."""
    cleaned = []
    for raw_day, sents in raw_entries:
        day = parse_day_granular(raw_day)
        if day is None:
            raise ValueError("timeline entry %r is not day-granular" % raw_day)
        cleaned.append((day, tuple(sents)))
    merged: dict[date, list[str]] = {}
    for day, sents in cleaned:
        merged.setdefault(day, []).extend(sents)
    return Timeline.from_pairs(merged.items())


def truncate_to_timeline_range(articles, ground_truth: Timeline):
    """Keep exactly the articles published within the timeline's date span."""
    if not ground_truth.entries:
        raise ValueError("cannot truncate against an empty timeline")
    first = ground_truth.dates[0]
    last = ground_truth.dates[-1]
    return [a for a in articles if first <= a.pub_date <= last]


def mentioned_dates(articles) -> set[date]:
    return {m.resolved for a in articles for s in a.sentences for m in s.mentions}


def _articles_matching_query(articles, queries) -> int:
    """Count articles whose body contains at least one query phrase."""
    lowered = [q.lower() for q in queries]
    count = 0
    for a in articles:
        body = " ".join(s.text for s in a.sentences).lower()
        if any(q in body for q in lowered):
            count += 1
    return count


def filter_dataset_task(articles, raw_timeline, queries, name="task", topic=""):
    """Clean a raw timeline against its article collection and accept or
    reject the resulting task.

    Cleaning steps, in order: (a) drop entries without day granularity;
    (b) truncate the timeline to the first and last article publication
    date; (c) drop entries with no article published within 2 days. The
    task is then rejected unless at least 5 entries remain, at least half
    of the remaining dates are mentioned somewhere in the articles, and
    the number of articles containing a query phrase is in [100, 3000).

    Returns (task, None) on acceptance, (None, reason_code) on rejection.
    """
    entries = []
    for raw_day, sents in raw_timeline:
        day = parse_day_granular(raw_day)
        if day is not None and sents:
            entries.append((day, tuple(sents)))
    merged: dict[date, list[str]] = {}
    for day, sents in entries:
        merged.setdefault(day, []).extend(sents)
    entries = sorted(merged.items())

    if articles:
        first_pub = min(a.pub_date for a in articles)
        last_pub = max(a.pub_date for a in articles)
        entries = [(d, s) for d, s in entries if first_pub <= d <= last_pub]
    else:
        entries = []

    pub_dates = {a.pub_date for a in articles}
    window = timedelta(days=2)
    entries = [
        (d, s) for d, s in entries
        if any(d - window <= p <= d + window for p in pub_dates)
    ]

    if len(entries) < MIN_TIMELINE_ENTRIES:
        return None, REASON_MIN_ENTRIES

    mentioned = mentioned_dates(articles)
    covered = sum(1 for d, _ in entries if d in mentioned)
    if covered / len(entries) < MIN_MENTION_COVERAGE:
        return None, REASON_MENTION_COVERAGE

    n_query = _articles_matching_query(articles, queries)
    if not (MIN_QUERY_ARTICLES <= n_query < MAX_QUERY_ARTICLES):
        return None, REASON_ARTICLE_COUNT

    timeline = Timeline.from_pairs((d, tuple(s)) for d, s in entries)
    kept = truncate_to_timeline_range(articles, timeline)
    task = Task(
        name=name,
        articles=tuple(kept),
        queries=tuple(queries),
        ground_truth=timeline,
        topic=topic or name,
    )
    return task, None


def dataset_stats(tasks) -> DatasetStats:
    """Aggregate per-task quantities by plain means over tasks."""
    tasks = list(tasks)
    if not tasks:
        raise ValueError("dataset_stats of zero tasks")

    def _mean(values):
        return sum(values) / len(values)

    docs, sents, pubdates, durations = [], [], [], []
    ls, ks, ms = [], [], []
    comp_sents, comp_dates, cov_pub, cov_men = [], [], [], []
    for task in tasks:
        n_docs = len(task.articles)
        n_sents = sum(len(a.sentences) for a in task.articles)
        pub_set = {a.pub_date for a in task.articles}
        gt = task.ground_truth
        docs.append(n_docs)
        sents.append(n_sents)
        pubdates.append(len(pub_set))
        durations.append((gt.dates[-1] - gt.dates[0]).days + 1)
        ls.append(gt.l)
        ks.append(gt.k)
        ms.append(gt.m)
        comp_sents.append(gt.m / n_sents if n_sents else 0.0)
        comp_dates.append(gt.l / len(pub_set) if pub_set else 0.0)
        mentioned = mentioned_dates(task.articles)
        cov_pub.append(sum(1 for d in gt.dates if d in pub_set) / gt.l)
        cov_men.append(sum(1 for d in gt.dates if d in mentioned) / gt.l)

    return DatasetStats(
        n_topics=len({task.topic for task in tasks}),
        n_timelines=len(tasks),
        avg_docs=_mean(docs),
        avg_sents=_mean(sents),
        avg_pubdates=_mean(pubdates),
        avg_duration_days=_mean(durations),
        avg_l=_mean(ls),
        avg_k=_mean(ks),
        avg_m=_mean(ms),
        comp_ratio_sents=_mean(comp_sents),
        comp_ratio_dates=_mean(comp_dates),
        date_cov_published=_mean(cov_pub),
        date_cov_mentioned=_mean(cov_men),
    )
