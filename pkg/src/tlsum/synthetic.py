"""Deterministic synthetic news collections with known timelines.

Each collection tells one story through evenly spaced events. Every event
ships a canonical lead sentence (carrying the query keyphrase, an explicit
calendar date and event-specific words) that doubles as the ground-truth
summary, so a correct pipeline can recover both the dates and the text.
Noise articles use a disjoint vocabulary, never carry the keyphrase, and
only mention days away from any event.
"""

from __future__ import annotations

import calendar
import os
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .corpus import Task, Timeline, build_article, dump_articles, dump_ground_truth

BASE_DATE = date(2021, 3, 1)
KEYPHRASE = "zephyr"
MIN_EVENT_GAP_DAYS = 6


@dataclass(frozen=True)
class SyntheticSpec:
    n_events: int = 10
    articles_per_event: int = 5
    noise_articles: int = 50
    span_days: int = 120
    vocab_size: int = 120
    seed: int = 42
    noise_event_overlap: float = 0.0  # fraction of noise mentions aimed at event dates


def _event_words(e: int) -> tuple[str, str, str]:
    return ("incident%02d" % e, "site%02d" % e, "leader%02d" % e)


def _long_date(day: date) -> str:
    return "%d %s %d" % (day.day, calendar.month_name[day.month], day.year)


def event_days(spec: SyntheticSpec) -> list[date]:
    if spec.n_events < 1:
        raise ValueError("need at least one event")
    slot = spec.span_days // spec.n_events
    if slot < MIN_EVENT_GAP_DAYS:
        raise ValueError("span of %d days is too short for %d events"
                         % (spec.span_days, spec.n_events))
    return [BASE_DATE + timedelta(days=e * slot) for e in range(spec.n_events)]


def canonical_lead(e: int, day: date) -> str:
    w1, w2, w3 = _event_words(e)
    return "On %s, %s %s struck %s and %s responded." % (
        day.isoformat(), KEYPHRASE, w1, w2, w3)


def generate(spec: SyntheticSpec):
    """Build (articles, ground_truth, queries) for a synthetic story."""
    days = event_days(spec)
    rng = np.random.default_rng(spec.seed)
    background = ["filler%03d" % i for i in range(spec.vocab_size)]

    articles = []
    gt_entries = []
    for e, day in enumerate(days):
        w1, w2, w3 = _event_words(e)
        iso = day.isoformat()
        lead = canonical_lead(e, day)
        gt_entries.append((day, (lead,)))
        for j in range(spec.articles_per_event):
            pub = day + timedelta(days=j % 2)
            sents = [
                lead,
                "Reports on %s said %s damaged %s overnight." % (iso, w1, w2),
            ]
            if j % 3 == 0:
                sents.append("The %s team planned further %s checks." % (w3, KEYPHRASE))
            articles.append(build_article(
                "ev%02d-%02d" % (e, j),
                "%s %s update" % (KEYPHRASE, w1),
                pub,
                sents,
            ))

    # noise mentions stay clear of the 2-day bands around events unless
    # the overlap knob deliberately aims some at event dates
    blocked = {d + timedelta(days=off) for d in days for off in range(-2, 3)}
    open_days = [BASE_DATE + timedelta(days=i) for i in range(spec.span_days + 1)
                 if BASE_DATE + timedelta(days=i) not in blocked]
    for i in range(spec.noise_articles):
        pub = BASE_DATE + timedelta(days=int(rng.integers(0, spec.span_days + 1)))
        n_sents = int(rng.integers(3, 6))
        sents = []
        for _ in range(n_sents):
            picks = [background[int(x)]
                     for x in rng.integers(0, len(background), size=6)]
            sents.append("The %s and %s moved past %s while %s held %s near %s."
                         % tuple(picks))
        if spec.noise_event_overlap > 0.0 and rng.random() < spec.noise_event_overlap:
            mention_day = days[int(rng.integers(0, len(days)))]
        elif open_days:
            mention_day = open_days[int(rng.integers(0, len(open_days)))]
        else:
            mention_day = None
        if mention_day is not None:
            extra = background[int(rng.integers(0, len(background)))]
            sents[1] = ("Observers noted the change on %s near %s."
                        % (_long_date(mention_day), extra))
        articles.append(build_article(
            "nz%03d" % i,
            "Daily brief %03d" % i,
            pub,
            sents,
        ))

    articles.sort(key=lambda a: (a.pub_date, a.id))
    ground_truth = Timeline.from_pairs(gt_entries)
    return articles, ground_truth, (KEYPHRASE,)


def make_task(spec: SyntheticSpec, name: str = "synth") -> Task:
    """A ready-to-run task from a synthetic spec."""
    articles, ground_truth, queries = generate(spec)
    return Task(
        name=name,
        articles=tuple(articles),
        queries=queries,
        ground_truth=ground_truth,
        topic=name,
    )


def write_dataset(spec: SyntheticSpec, topic_dir) -> None:
    """Write the collection in the on-disk dataset layout: one topic
    directory holding articles.jsonl and timeline.json."""
    os.makedirs(topic_dir, exist_ok=True)
    articles, ground_truth, queries = generate(spec)
    dump_articles(articles, os.path.join(topic_dir, "articles.jsonl"))
    dump_ground_truth(os.path.basename(os.path.normpath(topic_dir)),
                      queries, ground_truth, os.path.join(topic_dir, "timeline.json"))
