"""Rule-based temporal expression tagging.

Resolves a fixed set of date expression patterns against an article's
publication date. Everything resolves to a concrete calendar day; spans that
cannot be resolved (invalid dates, missing pieces) are skipped silently.

Supported patterns, in priority order (earlier wins on overlapping spans):
    ISO dates           2012-04-26
    day month year      26 April 2012, 3rd Jan 1999
    month day, year     April 26, 2012
    day month           12 April        -> occurrence nearest pub date
    month day           April 12        -> same rule
    weekday             Monday, last Monday, next Monday
    relative words      today, yesterday, tomorrow
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, timedelta

MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5,
    "june": 6, "july": 7, "august": 8, "september": 9, "october": 10,
    "november": 11, "december": 12,
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "jun": 6, "jul": 7,
    "aug": 8, "sep": 9, "sept": 9, "oct": 10, "nov": 11, "dec": 12,
}

WEEKDAYS = {
    "monday": 0, "tuesday": 1, "wednesday": 2, "thursday": 3,
    "friday": 4, "saturday": 5, "sunday": 6,
}

_MONTH_ALT = "|".join(sorted(MONTHS, key=len, reverse=True))
_WEEKDAY_ALT = "|".join(WEEKDAYS)
_ORDINAL = r"(?:st|nd|rd|th)?"

# (kind, regex); list position doubles as overlap priority
_PATTERNS = [
    ("iso", re.compile(r"\b(\d{4})-(\d{2})-(\d{2})\b")),
    ("dmy", re.compile(
        rf"\b(\d{{1,2}}){_ORDINAL}\s+({_MONTH_ALT})\s+(\d{{4}})\b", re.IGNORECASE)),
    ("mdy", re.compile(
        rf"\b({_MONTH_ALT})\s+(\d{{1,2}}){_ORDINAL},\s*(\d{{4}})\b", re.IGNORECASE)),
    ("dm", re.compile(
        rf"\b(\d{{1,2}}){_ORDINAL}\s+({_MONTH_ALT})\b", re.IGNORECASE)),
    ("md", re.compile(
        rf"\b({_MONTH_ALT})\s+(\d{{1,2}}){_ORDINAL}\b", re.IGNORECASE)),
    ("weekday", re.compile(
        rf"\b(?:(last|next)\s+)?({_WEEKDAY_ALT})\b", re.IGNORECASE)),
    ("relative", re.compile(r"\b(today|yesterday|tomorrow)\b", re.IGNORECASE)),
]

_RELATIVE_OFFSETS = {"today": 0, "yesterday": -1, "tomorrow": 1}


@dataclass(frozen=True)
class DateMention:
    """A matched date expression and the calendar day it resolves to."""

    surface: str
    resolved: date


def _nearest_year(day: int, month: int, pub: date):
    """Resolve a year-less day+month to the occurrence nearest pub date.

    Candidates are taken from the publication year and its neighbors; ties
    go to the earlier date. Returns None when no candidate year yields a
    valid calendar date (e.g. 31 April).
    """
    best = None
    for year in (pub.year - 1, pub.year, pub.year + 1):
        try:
            cand = date(year, month, day)
        except ValueError:
            continue
        if best is None:
            best = cand
            continue
        d_best = abs((best - pub).days)
        d_cand = abs((cand - pub).days)
        if d_cand < d_best or (d_cand == d_best and cand < best):
            best = cand
    return best


def _resolve_weekday(modifier: str, target: int, pub: date) -> date:
    if modifier == "next":
        # nearest strictly later occurrence
        delta = (target - pub.weekday() - 1) % 7 + 1
        return pub + timedelta(days=delta)
    # bare and "last": most recent strictly earlier occurrence
    delta = (pub.weekday() - target - 1) % 7 + 1
    return pub - timedelta(days=delta)


def _resolve(kind: str, m: re.Match, pub: date):
    try:
        if kind == "iso":
            return date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
        if kind == "dmy":
            return date(int(m.group(3)), MONTHS[m.group(2).lower()], int(m.group(1)))
        if kind == "mdy":
            return date(int(m.group(3)), MONTHS[m.group(1).lower()], int(m.group(2)))
    except ValueError:
        return None
    if kind == "dm":
        return _nearest_year(int(m.group(1)), MONTHS[m.group(2).lower()], pub)
    if kind == "md":
        return _nearest_year(int(m.group(2)), MONTHS[m.group(1).lower()], pub)
    if kind == "weekday":
        modifier = (m.group(1) or "").lower()
        return _resolve_weekday(modifier, WEEKDAYS[m.group(2).lower()], pub)
    if kind == "relative":
        return pub + timedelta(days=_RELATIVE_OFFSETS[m.group(1).lower()])
    return None


def tag_date_mentions(text: str, pub_date: date) -> list[DateMention]:
    """Tag every supported date expression in text, resolved against pub_date.

    Pure function: identical inputs always give identical outputs. Mentions
    are returned in order of appearance; overlapping matches are dropped in
    favor of the higher-priority (longer, more explicit) pattern.
    """
    candidates = []
    for priority, (kind, rx) in enumerate(_PATTERNS):
        for m in rx.finditer(text):
            resolved = _resolve(kind, m, pub_date)
            if resolved is not None:
                candidates.append((m.start(), priority, m.end(), m.group(0), resolved))
    candidates.sort(key=lambda c: (c[0], c[1], -c[2]))
    taken: list[tuple[int, int]] = []
    mentions = []
    for start, _, end, surface, resolved in candidates:
        if any(start < e and s < end for s, e in taken):
            continue
        taken.append((start, end))
        mentions.append((start, DateMention(surface, resolved)))
    mentions.sort(key=lambda item: item[0])
    return [mention for _, mention in mentions]
