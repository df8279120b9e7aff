"""Article collection client for the Guardian content-search API.

Requests run one at a time, responses land in an on-disk cache keyed by
the request parameters (the API key never enters the cache key), and
transient failures retry with exponential backoff. Fetched articles are
deduplicated, restricted to bodies containing the exact query phrase,
and returned in (pub_date, id) order.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from datetime import date, timedelta

import requests

from .corpus import build_article, split_sentences

API_URL = "https://content.guardianapis.com/search"
API_KEY_ENV = "GUARDIAN_API_KEY"
PAGE_SIZE = 50
MAX_ATTEMPTS = 3
BACKOFF_BASE_SECONDS = 1.0
SPAN_PAD_FRACTION = 0.10


class FetchError(RuntimeError):
    pass


def padded_span(timeline) -> tuple[date, date]:
    """The query window: the timeline span widened by 10% of its length
    on each side."""
    days = timeline.dates
    if not days:
        raise ValueError("cannot pad an empty timeline")
    first, last = days[0], days[-1]
    duration = (last - first).days + 1
    pad = timedelta(days=int(round(duration * SPAN_PAD_FRACTION)))
    return (first - pad, last + pad)


def _cache_key(params: dict) -> str:
    # canonical form excludes the api key so caches survive key rotation
    shown = sorted((k, str(v)) for k, v in params.items() if k != "api-key")
    blob = "&".join("%s=%s" % kv for kv in shown)
    return hashlib.sha1(blob.encode("utf-8")).hexdigest()


def _get_page(session, params, cache_dir, sleep) -> dict:
    """One API page, served from cache when possible. Network errors and
    bad statuses retry up to 3 times with doubling delays."""
    cache_path = None
    if cache_dir:
        cache_path = os.path.join(cache_dir, _cache_key(params) + ".json")
        if os.path.exists(cache_path):
            with open(cache_path, encoding="utf-8") as fh:
                return json.load(fh)
    last_error = None
    for attempt in range(MAX_ATTEMPTS):
        if attempt:
            sleep(BACKOFF_BASE_SECONDS * (2 ** (attempt - 1)))
        try:
            response = session.get(API_URL, params=params, timeout=30)
        except requests.RequestException as exc:
            last_error = "request failed: %s" % exc
            continue
        if response.status_code != 200:
            last_error = "HTTP %d" % response.status_code
            continue
        payload = response.json()
        if cache_path:
            os.makedirs(cache_dir, exist_ok=True)
            tmp = cache_path + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, ensure_ascii=False)
            os.replace(tmp, cache_path)
        return payload
    raise FetchError("giving up after %d attempts: %s" % (MAX_ATTEMPTS, last_error))


def fetch_guardian(query: str, span: tuple[date, date], api_key=None,
                   cache_dir=None, page_size: int = PAGE_SIZE,
                   session=None, sleep=time.sleep):
    """All articles matching the exact query phrase inside the span.

    The key falls back to the GUARDIAN_API_KEY environment variable.
    Pagination is sequential; a page is fetched again only on cache miss.
    """
    if api_key is None:
        api_key = os.environ.get(API_KEY_ENV, "")
    if not api_key:
        raise FetchError("no API key: pass one or set %s" % API_KEY_ENV)
    if session is None:
        session = requests.Session()
    base = {
        "q": '"%s"' % query,
        "from-date": span[0].isoformat(),
        "to-date": span[1].isoformat(),
        "order-by": "oldest",
        "show-fields": "bodyText,headline",
        "page-size": page_size,
        "api-key": api_key,
    }
    articles = []
    seen_ids = set()
    needle = query.lower()
    page = 1
    while True:
        payload = _get_page(session, dict(base, page=page), cache_dir, sleep)
        body = payload.get("response", {})
        for item in body.get("results", []):
            item_id = item.get("id")
            if not item_id or item_id in seen_ids:
                continue
            seen_ids.add(item_id)
            fields = item.get("fields") or {}
            text = (fields.get("bodyText") or "").strip()
            if not text or needle not in text.lower():
                continue
            when = item.get("webPublicationDate", "")
            try:
                pub = date.fromisoformat(when[:10])
            except ValueError:
                continue
            title = (fields.get("headline") or "").strip()
            articles.append(build_article(item_id, title, pub, split_sentences(text)))
        pages = int(body.get("pages", 1))
        if page >= pages:
            break
        page += 1
    articles.sort(key=lambda a: (a.pub_date, a.id))
    return articles
