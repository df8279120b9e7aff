from datetime import date

from tlsum.corpus import Task, Timeline, build_article


def art(article_id, day, texts, title=""):
    """Shorthand article factory used across the suite."""
    return build_article(article_id, title, day, texts)


def task_from(articles, entries, queries=(), name="t"):
    return Task(
        name=name,
        articles=tuple(articles),
        queries=tuple(queries),
        ground_truth=Timeline.from_pairs(entries),
        topic=name,
    )


def day(iso: str) -> date:
    return date.fromisoformat(iso)
