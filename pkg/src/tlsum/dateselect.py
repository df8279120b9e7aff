"""Candidate date enumeration and ranking.

Dates are ranked by publication count, by mention count, or by a small
supervised linear model over count features. Both supervised modes share
one deterministic solver pair: full-batch gradient descent for logistic
classification, a closed-form ridge solve for regression.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np
from scipy.special import expit

FEATURE_NAMES = (
    "pub_count",
    "mention_count",
    "mentions_before",
    "mentions_same_day",
    "mentions_after",
    "mentions_first5",
    "pub_count_win1",
    "mention_count_win1",
)
FEATURE_SCHEMA_VERSION = 1

L2_PENALTY = 1e-4
LOGISTIC_LR = 0.1
LOGISTIC_EPOCHS = 500

MODE_CLASSIFICATION = "classification"
MODE_REGRESSION = "regression"


@dataclass(frozen=True)
class DateStats:
    date: date
    pub_count: int
    mention_count: int


def collect_dates(task) -> list[DateStats]:
    """Candidate dates: the union of publication dates and resolved mention
    dates inside the ground-truth span, with exact counts.

    mention_count counts sentences mentioning the date (a sentence that
    mentions it twice counts once)."""
    if not task.ground_truth.entries:
        return []
    first = task.ground_truth.dates[0]
    last = task.ground_truth.dates[-1]
    pub = Counter()
    men = Counter()
    for article in task.articles:
        pub[article.pub_date] += 1
        for sentence in article.sentences:
            for day in {m.resolved for m in sentence.mentions}:
                men[day] += 1
    days = sorted(d for d in set(pub) | set(men) if first <= d <= last)
    return [DateStats(d, pub.get(d, 0), men.get(d, 0)) for d in days]


def rank_pubcount(stats) -> list[date]:
    """Descending publication count; ties go to the earlier date."""
    return [s.date for s in sorted(stats, key=lambda s: (-s.pub_count, s.date))]


def rank_mentioncount(stats) -> list[date]:
    """Descending mention count; ties go to the earlier date."""
    return [s.date for s in sorted(stats, key=lambda s: (-s.mention_count, s.date))]


def date_features(task, stats=None) -> dict[date, tuple[float, ...]]:
    """The 8 ranking features for every candidate date of a task.

    Directional counts (before / same day / after) compare the sentence's
    publication date against the mentioned date; the window features add
    up the point counts over a 1-day neighborhood."""
    if stats is None:
        stats = collect_dates(task)
    pub = Counter()
    men = Counter()
    men_before = Counter()
    men_same = Counter()
    men_after = Counter()
    men_first5 = Counter()
    for article in task.articles:
        pub[article.pub_date] += 1
        for sentence in article.sentences:
            for day in {m.resolved for m in sentence.mentions}:
                men[day] += 1
                if sentence.pub_date < day:
                    men_before[day] += 1
                elif sentence.pub_date == day:
                    men_same[day] += 1
                else:
                    men_after[day] += 1
                if sentence.index < 5:
                    men_first5[day] += 1
    one = timedelta(days=1)
    features = {}
    for s in stats:
        d = s.date
        features[d] = (
            float(pub[d]),
            float(men[d]),
            float(men_before[d]),
            float(men_same[d]),
            float(men_after[d]),
            float(men_first5[d]),
            float(pub[d - one] + pub[d] + pub[d + one]),
            float(men[d - one] + men[d] + men[d + one]),
        )
    return features


@dataclass(frozen=True)
class LinearModel:
    """Standardized linear scorer shared by date selection and cluster
    ranking. feature_stds stores 0.0 for constant features; those features
    are zeroed out instead of divided."""

    weights: tuple[float, ...]
    bias: float
    mode: str
    feature_means: tuple[float, ...]
    feature_stds: tuple[float, ...]
    schema_version: int = FEATURE_SCHEMA_VERSION

    def score(self, features) -> float:
        """Raw decision value (margin for classification); monotone in the
        predicted probability, so ranking by it is equivalent."""
        if len(features) != len(self.weights):
            raise ValueError(
                "feature length mismatch: model has %d, got %d"
                % (len(self.weights), len(features)))
        total = self.bias
        for x, w, mu, sd in zip(features, self.weights, self.feature_means, self.feature_stds):
            z = 0.0 if sd == 0.0 else (x - mu) / sd
            total += w * z
        return total

    def predict_proba(self, features) -> float:
        return float(expit(self.score(features)))


def _standardize_fit(X: np.ndarray):
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    return means, stds


def _standardize_apply(X: np.ndarray, means, stds) -> np.ndarray:
    Z = np.zeros_like(X, dtype=float)
    nonconstant = stds != 0.0
    Z[:, nonconstant] = (X[:, nonconstant] - means[nonconstant]) / stds[nonconstant]
    return Z


def _fit_logistic(Z: np.ndarray, y: np.ndarray):
    """Full-batch gradient descent on mean cross-entropy with an L2 penalty
    on the weights only. Fixed schedule, zero init: fully deterministic."""
    n, p = Z.shape
    w = np.zeros(p)
    b = 0.0
    for _ in range(LOGISTIC_EPOCHS):
        prob = expit(Z @ w + b)
        err = prob - y
        grad_w = Z.T @ err / n + L2_PENALTY * w
        grad_b = err.mean()
        w = w - LOGISTIC_LR * grad_w
        b = b - LOGISTIC_LR * grad_b
    return w, b


def _fit_ridge(Z: np.ndarray, y: np.ndarray):
    """Closed-form ridge on standardized features with centered targets."""
    n, p = Z.shape
    y_mean = y.mean()
    A = Z.T @ Z + n * L2_PENALTY * np.eye(p)
    rhs = Z.T @ (y - y_mean)
    w = np.linalg.solve(A, rhs)
    return w, y_mean


def fit_linear(rows, labels, mode: str) -> LinearModel:
    X = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise ValueError("training rows and labels do not line up")
    if np.all(y == y[0]):
        raise ValueError("degenerate-labels")
    means, stds = _standardize_fit(X)
    Z = _standardize_apply(X, means, stds)
    if mode == MODE_CLASSIFICATION:
        w, b = _fit_logistic(Z, y)
    elif mode == MODE_REGRESSION:
        w, b = _fit_ridge(Z, y)
    else:
        raise ValueError("unknown mode %r" % mode)
    return LinearModel(
        weights=tuple(float(v) for v in w),
        bias=float(b),
        mode=mode,
        feature_means=tuple(float(v) for v in means),
        feature_stds=tuple(float(v) for v in stds),
    )


def train_date_selector(training_tasks, mode: str) -> LinearModel:
    """Fit the supervised date selector. Labels: 1 when a candidate date
    appears in its task's ground-truth timeline, else 0."""
    rows = []
    labels = []
    for task in training_tasks:
        stats = collect_dates(task)
        features = date_features(task, stats)
        gold = set(task.ground_truth.dates)
        for s in stats:
            rows.append(features[s.date])
            labels.append(1.0 if s.date in gold else 0.0)
    if not rows:
        raise ValueError("no candidate dates in the training tasks")
    return fit_linear(rows, labels, mode)


def rank_dates_supervised(task, model: LinearModel, stats=None) -> list[date]:
    """Descending model score; ties go to the earlier date."""
    if stats is None:
        stats = collect_dates(task)
    features = date_features(task, stats)
    scored = [(model.score(features[s.date]), s.date) for s in stats]
    scored.sort(key=lambda item: (-item[0], item[1]))
    return [d for _, d in scored]


def model_to_dict(model: LinearModel, feature_names=None) -> dict:
    return {
        "schema_version": model.schema_version,
        "mode": model.mode,
        "weights": list(model.weights),
        "bias": model.bias,
        "feature_means": list(model.feature_means),
        "feature_stds": list(model.feature_stds),
        "feature_names": list(feature_names) if feature_names else list(FEATURE_NAMES),
    }


def model_from_dict(doc: dict) -> LinearModel:
    if doc.get("schema_version") != FEATURE_SCHEMA_VERSION:
        raise ValueError("unsupported model schema version %r" % doc.get("schema_version"))
    return LinearModel(
        weights=tuple(float(v) for v in doc["weights"]),
        bias=float(doc["bias"]),
        mode=str(doc["mode"]),
        feature_means=tuple(float(v) for v in doc["feature_means"]),
        feature_stds=tuple(float(v) for v in doc["feature_stds"]),
        schema_version=int(doc["schema_version"]),
    )


def save_model(model: LinearModel, path, feature_names=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model, feature_names), fh, indent=1)


def load_model(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
