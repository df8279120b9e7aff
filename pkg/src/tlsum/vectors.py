"""Sparse unigram TF-IDF vectors and similarity kernels.

Every downstream stage (date selection, summarization, clustering) works on
the same representation: L2-normalized sparse bag-of-words vectors with
smoothed IDF weights. Models are fitted per task and never shared.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")

_stopword_cache = None


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop empty tokens."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def stopwords() -> frozenset[str]:
    """The built-in English stopword list shipped as package data."""
    global _stopword_cache
    if _stopword_cache is None:
        raw = resources.files("tlsum").joinpath("data/stopwords.txt").read_text("utf-8")
        _stopword_cache = frozenset(w.strip() for w in raw.splitlines() if w.strip())
    return _stopword_cache


@dataclass(frozen=True)
class SparseVector:
    """Sorted (feature index, weight) pairs; no explicit zeros."""

    pairs: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        last = -1
        for idx, weight in self.pairs:
            if idx <= last:
                raise ValueError("feature indices must be strictly increasing")
            if weight == 0.0:
                raise ValueError("explicit zero weight at feature %d" % idx)
            last = idx

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.pairs)

    def norm(self) -> float:
        return math.sqrt(sum(w * w for _, w in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __bool__(self) -> bool:
        return bool(self.pairs)


@dataclass(frozen=True)
class TfidfModel:
    """Immutable vocabulary + IDF table fitted on one collection."""

    vocabulary: dict[str, int]
    idf: tuple[float, ...]
    n_docs: int

    @property
    def n_features(self) -> int:
        return len(self.idf)


def fit(units, stop=None) -> TfidfModel:
    """Fit IDF weights on tokenized units (sentences, or whole articles).

    idf(t) = ln((1 + N) / (1 + df(t))) + 1, N = number of units. The smoothing
    keeps every idf strictly positive. Stopwords are removed before counting;
    pass stop=frozenset() to keep them.
    """
    if not units:
        raise ValueError("cannot fit a tf-idf model on zero units")
    if stop is None:
        stop = stopwords()
    df = Counter()
    for unit in units:
        df.update({t for t in unit if t not in stop})
    if not df:
        raise ValueError("cannot fit a tf-idf model: all units empty")
    vocabulary = {t: i for i, t in enumerate(sorted(df))}
    n = len(units)
    idf = [0.0] * len(vocabulary)
    for token, i in vocabulary.items():
        idf[i] = math.log((1 + n) / (1 + df[token])) + 1.0
    return TfidfModel(vocabulary, tuple(idf), n)


def vectorize(tokens, model: TfidfModel) -> SparseVector:
    """Raw term count times idf, L2-normalized. OOV tokens are ignored."""
    counts = Counter()
    vocabulary = model.vocabulary
    for t in tokens:
        i = vocabulary.get(t)
        if i is not None:
            counts[i] += 1
    if not counts:
        return SparseVector()
    idf = model.idf
    weighted = [(i, c * idf[i]) for i, c in sorted(counts.items())]
    norm = math.sqrt(sum(w * w for _, w in weighted))
    return SparseVector(tuple((i, w / norm) for i, w in weighted))


def dot(a: SparseVector, b: SparseVector) -> float:
    pa, pb = a.pairs, b.pairs
    na, nb = len(pa), len(pb)
    i = j = 0
    total = 0.0
    while i < na and j < nb:
        fa = pa[i][0]
        fb = pb[j][0]
        if fa == fb:
            total += pa[i][1] * pb[j][1]
            i += 1
            j += 1
        elif fa < fb:
            i += 1
        else:
            j += 1
    return total


def cosine(a: SparseVector, b: SparseVector) -> float:
    """Cosine similarity; 0.0 when either operand is empty."""
    na = a.norm()
    nb = b.norm()
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot(a, b) / (na * nb)


def normalized(v: SparseVector) -> SparseVector:
    n = v.norm()
    if n == 0.0:
        return v
    return SparseVector(tuple((i, w / n) for i, w in v.pairs))


def add(a: SparseVector, b: SparseVector) -> SparseVector:
    """Elementwise sum. Used for running sums in greedy summarizers."""
    pa, pb = a.pairs, b.pairs
    na, nb = len(pa), len(pb)
    i = j = 0
    out = []
    while i < na and j < nb:
        fa, wa = pa[i]
        fb, wb = pb[j]
        if fa == fb:
            s = wa + wb
            if s != 0.0:
                out.append((fa, s))
            i += 1
            j += 1
        elif fa < fb:
            out.append((fa, wa))
            i += 1
        else:
            out.append((fb, wb))
            j += 1
    out.extend(pa[i:])
    out.extend(pb[j:])
    return SparseVector(tuple(out))


def mean(vectors) -> SparseVector:
    """Elementwise arithmetic mean. Deliberately NOT renormalized: the date
    vector combination consumes raw means."""
    vectors = list(vectors)
    if not vectors:
        raise ValueError("mean of zero vectors")
    acc: dict[int, float] = {}
    for v in vectors:
        for i, w in v.pairs:
            acc[i] = acc.get(i, 0.0) + w
    n = len(vectors)
    return SparseVector(tuple((i, acc[i] / n) for i in sorted(acc)))
