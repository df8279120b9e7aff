import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tlsum import vectors
from tlsum.vectors import SparseVector


def test_tokenize_lowercases_and_splits_on_non_alnum():
    assert vectors.tokenize("On 2021-03-05, Zephyr struck!") == [
        "on", "2021", "03", "05", "zephyr", "struck"]


def test_tokenize_only_punctuation():
    assert vectors.tokenize("--- !! ??") == []


def test_stopwords_shipped_and_cached():
    stop = vectors.stopwords()
    assert "the" in stop and "and" in stop and "was" in stop
    assert "storm" not in stop
    assert vectors.stopwords() is stop


def test_sparse_vector_rejects_unsorted_and_duplicate_indices():
    with pytest.raises(ValueError):
        SparseVector(((2, 1.0), (1, 1.0)))
    with pytest.raises(ValueError):
        SparseVector(((1, 1.0), (1, 2.0)))


def test_sparse_vector_rejects_explicit_zero():
    with pytest.raises(ValueError):
        SparseVector(((0, 0.0),))


def test_sparse_vector_support_and_truthiness():
    v = SparseVector(((1, 0.5), (4, -2.0)))
    assert v.support == (1, 4)
    assert len(v) == 2 and v
    assert not SparseVector()
    assert SparseVector().norm() == 0.0


def test_fit_idf_hand_values():
    units = [["a", "b"], ["b", "c"], ["b"]]
    model = vectors.fit(units, stop=frozenset())
    assert model.vocabulary == {"a": 0, "b": 1, "c": 2}
    assert model.n_docs == 3
    # idf = ln((1+N)/(1+df)) + 1
    assert model.idf[0] == pytest.approx(math.log(4 / 2) + 1)
    assert model.idf[1] == pytest.approx(math.log(4 / 4) + 1)
    assert model.idf[2] == pytest.approx(math.log(4 / 2) + 1)


def test_fit_drops_stopwords_by_default():
    model = vectors.fit([["the", "storm", "hit"], ["storm"]])
    assert "the" not in model.vocabulary
    assert "storm" in model.vocabulary


def test_fit_error_cases():
    with pytest.raises(ValueError):
        vectors.fit([])
    with pytest.raises(ValueError):
        vectors.fit([["the", "and"]])  # everything is a stopword


def test_vectorize_hand_values():
    model = vectors.fit([["a", "b"], ["b", "c"], ["b"]], stop=frozenset())
    v = vectors.vectorize(["a", "a", "b", "zzz"], model)
    ia = math.log(2.0) + 1
    raw = [2 * ia, 1.0]
    norm = math.hypot(*raw)
    assert v.support == (0, 1)
    assert v.pairs[0][1] == pytest.approx(raw[0] / norm)
    assert v.pairs[1][1] == pytest.approx(raw[1] / norm)
    assert v.norm() == pytest.approx(1.0)


def test_vectorize_all_oov_gives_empty():
    model = vectors.fit([["a"]], stop=frozenset())
    v = vectors.vectorize(["zzz", "yyy"], model)
    assert not v


def test_dot_and_cosine_hand_values():
    a = SparseVector(((0, 3.0), (2, 4.0)))
    b = SparseVector(((2, 2.0),))
    assert vectors.dot(a, b) == pytest.approx(8.0)
    assert vectors.cosine(a, b) == pytest.approx(8.0 / (5.0 * 2.0))
    assert vectors.cosine(SparseVector(), a) == 0.0


def test_add_merges_and_cancels():
    a = SparseVector(((0, 3.0), (2, 4.0)))
    b = SparseVector(((2, 2.0), (5, 1.0)))
    assert vectors.add(a, b).pairs == ((0, 3.0), (2, 6.0), (5, 1.0))
    c = SparseVector(((0, 1.0),))
    d = SparseVector(((0, -1.0),))
    assert vectors.add(c, d).pairs == ()


def test_normalized():
    v = SparseVector(((0, 3.0), (1, 4.0)))
    n = vectors.normalized(v)
    assert n.norm() == pytest.approx(1.0)
    assert vectors.normalized(SparseVector()).pairs == ()


def test_mean_is_not_renormalized():
    e0 = SparseVector(((0, 1.0),))
    e1 = SparseVector(((1, 1.0),))
    m = vectors.mean([e0, e1])
    assert m.pairs == ((0, 0.5), (1, 0.5))
    assert m.norm() < 1.0
    with pytest.raises(ValueError):
        vectors.mean([])


_weights = st.floats(-2.0, 2.0, allow_nan=False).filter(lambda w: abs(w) > 1e-6)
_vec_dicts = st.dictionaries(st.integers(0, 6), _weights, max_size=5)


def _to_vec(d):
    return SparseVector(tuple(sorted(d.items())))


@given(_vec_dicts, _vec_dicts)
def test_dot_matches_dense_and_is_symmetric(da, db):
    va, vb = _to_vec(da), _to_vec(db)
    dense = sum(da.get(i, 0.0) * db.get(i, 0.0) for i in set(da) | set(db))
    assert vectors.dot(va, vb) == pytest.approx(dense, abs=1e-12)
    assert vectors.dot(va, vb) == vectors.dot(vb, va)


@given(st.lists(_vec_dicts, min_size=1, max_size=6))
def test_mean_matches_dense(dicts):
    vecs = [_to_vec(d) for d in dicts]
    m = vectors.mean(vecs)
    got = dict(m.pairs)
    for i in range(7):
        expected = sum(d.get(i, 0.0) for d in dicts) / len(dicts)
        assert got.get(i, 0.0) == pytest.approx(expected, abs=1e-12)
