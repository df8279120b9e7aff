import numpy as np
import pytest
import scipy.stats

from conftest import art, day, task_from
from tlsum import dateselect, evaluate
from tlsum.corpus import Timeline
from tlsum.evaluate import MethodConfig


def _tl(*pairs):
    return Timeline.from_pairs(
        [(day(iso), tuple(sents)) for iso, sents in pairs])


def test_rouge_tokens_basic():
    assert evaluate.rouge_tokens("The Storm, hit!") == ["the", "storm", "hit"]
    assert evaluate.rouge_tokens("The Storm hit", drop_stopwords=True) == [
        "storm", "hit"]
    assert evaluate.rouge_tokens("running quickly", stem=True) == [
        "run", "quickli"]


def test_rouge_n_unigram_hand_case():
    p, r, f = evaluate.rouge_n(["a", "b", "a"], ["a", "a", "c"], 1)
    assert (p, r, f) == (2 / 3, 2 / 3, pytest.approx(2 / 3))


def test_rouge_n_bigram_hand_case():
    p, r, f = evaluate.rouge_n(["a", "b", "c"], ["a", "b", "d"], 2)
    assert (p, r) == (0.5, 0.5)
    assert f == pytest.approx(0.5)


def test_rouge_n_clipping():
    # candidate repeats "a" 4 times; the reference has it twice
    p, r, f = evaluate.rouge_n(["a"] * 4, ["a", "a", "b"], 1)
    assert p == 0.5
    assert r == pytest.approx(2 / 3)


def test_rouge_n_empty_sides():
    assert evaluate.rouge_n([], ["a"], 1) == (0.0, 0.0, 0.0)
    assert evaluate.rouge_n(["a"], [], 1) == (0.0, 0.0, 0.0)
    assert evaluate.rouge_n(["x"], ["y"], 1) == (0.0, 0.0, 0.0)
    # too short for bigrams
    assert evaluate.rouge_n(["a"], ["a"], 2) == (0.0, 0.0, 0.0)


def test_date_f1_cases():
    a = _tl(("2011-01-02", ("x",)), ("2011-01-04", ("y",)))
    b = _tl(("2011-01-04", ("x",)), ("2011-01-06", ("y",)))
    assert evaluate.date_f1(a, a) == (1.0, 1.0, 1.0)
    p, r, f = evaluate.date_f1(a, b)
    assert (p, r) == (0.5, 0.5)
    assert f == pytest.approx(0.5)
    assert evaluate.date_f1(Timeline(), a) == (0.0, 0.0, 0.0)


def test_alignment_identity_is_exact_one():
    tl = _tl(("2011-01-02", ("the storm hit",)),
             ("2011-01-05", ("cleanup has begun", "rain stopped")))
    assert evaluate.alignment_rouge(tl, tl, 1) == 1.0
    assert evaluate.alignment_rouge(tl, tl, 2) == 1.0


def test_alignment_day_shift_discount():
    sys = _tl(("2011-01-02", ("a b",)))
    ref = _tl(("2011-01-03", ("a b",)))
    assert evaluate.alignment_rouge(sys, ref, 1) == pytest.approx(0.5)


def test_alignment_prefers_nearer_date():
    sys = _tl(("2011-01-02", ("a b",)))
    ref = _tl(("2011-01-03", ("a b",)), ("2011-01-05", ("a b",)))
    # precision aligns to 01-03 (weight 1/2); recall direction adds the
    # far entry at weight 1/4: P = 1/2, R = 3/8, F = 3/7
    assert evaluate.alignment_rouge(sys, ref, 1) == pytest.approx(3 / 7)


def test_alignment_zero_overlap_and_empty():
    sys = _tl(("2011-01-02", ("alpha",)))
    ref = _tl(("2011-01-02", ("omega",)))
    assert evaluate.alignment_rouge(sys, ref, 1) == 0.0
    assert evaluate.alignment_rouge(Timeline(), ref, 1) == 0.0
    assert evaluate.alignment_rouge(sys, Timeline(), 1) == 0.0


def _cand(article_id, text):
    return art(article_id, day("2011-01-02"), [text]).sentences[0]


def test_greedy_oracle_picks_best_then_stops_on_decrease():
    cands = [_cand("a00", "alpha beta."), _cand("a01", "gamma delta.")]
    got = evaluate.greedy_oracle(cands, ("alpha beta",), k=2)
    # adding the second sentence would halve precision
    assert [s.article_id for s in got] == ["a00"]


def test_greedy_oracle_continues_through_ties():
    # the punctuation-only sentence has no tokens: adding it leaves the
    # objective unchanged, which must not stop the loop
    cands = [_cand("a00", "alpha."), _cand("a01", "!!!")]
    got = evaluate.greedy_oracle(cands, ("alpha",), k=2)
    assert [s.article_id for s in got] == ["a00", "a01"]


def test_greedy_oracle_respects_k_and_empty_pool():
    cands = [_cand("a%02d" % i, "alpha beta gamma.") for i in range(5)]
    got = evaluate.greedy_oracle(cands, ("alpha beta gamma",), k=2)
    assert len(got) <= 2
    assert evaluate.greedy_oracle([], ("alpha",), k=3) == []


def test_greedy_oracle_builds_up_recall():
    cands = [_cand("a00", "alpha."), _cand("a01", "beta."),
             _cand("a02", "noise word.")]
    got = evaluate.greedy_oracle(cands, ("alpha beta",), k=3)
    assert {s.article_id for s in got} == {"a00", "a01"}


def test_oracle_pool_window_mentions_and_dedup():
    articles = [
        art("w", day("2011-01-05"),
            ["s0.", "s1.", "s2.", "s3.", "s4.", "s5.", "s6 recalls 2011-01-02."]),
        art("far", day("2011-02-20"), ["Much later, 2011-01-02 again."]),
        art("out", day("2011-01-08"), ["Too late for the window."]),
    ]
    entries = [(day("2011-01-01"), ("x",)), (day("2011-03-01"), ("y",))]
    task = task_from(articles, entries)
    pool = evaluate.oracle_pool(task, day("2011-01-02"))
    keys = [(s.article_id, s.index) for s in pool]
    # w is published within 5 days: first five sentences, plus s6 via its
    # mention; far contributes through its mention alone
    assert keys == [("far", 0)] + [("w", i) for i in range(5)] + [("w", 6)]
    assert len(keys) == len(set(keys))


def test_nearest_reference_tie_goes_earlier():
    gt = _tl(("2011-01-02", ("early summary",)), ("2011-01-06", ("late summary",)))
    assert evaluate._nearest_reference(day("2011-01-04"), gt) == ("early summary",)
    assert evaluate._nearest_reference(day("2011-01-06"), gt) == ("late summary",)


def _oracle_task():
    articles = [
        art("a1", day("2011-01-02"), ["A zephyr struck the coast.",
                                      "Residents fled inland quickly."]),
        art("a2", day("2011-01-06"), ["The zephyr cleanup began in town.",
                                      "Officials counted the cost."]),
    ]
    entries = [
        (day("2011-01-02"), ("A zephyr struck the coast.",)),
        (day("2011-01-06"), ("The zephyr cleanup began.",)),
    ]
    return task_from(articles, entries, queries=("zephyr",))


def test_oracle_timeline_full_hits_references():
    task = _oracle_task()
    tl = evaluate.oracle_timeline(task, "full")
    assert tl.dates == (day("2011-01-02"), day("2011-01-06"))
    assert tl.entries[0][1] == ("A zephyr struck the coast.",)
    ar1, _, df1 = evaluate.evaluate_timeline(tl, task.ground_truth)
    assert df1 == 1.0
    assert ar1 > 0.8


def test_oracle_timeline_date_mode_uses_centroid():
    task = _oracle_task()
    tl = evaluate.oracle_timeline(task, "date")
    assert tl.dates == (day("2011-01-02"), day("2011-01-06"))
    for _, sents in tl.entries:
        assert all("zephyr" in s.lower() for s in sents)


def test_oracle_timeline_mode_validation():
    task = _oracle_task()
    with pytest.raises(ValueError, match="unknown oracle mode"):
        evaluate.oracle_timeline(task, "cheat")
    with pytest.raises(ValueError, match="regression date model"):
        evaluate.oracle_timeline(task, "text")


def test_oracle_timeline_omits_dates_without_eligible_pool():
    articles = [
        art("a1", day("2011-01-02"), ["A zephyr struck the coast."]),
        art("a2", day("2011-01-20"), ["Unrelated council meeting news."]),
    ]
    entries = [
        (day("2011-01-02"), ("A zephyr struck.",)),
        (day("2011-01-20"), ("Council met.",)),
    ]
    task = task_from(articles, entries, queries=("zephyr",))
    tl = evaluate.oracle_timeline(task, "full")
    assert tl.dates == (day("2011-01-02"),)


def test_approx_randomization_identical_scores():
    scores = [0.4, 0.6, 0.5, 0.7]
    assert evaluate.approx_randomization(scores, scores, resamples=200) == 1.0


def test_approx_randomization_separated_scores():
    a = [0.9 + 0.01 * i for i in range(20)]
    b = [0.1 + 0.01 * i for i in range(20)]
    p = evaluate.approx_randomization(a, b, resamples=500)
    assert p < 0.01


def test_approx_randomization_determinism_and_bounds():
    rng = np.random.default_rng(2)
    a = rng.random(10)
    b = rng.random(10)
    p1 = evaluate.approx_randomization(a, b, resamples=300, seed=7)
    p2 = evaluate.approx_randomization(a, b, resamples=300, seed=7)
    assert p1 == p2
    assert 0.0 < p1 <= 1.0


def test_approx_randomization_input_validation():
    with pytest.raises(ValueError, match="equal length"):
        evaluate.approx_randomization([1.0, 2.0], [1.0], resamples=10)
    with pytest.raises(ValueError, match="at least 2"):
        evaluate.approx_randomization([1.0], [2.0], resamples=10)


def test_spearman_hand_cases():
    assert evaluate.spearman([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)
    assert evaluate.spearman([1, 2, 3, 4], [40, 30, 20, 10]) == pytest.approx(-1.0)
    # tied xs get rank 2.5 each; the correlation comes out at 3 / sqrt(10)
    got = evaluate.spearman([1, 2, 2, 3], [1, 2, 3, 4])
    assert got == pytest.approx(3 / 10 ** 0.5)


def test_spearman_matches_scipy_on_random_data():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(3, 30))
        xs = rng.integers(0, 6, size=n).astype(float)  # many ties
        ys = xs + rng.normal(0, 2.0, size=n)
        try:
            got = evaluate.spearman(xs, ys)
        except ValueError:
            assert np.all(xs == xs[0]) or np.all(ys == ys[0])
            continue
        want = scipy.stats.spearmanr(xs, ys).correlation
        assert got == pytest.approx(want, abs=1e-10)


def test_spearman_input_validation():
    with pytest.raises(ValueError, match="at least 3"):
        evaluate.spearman([1, 2], [3, 4])
    with pytest.raises(ValueError, match="zero-variance"):
        evaluate.spearman([1, 1, 1], [1, 2, 3])


def test_adjacent_date_ratio():
    tl = _tl(("2011-01-02", ("a",)), ("2011-01-03", ("b",)),
             ("2011-01-07", ("c",)), ("2011-01-08", ("d",)),
             ("2011-01-11", ("e",)))
    assert evaluate.adjacent_date_ratio(tl) == pytest.approx(0.5)
    assert evaluate.adjacent_date_ratio(_tl(("2011-01-02", ("a",)))) == 0.0
    assert evaluate.adjacent_date_ratio(Timeline()) == 0.0
    run = _tl(("2011-01-02", ("a",)), ("2011-01-03", ("b",)),
              ("2011-01-04", ("c",)))
    assert evaluate.adjacent_date_ratio(run) == 1.0


def test_aggregate_results_and_csv():
    per_task = [("t2", (0.4, 0.2, 0.6)), ("t1", (0.2, 0.0, 0.4))]
    res = evaluate.aggregate_results(per_task)
    assert res.per_task[0][0] == "t1"  # sorted
    assert res.ar1_f == pytest.approx(0.3)
    assert res.ar2_f == pytest.approx(0.1)
    assert res.date_f1 == pytest.approx(0.5)
    csv = res.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "task,ar1_f,ar2_f,date_f1"
    assert lines[1] == "t1,0.200000,0.000000,0.400000"
    assert lines[-1] == "MEAN,0.300000,0.100000,0.500000"
    doc = res.to_dict()
    assert doc["aggregate"]["ar1_f"] == pytest.approx(0.3)
    assert doc["per_task"]["t2"]["date_f1"] == 0.6


def test_aggregate_results_empty():
    res = evaluate.aggregate_results([])
    assert (res.ar1_f, res.ar2_f, res.date_f1) == (0.0, 0.0, 0.0)


def test_method_config_flags():
    assert not MethodConfig().is_supervised
    clf = MethodConfig(date_selector="supervised-clf")
    assert clf.needs_date_model and not clf.needs_cluster_model
    reg = MethodConfig(method="clust", cluster_ranker="regression-rouge")
    assert reg.needs_cluster_model and not reg.needs_date_model
    assert reg.is_supervised
    # a clust config never needs a date model, whatever the selector says
    assert not MethodConfig(method="clust",
                            date_selector="supervised-clf").needs_date_model


def _loocv_task(name, base):
    articles = [
        art(name + "a1", day(base), ["A zephyr struck the coast on %s." % base]),
        art(name + "a2", day(base), ["The zephyr struck hard, people said."]),
    ]
    entries = [(day(base), ("A zephyr struck the coast.",))]
    return task_from(articles, entries, queries=("zephyr",), name=name)


def test_loocv_unsupervised_matches_direct_builds():
    tasks = [_loocv_task("t1", "2011-01-02"), _loocv_task("t2", "2011-03-05")]
    config = MethodConfig()
    res = evaluate.loocv(tasks, config)
    for task in tasks:
        direct = evaluate.build_for_task(task, config)
        want = evaluate.evaluate_timeline(direct, task.ground_truth)
        got = dict(res.per_task)[task.name]
        assert got == want
    assert [name for name, _ in res.per_task] == ["t1", "t2"]


def test_loocv_input_validation():
    with pytest.raises(ValueError, match="zero tasks"):
        evaluate.loocv([], MethodConfig())
    sup = MethodConfig(date_selector="supervised-clf")
    with pytest.raises(ValueError, match="at least 2"):
        evaluate.loocv([_loocv_task("t1", "2011-01-02")], sup)


def test_build_for_task_unknown_method():
    task = _loocv_task("t1", "2011-01-02")
    with pytest.raises(ValueError, match="unknown method"):
        evaluate.build_for_task(task, MethodConfig(method="magic"))


def test_build_for_task_pubcount_matches_explicit_config():
    task = _loocv_task("t1", "2011-01-02")
    from tlsum import datewise
    want = datewise.build_datewise_timeline(task, datewise.DatewiseConfig(
        date_selector="pubcount", candidate_strategy="pub-day",
        summarizer="centroid-opt"))
    got = evaluate.build_for_task(task, MethodConfig(method="pubcount"))
    assert got == want


def test_train_models_unsupervised_is_noop():
    assert evaluate.train_models(MethodConfig(), []) == (None, None)


def test_train_models_supervised_clf():
    articles = [
        art("a1", day("2011-01-02"),
            ["On 2011-01-02 it began here.", "On 2011-01-04 more will come."]),
        art("a2", day("2011-01-02"), ["Quiet filler piece."]),
        art("a3", day("2011-01-04"), ["On 2011-01-04 it grew louder."]),
        art("a4", day("2011-01-06"), ["Looking back at 2011-01-04 events."]),
    ]
    entries = [(day("2011-01-02"), ("s1",)), (day("2011-01-06"), ("s2",))]
    task = task_from(articles, entries)
    config = MethodConfig(date_selector="supervised-clf")
    date_model, cluster_model = evaluate.train_models(config, [task])
    assert date_model is not None
    assert cluster_model is None
    assert date_model.mode == dateselect.MODE_CLASSIFICATION
