import hashlib
import json
import os
import shutil
from datetime import date

import pytest

from tlsum import cli, corpus, guardian
from tlsum.corpus import build_article


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("dataset")
    for topic, seed in (("alpha", 1), ("beta", 2)):
        rc = cli.main([
            "synth", "--output", str(root), "--topic", topic,
            "--events", "3", "--articles-per-event", "2",
            "--noise", "5", "--span", "30", "--seed", str(seed)])
        assert rc == 0
    return str(root)


@pytest.fixture(scope="module")
def run_out(dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("runout")
    rc = cli.main(["run", "--dataset", dataset, "--output", str(out),
                   "--jobs", "1"])
    assert rc == 0
    return str(out)


def test_version_and_help_exit_zero(capsys):
    assert cli.main(["--version"]) == 0
    assert cli.main(["--help"]) == 0
    capsys.readouterr()


def test_config_errors_exit_one():
    assert cli.main([]) == 1
    assert cli.main(["no-such-command"]) == 1
    assert cli.main(["run", "--dataset", "x", "--output", "y",
                     "--method", "bogus"]) == 1


def test_missing_dataset_exits_two(tmp_path):
    rc = cli.main(["run", "--dataset", str(tmp_path / "nope"),
                   "--output", str(tmp_path / "out"), "--jobs", "1"])
    assert rc == 2


def test_run_writes_full_report(run_out, capsys):
    names = set(os.listdir(run_out))
    assert {"metrics.json", "metrics.csv", "manifest.json", "timings.csv",
            "timelines", "datefreq", "figures"} <= names
    assert sorted(os.listdir(os.path.join(run_out, "timelines"))) == [
        "alpha.json", "beta.json"]
    assert os.path.exists(os.path.join(run_out, "figures", "metrics.png"))
    assert os.path.exists(os.path.join(run_out, "figures", "alpha-datefreq.png"))
    metrics = json.load(open(os.path.join(run_out, "metrics.json")))
    assert set(metrics["per_task"]) == {"alpha", "beta"}
    # the synthetic story is fully recoverable
    assert metrics["aggregate"]["date_f1"] == 1.0


def test_manifest_hashes_every_output_except_timings(run_out):
    manifest = json.load(open(os.path.join(run_out, "manifest.json")))
    assert manifest["command"] == "run"
    assert manifest["config"]["method"] == "datewise"
    outputs = manifest["outputs"]
    assert "timings.csv" not in outputs
    assert "manifest.json" not in outputs
    assert "metrics.json" in outputs
    assert "timelines/alpha.json" in outputs
    for rel, digest in outputs.items():
        with open(os.path.join(run_out, rel), "rb") as fh:
            assert hashlib.sha256(fh.read()).hexdigest() == digest, rel


def test_timings_has_total_row(run_out):
    lines = open(os.path.join(run_out, "timings.csv")).read().strip().split("\n")
    assert lines[0] == "task,seconds"
    assert lines[-1].startswith("TOTAL,")
    assert len(lines) == 4  # header + 2 tasks + total


def test_run_topics_filter(dataset, tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli.main(["run", "--dataset", dataset, "--output", str(out),
                   "--jobs", "1", "--topics", "alpha"])
    assert rc == 0
    assert os.listdir(out / "timelines") == ["alpha.json"]
    assert "run: 1 tasks" in capsys.readouterr().out
    rc = cli.main(["run", "--dataset", dataset, "--output", str(tmp_path / "o2"),
                   "--jobs", "1", "--topics", "gamma"])
    assert rc == 2


def test_run_supervised_needs_two_tasks(dataset, tmp_path):
    rc = cli.main(["run", "--dataset", dataset, "--output", str(tmp_path / "out"),
                   "--jobs", "1", "--topics", "alpha",
                   "--date-selector", "supervised-clf"])
    assert rc == 1


def test_run_jobs_two_smoke(dataset, tmp_path):
    out = tmp_path / "out"
    rc = cli.main(["run", "--dataset", dataset, "--output", str(out),
                   "--jobs", "2"])
    assert rc == 0
    assert sorted(os.listdir(out / "timelines")) == ["alpha.json", "beta.json"]


def test_eval_reproduces_run_metrics(dataset, run_out, tmp_path):
    out = tmp_path / "evalout"
    rc = cli.main(["eval", "--dataset", dataset,
                   "--timelines", os.path.join(run_out, "timelines"),
                   "--output", str(out)])
    assert rc == 0
    got = (out / "metrics.json").read_bytes()
    want = open(os.path.join(run_out, "metrics.json"), "rb").read()
    assert got == want


def test_eval_prints_to_stdout_without_output(dataset, run_out, capsys):
    rc = cli.main(["eval", "--dataset", dataset,
                   "--timelines", os.path.join(run_out, "timelines")])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert "aggregate" in doc


def test_eval_no_matching_files_exits_two(dataset, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    rc = cli.main(["eval", "--dataset", dataset, "--timelines", str(empty)])
    assert rc == 2


def test_stats_stdout_and_file(dataset, tmp_path, capsys):
    assert cli.main(["stats", "--dataset", dataset]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_tasks"] == 2
    assert doc["n_topics"] == 2
    assert doc["avg_docs"] > 0
    out = tmp_path / "stats.json"
    assert cli.main(["stats", "--dataset", dataset, "--output", str(out)]) == 0
    assert json.loads(out.read_text()) == doc


def test_cross_validate_unsupervised(dataset, tmp_path, capsys):
    out = tmp_path / "cv"
    rc = cli.main(["cross-validate", "--dataset", dataset, "--output", str(out)])
    assert rc == 0
    assert "cross-validate: 2 folds" in capsys.readouterr().out
    metrics = json.load(open(out / "metrics.json"))
    assert set(metrics["per_task"]) == {"alpha", "beta"}
    manifest = json.load(open(out / "manifest.json"))
    assert manifest["command"] == "cross-validate"


def test_load_dataset_multiple_timelines_per_topic(dataset, tmp_path):
    root = tmp_path / "multi"
    shutil.copytree(os.path.join(dataset, "alpha"), str(root / "alpha"))
    shutil.copy(str(root / "alpha" / "timeline.json"),
                str(root / "alpha" / "timeline-extra.json"))
    tasks = cli.load_dataset(str(root))
    assert [t.name for t in tasks] == ["alpha", "alpha/timeline-extra"]
    assert all(t.topic == "alpha" for t in tasks)


def test_fetch_guardian_config_errors(tmp_path):
    rc = cli.main(["fetch-guardian", "--query", "storm",
                   "--output", str(tmp_path / "a.jsonl")])
    assert rc == 1
    rc = cli.main(["fetch-guardian", "--query", "storm",
                   "--from-date", "2011-02-01", "--to-date", "2011-01-01",
                   "--output", str(tmp_path / "a.jsonl")])
    assert rc == 1
    rc = cli.main(["fetch-guardian", "--query", "storm",
                   "--from-date", "not-a-date", "--to-date", "2011-01-01",
                   "--output", str(tmp_path / "a.jsonl")])
    assert rc == 1


def test_fetch_guardian_fetch_error_exits_three(tmp_path, monkeypatch):
    monkeypatch.delenv(guardian.API_KEY_ENV, raising=False)
    rc = cli.main(["fetch-guardian", "--query", "storm",
                   "--from-date", "2011-01-01", "--to-date", "2011-01-31",
                   "--output", str(tmp_path / "a.jsonl")])
    assert rc == 3


def test_fetch_guardian_with_timeline_span(tmp_path, monkeypatch):
    gt = corpus.Timeline.from_pairs([
        (date(2011, 1, 1), ("start",)), (date(2011, 1, 20), ("end",))])
    tl_path = tmp_path / "timeline.json"
    corpus.dump_ground_truth("storm", ("storm",), gt, str(tl_path))

    captured = {}

    def fake_fetch(query, span, api_key=None, cache_dir=None, page_size=50):
        captured["query"] = query
        captured["span"] = span
        return [build_article("world/a", "T", date(2011, 1, 5),
                              ["The storm arrived."])]

    monkeypatch.setattr(cli.guardian, "fetch_guardian", fake_fetch)
    out = tmp_path / "articles.jsonl"
    rc = cli.main(["fetch-guardian", "--query", "storm",
                   "--timeline", str(tl_path), "--output", str(out)])
    assert rc == 0
    assert captured["query"] == "storm"
    assert captured["span"] == (date(2010, 12, 30), date(2011, 1, 22))
    loaded = corpus.load_articles(str(out))
    assert [a.id for a in loaded] == ["world/a"]


def test_runtime_failure_exits_three(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "load_dataset", boom)
    rc = cli.main(["stats", "--dataset", str(tmp_path)])
    assert rc == 3


def test_synth_rejects_impossible_spec(tmp_path):
    rc = cli.main(["synth", "--output", str(tmp_path), "--events", "30",
                   "--span", "60"])
    assert rc == 1


def test_filter_dataset_rejects_small_and_accepts_large(tmp_path):
    raw = tmp_path / "raw"
    # 50 query articles: below the acceptance band
    assert cli.main(["synth", "--output", str(raw), "--topic", "small"]) == 0
    # 120 query articles: inside the band
    assert cli.main(["synth", "--output", str(raw), "--topic", "large",
                     "--articles-per-event", "12"]) == 0
    out = tmp_path / "clean"
    rc = cli.main(["filter-dataset", "--input", str(raw), "--output", str(out)])
    assert rc == 0
    report = json.load(open(out / "report.json"))
    assert report["input_tasks"] == 2
    assert report["accepted"] == ["large"]
    assert report["rejected"] == {"small": "article-count"}
    tasks = cli.load_dataset(str(out))
    assert [t.name for t in tasks] == ["large"]


def test_filter_dataset_missing_input_exits_two(tmp_path):
    rc = cli.main(["filter-dataset", "--input", str(tmp_path / "nope"),
                   "--output", str(tmp_path / "out")])
    assert rc == 2
