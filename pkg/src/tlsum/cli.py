"""Command-line front end.

Subcommands: run (generate timelines for a dataset and score them), eval
(score existing timeline files), stats, cross-validate, fetch-guardian,
filter-dataset, synth. Exit codes: 0 success, 1 configuration error,
2 data error, 3 runtime failure.

A dataset directory holds one subdirectory per topic with articles.jsonl
and one or more timeline*.json ground-truth files. All files are written
atomically (temp file then rename) and, timings aside, are byte-identical
across repeated runs and worker counts.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import date, timedelta

from . import __version__, corpus, evaluate, guardian, synthetic


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2; we own the exit codes
        raise ConfigError(message)


def _safe_name(task_name: str) -> str:
    return task_name.replace("/", "__")


def _write_atomic(path, data) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    mode = "wb" if isinstance(data, bytes) else "w"
    kwargs = {} if isinstance(data, bytes) else {"encoding": "utf-8"}
    with open(tmp, mode, **kwargs) as fh:
        fh.write(data)
    os.replace(tmp, path)


def _json_text(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=1, sort_keys=True) + "\n"


def load_dataset(dataset_dir, topics=None):
    """All tasks under a dataset directory, name-sorted.

    Task names are "<topic>" for the plain timeline.json and
    "<topic>/<stem>" for any other timeline file.
    """
    if not os.path.isdir(dataset_dir):
        raise DataError("dataset directory %s does not exist" % dataset_dir)
    wanted = set(topics) if topics else None
    tasks = []
    for topic in sorted(os.listdir(dataset_dir)):
        topic_dir = os.path.join(dataset_dir, topic)
        if not os.path.isdir(topic_dir):
            continue
        if wanted is not None and topic not in wanted:
            continue
        articles_path = os.path.join(topic_dir, "articles.jsonl")
        timeline_paths = sorted(
            os.path.join(topic_dir, f) for f in os.listdir(topic_dir)
            if f.startswith("timeline") and f.endswith(".json"))
        if not os.path.exists(articles_path) or not timeline_paths:
            continue
        try:
            articles = corpus.load_articles(articles_path)
        except (OSError, ValueError) as exc:
            raise DataError(str(exc))
        for tpath in timeline_paths:
            stem = os.path.splitext(os.path.basename(tpath))[0]
            name = topic if stem == "timeline" else "%s/%s" % (topic, stem)
            try:
                _, queries, raw_entries = corpus.load_ground_truth(tpath)
                ground_truth = corpus.parse_timeline(raw_entries)
            except (OSError, ValueError) as exc:
                raise DataError("%s: %s" % (tpath, exc))
            kept = corpus.truncate_to_timeline_range(articles, ground_truth)
            if not kept:
                raise DataError("%s: no articles inside the timeline span" % name)
            tasks.append(corpus.Task(
                name=name,
                articles=tuple(kept),
                queries=tuple(queries),
                ground_truth=ground_truth,
                topic=topic,
            ))
    if wanted is not None:
        missing = wanted - {t.topic for t in tasks}
        if missing:
            raise DataError("topics not found: %s" % ", ".join(sorted(missing)))
    if not tasks:
        raise DataError("no tasks found under %s" % dataset_dir)
    tasks.sort(key=lambda t: t.name)
    return tasks


def _method_config(args) -> evaluate.MethodConfig:
    return evaluate.MethodConfig(
        method=args.method,
        date_selector=args.date_selector,
        candidate_strategy=args.candidate_strategy,
        summarizer=args.summarizer,
        cluster_ranker=args.cluster_ranker,
        titles_only=args.titles_only,
        seed=args.seed,
    )


def _config_dict(config: evaluate.MethodConfig) -> dict:
    return {
        "method": config.method,
        "date_selector": config.date_selector,
        "candidate_strategy": config.candidate_strategy,
        "summarizer": config.summarizer,
        "cluster_ranker": config.cluster_ranker,
        "titles_only": config.titles_only,
        "seed": config.seed,
    }


def _timeline_doc(name: str, timeline) -> str:
    return _json_text({
        "task": name,
        "timeline": [[d.isoformat(), list(s)] for d, s in timeline.entries],
    })


def _datefreq_rows(task):
    """Per-day publication and mention counts over the article span."""
    pubs = {}
    mentions = {}
    for a in task.articles:
        pubs[a.pub_date] = pubs.get(a.pub_date, 0) + 1
        for s in a.sentences:
            for d in {m.resolved for m in s.mentions}:
                mentions[d] = mentions.get(d, 0) + 1
    if not pubs:
        return []
    first = min(pubs)
    last = max(pubs)
    rows = []
    day = first
    while day <= last:
        rows.append((day, pubs.get(day, 0), mentions.get(day, 0)))
        day += timedelta(days=1)
    return rows


def _datefreq_csv(rows) -> str:
    lines = ["date,pub_count,mention_count"]
    for day, p, m in rows:
        lines.append("%s,%d,%d" % (day.isoformat(), p, m))
    return "\n".join(lines) + "\n"


def _run_single(payload):
    """Worker body: one task in, timeline and scores out. Top level so a
    process pool can pickle it."""
    task, config, date_model, cluster_model = payload
    start = time.perf_counter()
    timeline = evaluate.build_for_task(task, config, date_model, cluster_model)
    seconds = time.perf_counter() - start
    scores = evaluate.evaluate_timeline(timeline, task.ground_truth)
    return task.name, timeline, scores, seconds


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def _write_outputs(out_dir, command, dataset, topics, config, result,
                   datefreq=None, timings=None):
    """All report files for a finished run, figures included, finished by
    a manifest that hashes everything except the timings."""
    from . import figures

    written = []

    def put(rel, data):
        _write_atomic(os.path.join(out_dir, rel), data)
        written.append(rel)

    for name, timeline in result.timelines:
        put(os.path.join("timelines", _safe_name(name) + ".json"),
            _timeline_doc(name, timeline))
    put("metrics.json", _json_text(result.to_dict()))
    put("metrics.csv", result.to_csv())
    if datefreq:
        for name, rows in datefreq:
            put(os.path.join("datefreq", _safe_name(name) + ".csv"),
                _datefreq_csv(rows))
            fig_path = os.path.join(out_dir, "figures",
                                    _safe_name(name) + "-datefreq.png")
            os.makedirs(os.path.dirname(fig_path), exist_ok=True)
            figures.render_datefreq(rows, fig_path, title=name)
            written.append(os.path.join("figures", _safe_name(name) + "-datefreq.png"))
    metrics_fig = os.path.join(out_dir, "figures", "metrics.png")
    os.makedirs(os.path.dirname(metrics_fig), exist_ok=True)
    figures.render_metrics(result.per_task,
                           (result.ar1_f, result.ar2_f, result.date_f1), metrics_fig)
    written.append(os.path.join("figures", "metrics.png"))
    if timings is not None:
        lines = ["task,seconds"]
        for name, seconds in timings:
            lines.append("%s,%.3f" % (name, seconds))
        lines.append("TOTAL,%.3f" % sum(s for _, s in timings))
        _write_atomic(os.path.join(out_dir, "timings.csv"), "\n".join(lines) + "\n")
    manifest = {
        "version": __version__,
        "command": command,
        "dataset": dataset,
        "topics": sorted(topics) if topics else [],
        "config": _config_dict(config),
        "outputs": {rel: _sha256(os.path.join(out_dir, rel))
                    for rel in sorted(written)},
    }
    _write_atomic(os.path.join(out_dir, "manifest.json"), _json_text(manifest))


def cmd_run(args) -> int:
    tasks = load_dataset(args.dataset, args.topics)
    config = _method_config(args)
    date_model = cluster_model = None
    if config.is_supervised:
        if len(tasks) < 2:
            raise ConfigError("supervised configurations need at least 2 tasks")
        date_model, cluster_model = evaluate.train_models(config, tasks)
    payloads = [(t, config, date_model, cluster_model) for t in tasks]
    if args.jobs == 1:
        outcomes = [_run_single(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_run_single, payloads))
    outcomes.sort(key=lambda o: o[0])
    per_task = [(name, scores) for name, _, scores, _ in outcomes]
    timelines = [(name, timeline) for name, timeline, _, _ in outcomes]
    timings = [(name, seconds) for name, _, _, seconds in outcomes]
    result = evaluate.aggregate_results(per_task, timelines)
    datefreq = [(t.name, _datefreq_rows(t)) for t in tasks]
    _write_outputs(args.output, "run", args.dataset, args.topics, config,
                   result, datefreq=datefreq, timings=timings)
    print("run: %d tasks  AR1-F %.4f  AR2-F %.4f  Date-F1 %.4f"
          % (len(tasks), result.ar1_f, result.ar2_f, result.date_f1))
    return 0


def cmd_cross_validate(args) -> int:
    tasks = load_dataset(args.dataset, args.topics)
    config = _method_config(args)
    if config.is_supervised and len(tasks) < 2:
        raise ConfigError("supervised configurations need at least 2 tasks")
    result = evaluate.loocv(tasks, config)
    _write_outputs(args.output, "cross-validate", args.dataset, args.topics,
                   config, result)
    print("cross-validate: %d folds  AR1-F %.4f  AR2-F %.4f  Date-F1 %.4f"
          % (len(tasks), result.ar1_f, result.ar2_f, result.date_f1))
    return 0


def cmd_eval(args) -> int:
    tasks = load_dataset(args.dataset, args.topics)
    by_safe = {_safe_name(t.name): t for t in tasks}
    per_task = []
    for fname in sorted(os.listdir(args.timelines)):
        if not fname.endswith(".json"):
            continue
        task = by_safe.get(fname[:-len(".json")])
        if task is None:
            continue
        path = os.path.join(args.timelines, fname)
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
            timeline = corpus.parse_timeline(
                [(d, tuple(s)) for d, s in doc["timeline"]])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise DataError("%s: %s" % (path, exc))
        per_task.append((task.name,
                         evaluate.evaluate_timeline(timeline, task.ground_truth)))
    if not per_task:
        raise DataError("no timeline files matched the dataset tasks")
    result = evaluate.aggregate_results(per_task)
    if args.output:
        _write_atomic(os.path.join(args.output, "metrics.json"),
                      _json_text(result.to_dict()))
        _write_atomic(os.path.join(args.output, "metrics.csv"), result.to_csv())
    else:
        print(_json_text(result.to_dict()), end="")
    return 0


def cmd_stats(args) -> int:
    tasks = load_dataset(args.dataset, args.topics)
    stats = corpus.dataset_stats(tasks)
    doc = dict(stats.to_dict(), n_tasks=len(tasks))
    text = _json_text(doc)
    if args.output:
        _write_atomic(args.output, text)
    else:
        print(text, end="")
    return 0


def cmd_fetch_guardian(args) -> int:
    if args.timeline:
        try:
            _, _, raw_entries = corpus.load_ground_truth(args.timeline)
            timeline = corpus.parse_timeline(raw_entries)
        except (OSError, ValueError) as exc:
            raise DataError("%s: %s" % (args.timeline, exc))
        span = guardian.padded_span(timeline)
    elif args.from_date and args.to_date:
        try:
            span = (date.fromisoformat(args.from_date), date.fromisoformat(args.to_date))
        except ValueError as exc:
            raise ConfigError(str(exc))
    else:
        raise ConfigError("give either --timeline or both --from-date and --to-date")
    if span[0] > span[1]:
        raise ConfigError("span starts after it ends")
    articles = guardian.fetch_guardian(
        args.query, span, api_key=args.api_key, cache_dir=args.cache_dir,
        page_size=args.page_size)
    corpus.dump_articles(articles, args.output)
    print("fetched %d articles into %s" % (len(articles), args.output))
    return 0


def cmd_filter_dataset(args) -> int:
    tasks_in = 0
    accepted = []
    rejected = {}
    if not os.path.isdir(args.input):
        raise DataError("input directory %s does not exist" % args.input)
    for topic in sorted(os.listdir(args.input)):
        topic_dir = os.path.join(args.input, topic)
        if not os.path.isdir(topic_dir):
            continue
        articles_path = os.path.join(topic_dir, "articles.jsonl")
        timeline_paths = sorted(
            os.path.join(topic_dir, f) for f in os.listdir(topic_dir)
            if f.startswith("timeline") and f.endswith(".json"))
        if not os.path.exists(articles_path) or not timeline_paths:
            continue
        try:
            articles = corpus.load_articles(articles_path)
        except (OSError, ValueError) as exc:
            raise DataError(str(exc))
        for tpath in timeline_paths:
            stem = os.path.splitext(os.path.basename(tpath))[0]
            name = topic if stem == "timeline" else "%s/%s" % (topic, stem)
            tasks_in += 1
            try:
                _, queries, raw_entries = corpus.load_ground_truth(tpath)
            except (OSError, ValueError) as exc:
                raise DataError("%s: %s" % (tpath, exc))
            task, reason = corpus.filter_dataset_task(
                articles, raw_entries, queries, name=name, topic=topic)
            if task is None:
                rejected[name] = reason
                continue
            accepted.append(name)
            out_topic = os.path.join(args.output, topic)
            os.makedirs(out_topic, exist_ok=True)
            out_articles = os.path.join(out_topic, "articles.jsonl")
            if not os.path.exists(out_articles):
                corpus.dump_articles(task.articles, out_articles)
            corpus.dump_ground_truth(topic, task.queries, task.ground_truth,
                                     os.path.join(out_topic, os.path.basename(tpath)))
    report = {
        "input_tasks": tasks_in,
        "accepted": sorted(accepted),
        "rejected": {k: rejected[k] for k in sorted(rejected)},
    }
    _write_atomic(os.path.join(args.output, "report.json"), _json_text(report))
    print("accepted %d of %d tasks" % (len(accepted), tasks_in))
    return 0


def cmd_synth(args) -> int:
    spec = synthetic.SyntheticSpec(
        n_events=args.events,
        articles_per_event=args.articles_per_event,
        noise_articles=args.noise,
        span_days=args.span,
        vocab_size=args.vocab,
        seed=args.seed,
        noise_event_overlap=args.overlap,
    )
    try:
        synthetic.write_dataset(spec, os.path.join(args.output, args.topic))
    except ValueError as exc:
        raise ConfigError(str(exc))
    print("wrote synthetic topic %s under %s" % (args.topic, args.output))
    return 0


def _add_dataset_args(sub):
    sub.add_argument("--dataset", required=True, help="dataset directory")
    sub.add_argument("--topics", nargs="*", default=None,
                     help="restrict to these topic directories")


def _add_method_args(sub):
    sub.add_argument("--method", default="datewise",
                     choices=["datewise", "clust", "pubcount"])
    sub.add_argument("--date-selector", default="mentioncount",
                     choices=["pubcount", "mentioncount", "supervised-clf",
                              "supervised-reg"])
    sub.add_argument("--candidate-strategy", default="pm-mean",
                     choices=["p", "m", "pm-mean"])
    sub.add_argument("--summarizer", default="centroid-opt",
                     choices=["centroid-opt", "centroid-rank", "textrank",
                              "submodular"])
    sub.add_argument("--cluster-ranker", default="size",
                     choices=["size", "datementioncount", "regression-dates",
                              "regression-rouge"])
    sub.add_argument("--titles-only", action="store_true")
    sub.add_argument("--seed", type=int, default=evaluate.DEFAULT_SEED)


def build_parser() -> _Parser:
    parser = _Parser(prog="tlsum", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="generate and score timelines")
    _add_dataset_args(run)
    _add_method_args(run)
    run.add_argument("--output", required=True, help="report directory")
    run.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    run.set_defaults(func=cmd_run)

    cv = subs.add_parser("cross-validate", help="leave-one-out evaluation")
    _add_dataset_args(cv)
    _add_method_args(cv)
    cv.add_argument("--output", required=True)
    cv.set_defaults(func=cmd_cross_validate)

    ev = subs.add_parser("eval", help="score existing timeline files")
    _add_dataset_args(ev)
    ev.add_argument("--timelines", required=True,
                    help="directory of timeline JSON files")
    ev.add_argument("--output", default=None)
    ev.set_defaults(func=cmd_eval)

    st = subs.add_parser("stats", help="dataset statistics")
    _add_dataset_args(st)
    st.add_argument("--output", default=None)
    st.set_defaults(func=cmd_stats)

    fg = subs.add_parser("fetch-guardian", help="collect articles for a query")
    fg.add_argument("--query", required=True)
    fg.add_argument("--timeline", default=None,
                    help="ground-truth file whose padded span bounds the search")
    fg.add_argument("--from-date", default=None)
    fg.add_argument("--to-date", default=None)
    fg.add_argument("--api-key", default=None)
    fg.add_argument("--cache-dir", default=None)
    fg.add_argument("--page-size", type=int, default=guardian.PAGE_SIZE)
    fg.add_argument("--output", required=True, help="articles.jsonl to write")
    fg.set_defaults(func=cmd_fetch_guardian)

    fd = subs.add_parser("filter-dataset", help="clean and accept raw tasks")
    fd.add_argument("--input", required=True, help="raw dataset directory")
    fd.add_argument("--output", required=True)
    fd.set_defaults(func=cmd_filter_dataset)

    sy = subs.add_parser("synth", help="write a synthetic dataset topic")
    sy.add_argument("--output", required=True, help="dataset directory")
    sy.add_argument("--topic", default="synth")
    sy.add_argument("--events", type=int, default=10)
    sy.add_argument("--articles-per-event", type=int, default=5)
    sy.add_argument("--noise", type=int, default=50)
    sy.add_argument("--span", type=int, default=120)
    sy.add_argument("--vocab", type=int, default=120)
    sy.add_argument("--seed", type=int, default=42)
    sy.add_argument("--overlap", type=float, default=0.0)
    sy.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and --version land here
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except DataError as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return 2
    except guardian.FetchError as exc:
        print("fetch failed: %s" % exc, file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - last-ditch runtime mapping
        print("runtime failure: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
