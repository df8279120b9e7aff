"""Report figures rendered next to the delimited output files.

Everything draws through the Agg backend so runs work headless, and all
inputs arrive as plain rows so rendering can stay in the parent process
of a multi-worker run.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_datefreq(rows, out_path, title: str = "") -> None:
    """Publication and mention counts per day for one task.

    rows: iterable of (date, pub_count, mention_count), date-sorted.
    """
    rows = list(rows)
    fig, ax = plt.subplots(figsize=(9, 3.2))
    if rows:
        days = [r[0] for r in rows]
        ax.plot(days, [r[1] for r in rows], lw=1.0, color="#1f77b4",
                label="articles published")
        ax.plot(days, [r[2] for r in rows], lw=1.0, color="#d62728",
                label="date mentions")
        ax.legend(loc="upper right", fontsize=8)
        fig.autofmt_xdate(rotation=30)
    ax.set_ylabel("count per day")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)


def render_metrics(per_task, means, out_path) -> None:
    """Grouped bars of the three scores per task, mean bars last.

    per_task: iterable of (task_name, (ar1_f, ar2_f, date_f1)).
    """
    per_task = list(per_task) + [("MEAN", means)]
    names = [name for name, _ in per_task]
    n = len(per_task)
    width = 0.27
    xs = range(n)
    fig, ax = plt.subplots(figsize=(max(6.0, 1.1 * n), 3.6))
    series = (
        ("AR1-F", "#1f77b4", [s[0] for _, s in per_task]),
        ("AR2-F", "#ff7f0e", [s[1] for _, s in per_task]),
        ("Date F1", "#2ca02c", [s[2] for _, s in per_task]),
    )
    for offset, (label, color, values) in enumerate(series):
        ax.bar([x + (offset - 1) * width for x in xs], values, width,
               color=color, label=label)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.0)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)
