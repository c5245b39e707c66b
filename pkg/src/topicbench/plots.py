"""Render report figures to files alongside delimited (CSV) data dumps.

Everything here consumes the JSON report dict, so any report on disk can
be re-rendered without re-running the pipelines.
"""
from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def write_intertopic_csv(model_report, path):
    coords = model_report["intertopic_map"]["coords"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["topic_id", "x", "y"])
        for i, (x, y) in enumerate(coords):
            w.writerow([i, "%.10g" % x, "%.10g" % y])


def write_histogram_csv(model_report, path):
    hist = model_report["dominant_topics"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["topic_id", "doc_count"])
        for i, c in enumerate(hist["doc_counts"]):
            w.writerow([i, c])
        if "noise_count" in hist:
            w.writerow([-1, hist["noise_count"]])


def write_topic_words_csv(model_report, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["topic_id", "rank", "term", "weight"])
        for t in model_report["topics"]["topics"]:
            for rank, word in enumerate(t["words"], start=1):
                w.writerow([t["id"], rank, word["term"], "%.10g" % word["weight"]])


def plot_intertopic_map(model_report, title, path):
    coords = model_report["intertopic_map"]["coords"]
    sizes = [t["size"] for t in model_report["topics"]["topics"]]
    fig, ax = plt.subplots(figsize=(6, 5))
    xs = [c[0] for c in coords]
    ys = [c[1] for c in coords]
    area = [60 + 12 * s for s in sizes] if len(sizes) == len(xs) else 120
    ax.scatter(xs, ys, s=area, alpha=0.6, edgecolors="k")
    for i, (x, y) in enumerate(coords):
        ax.annotate(str(i), (x, y), ha="center", va="center")
    ax.set_title(title)
    ax.set_xlabel("MDS axis 1")
    ax.set_ylabel("MDS axis 2")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_dominant_topics(model_report, title, path):
    hist = model_report["dominant_topics"]
    counts = list(hist["doc_counts"])
    labels = [str(i) for i in range(len(counts))]
    if "noise_count" in hist:
        counts.append(hist["noise_count"])
        labels.append("noise")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(labels, counts, color="steelblue")
    ax.set_title(title)
    ax.set_xlabel("topic")
    ax.set_ylabel("documents")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_topic_words(model_report, title, path, max_topics=8):
    topics = model_report["topics"]["topics"][:max_topics]
    n = max(len(topics), 1)
    ncols = min(n, 3)
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(4 * ncols, 3 * nrows),
                             squeeze=False)
    for ax in axes.ravel():
        ax.set_visible(False)
    for i, t in enumerate(topics):
        ax = axes[i // ncols][i % ncols]
        ax.set_visible(True)
        terms = [w["term"] for w in t["words"]][::-1]
        weights = [w["weight"] for w in t["words"]][::-1]
        ax.barh(terms, weights, color="darkorange")
        ax.set_title("topic %d" % t["id"], fontsize=10)
        ax.tick_params(labelsize=8)
    fig.suptitle(title)
    fig.tight_layout(rect=(0, 0, 1, 0.96))
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_all(report_obj, out_dir):
    """Write every figure and CSV for both models; returns written paths."""
    written = []
    for name in ("plsa", "clusterpipe"):
        m = report_obj["models"][name]
        base = os.path.join(out_dir, name)
        jobs = [
            (write_intertopic_csv, base + "_intertopic.csv"),
            (write_histogram_csv, base + "_dominant_topics.csv"),
            (write_topic_words_csv, base + "_topic_words.csv"),
        ]
        for fn, path in jobs:
            fn(m, path)
            written.append(path)
        plot_intertopic_map(m, "%s intertopic distance map" % name,
                            base + "_intertopic.png")
        plot_dominant_topics(m, "%s dominant topics" % name,
                             base + "_dominant_topics.png")
        plot_topic_words(m, "%s topic word scores" % name,
                         base + "_topic_words.png")
        written += [base + "_intertopic.png", base + "_dominant_topics.png",
                    base + "_topic_words.png"]
    return written
