"""Static figures for paths, estimate curves, and sweep summaries.

Everything renders through the Agg backend straight to SVG files next
to the delimited output.  Dates are stripped from the SVG metadata so
reruns produce identical bytes.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def path_figure(sample, out_path):
    """One path realization as a line chart."""
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(sample.times, sample.values, lw=0.8, color="tab:blue")
    ax.set_xlabel("t")
    ax.set_ylabel("X(t)")
    title = "path"
    if sample.family_name:
        title = f"{sample.family_name} path"
    if sample.config is not None:
        title += f"  (J={sample.config.J}, n={sample.config.n}, seed={sample.config.seed})"
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


def hurst_figure(series, out_path):
    """True (when known), raw, and smoothed estimates per cell midpoint."""
    fig, ax = plt.subplots(figsize=(8, 5))
    if series.h_true is not None:
        ax.plot(series.interval_mids, series.h_true, "k--", lw=1.2, label="true")
    ax.plot(series.interval_mids, series.h_raw, color="tab:gray", lw=0.8, label="raw")
    ax.plot(series.interval_mids, series.h_smooth, color="tab:red", lw=1.6, label="smoothed")
    ax.set_xlabel("t")
    ax.set_ylabel("H(t)")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


def table_box_figure(labels, datasets, out_path):
    """Boxplots of pooled absolute differences, one box per (J, n)."""
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.boxplot(datasets, tick_labels=labels, showfliers=False)
    ax.set_xlabel("(J, n)")
    ax.set_ylabel("|estimate - true|")
    ax.grid(alpha=0.3, axis="y")
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


def maxdiff_figure(labels, per_rep_max, out_path):
    """Per-replication maximum differences, scattered per (J, n)."""
    fig, ax = plt.subplots(figsize=(8, 5))
    for i, vals in enumerate(per_rep_max):
        x = np.full(len(vals), i + 1, dtype=float)
        ax.plot(x, vals, "o", ms=4, alpha=0.6, color="tab:blue")
        ax.plot([i + 0.8, i + 1.2], [np.mean(vals)] * 2, color="tab:red", lw=2)
    ax.set_xticks(np.arange(1, len(labels) + 1))
    ax.set_xticklabels(labels)
    ax.set_xlabel("(J, n)")
    ax.set_ylabel("max |estimate - true|")
    ax.grid(alpha=0.3, axis="y")
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
