"""Matplotlib figure rendering for experiment reports.

Every experiment subcommand writes a PNG next to its JSON/CSV output.  The
figures are summaries only; the delimited files remain the source of truth.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_matrix",
    "plot_accuracy_bars",
    "plot_ratio_curve",
    "plot_equivalence",
    "plot_loss_trace",
]


def plot_matrix(matrix_mean: dict[str, dict[str, float]], path: str):
    trains = list(matrix_mean)
    tests = list(next(iter(matrix_mean.values())))
    data = np.array([[matrix_mean[tr][te] for te in tests] for tr in trains])
    fig, ax = plt.subplots(figsize=(1.2 * len(tests) + 2, 1.0 * len(trains) + 2))
    im = ax.imshow(data, vmin=0.4, vmax=1.0, cmap="viridis")
    ax.set_xticks(range(len(tests)), tests, rotation=45, ha="right")
    ax.set_yticks(range(len(trains)), trains)
    ax.set_xlabel("test network")
    ax.set_ylabel("training network")
    for i in range(len(trains)):
        for j in range(len(tests)):
            ax.text(j, i, f"{data[i, j]:.3f}", ha="center", va="center", color="w", fontsize=8)
    fig.colorbar(im, ax=ax, label="pairwise accuracy")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_accuracy_bars(means: dict[str, float], path: str, title: str = ""):
    names = list(means)
    fig, ax = plt.subplots(figsize=(1.0 * len(names) + 2, 4))
    ax.bar(names, [means[n] for n in names], color="tab:blue")
    ax.axhline(0.5, ls="--", color="gray", lw=1)
    ax.set_ylabel("pairwise accuracy")
    ax.set_ylim(0, 1)
    if title:
        ax.set_title(title)
    plt.setp(ax.get_xticklabels(), rotation=45, ha="right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_ratio_curve(curve: list[dict], path: str):
    ratios = [c["ratio"] for c in curve]
    means = [c["mean"] for c in curve]
    stds = [c["std"] for c in curve]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(ratios, means, yerr=stds, marker="o", capsize=3)
    ax.set_xlabel("fraction of edges with known order")
    ax.set_ylabel("pairwise accuracy on held-out edges")
    ax.set_ylim(0.4, 1.0)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_equivalence(table: list[dict], path: str):
    xs = [r["x"] for r in table]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, [r["empirical_std"] for r in table], "o-", label="empirical std")
    ax.plot(xs, [r["theoretical_error"] for r in table], "s--", label="closed form")
    ax.plot(xs, [r["borda_rmse_mean"] for r in table], "^:", label="Borda RMSE")
    ax.set_xlabel("pairwise comparator accuracy x")
    ax.set_ylabel("reconstruction error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_loss_trace(trace: list[float], path: str):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(1, len(trace) + 1), trace)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
