"""Matplotlib report figures saved next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_class_counts(stats, path) -> None:
    """Horizontal bar chart of per-class sequence counts."""
    fig, ax = plt.subplots(figsize=(6, 0.6 * len(stats) + 1.2))
    labels = [s.label for s in stats]
    counts = [s.count for s in stats]
    ax.barh(range(len(stats)), counts, color="#4878a8")
    ax.set_yticks(range(len(stats)), labels)
    ax.invert_yaxis()
    for i, c in enumerate(counts):
        ax.text(c, i, f" {c}", va="center")
    ax.set_xlabel("sequences")
    _save(fig, path)


def save_length_hist(dataset, path) -> None:
    """Overlaid step histograms of sequence length, one per class."""
    fig, ax = plt.subplots(figsize=(7, 4))
    groups = dataset.by_label()
    lo = min(len(s.residues) for s in dataset.sequences)
    hi = max(len(s.residues) for s in dataset.sequences)
    bins = np.arange(lo, hi + 2) - 0.5
    for label in sorted(groups):
        ax.hist(
            [len(s.residues) for s in groups[label]],
            bins=bins,
            histtype="step",
            linewidth=1.5,
            label=label,
        )
    ax.set_xlabel("sequence length")
    ax.set_ylabel("count")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    _save(fig, path)


def save_complex(coords, edges, path, epsilon=None) -> None:
    """Point cloud with its neighborhood-graph edges."""
    coords = np.asarray(coords)
    fig, ax = plt.subplots(figsize=(5, 5))
    for i, j in edges:
        ax.plot(coords[[i, j], 0], coords[[i, j], 1], color="#888888", lw=0.6, zorder=1)
    ax.scatter(coords[:, 0], coords[:, 1], s=12, color="#202020", zorder=2)
    ax.set_aspect("equal")
    title = f"{len(coords)} vertices, {len(edges)} edges"
    if epsilon is not None:
        title += f" (scale {epsilon:g})"
    ax.set_title(title, fontsize=10)
    _save(fig, path)


def save_persistence_diagram(diagram, path) -> None:
    """Birth/death scatter for connected components; the essential class sits on top."""
    deaths = np.asarray(diagram.finite_deaths, dtype=float)
    top = (deaths.max() if len(deaths) else 1.0) * 1.15 or 1.0
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot([0, top], [0, top], color="#bbbbbb", lw=1)
    ax.scatter(np.zeros(len(deaths)), deaths, s=18, color="#b3442e", zorder=2)
    for _ in range(diagram.n_infinite):
        ax.scatter([0], [top], marker="^", s=40, color="#2e6eb3", zorder=2)
    ax.annotate("inf", (0, top), textcoords="offset points", xytext=(8, -4), fontsize=9)
    ax.set_xlim(-top * 0.05, top)
    ax.set_ylim(-top * 0.05, top * 1.05)
    ax.set_xlabel("birth")
    ax.set_ylabel("death")
    _save(fig, path)


def save_barcode(diagram, path) -> None:
    """Horizontal bars, one per component lifetime, shortest at the bottom."""
    deaths = sorted(diagram.finite_deaths)
    top = (deaths[-1] if deaths else 1.0) * 1.15 or 1.0
    rows = len(deaths) + diagram.n_infinite
    fig, ax = plt.subplots(figsize=(6, 0.18 * rows + 1.0))
    for i, d in enumerate(deaths):
        ax.hlines(i, 0, d, color="#b3442e", lw=2)
    for j in range(diagram.n_infinite):
        ax.hlines(len(deaths) + j, 0, top, color="#2e6eb3", lw=2)
        ax.annotate("inf", (top, len(deaths) + j), fontsize=8,
                    textcoords="offset points", xytext=(2, -3))
    ax.set_xlim(0, top * 1.08)
    ax.set_ylim(-1, rows)
    ax.set_yticks([])
    ax.set_xlabel("scale")
    _save(fig, path)


def save_sweep(epsilons, edge_counts, ink_counts, path) -> None:
    """Edge count and inked-pixel count as functions of the scale threshold."""
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.plot(epsilons, edge_counts, marker="o", color="#2e6eb3", label="edges")
    ax.set_xlabel("scale threshold")
    ax.set_ylabel("edges", color="#2e6eb3")
    ax2 = ax.twinx()
    ax2.plot(epsilons, ink_counts, marker="s", color="#b3442e", label="inked pixels")
    ax2.set_ylabel("inked pixels", color="#b3442e")
    _save(fig, path)


def save_robustness(rows, path) -> None:
    """Accuracy against mean perturbation strength."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [r.sigma_l1 for r in rows]
    ys = [r.accuracy for r in rows]
    ax.plot(xs, ys, marker="o", color="#2e6eb3")
    ax.set_xlabel("mean perturbation strength (L1)")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0, 1.05)
    ax.grid(alpha=0.3)
    _save(fig, path)


def save_confusion(conf, labels, path) -> None:
    """Annotated confusion-matrix heatmap (rows true, columns predicted)."""
    conf = np.asarray(conf)
    fig, ax = plt.subplots(figsize=(1.0 * len(labels) + 2.5, 1.0 * len(labels) + 2))
    im = ax.imshow(conf, cmap="Blues")
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(len(labels)), labels, fontsize=8)
    thresh = conf.max() / 2 if conf.max() else 0.5
    for i in range(len(labels)):
        for j in range(len(labels)):
            ax.text(j, i, str(conf[i, j]), ha="center", va="center", fontsize=8,
                    color="white" if conf[i, j] > thresh else "black")
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    fig.colorbar(im, ax=ax, shrink=0.8)
    _save(fig, path)
