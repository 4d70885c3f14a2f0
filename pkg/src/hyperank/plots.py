"""Figure rendering for report artifacts (file output only, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import EvalReport

# constant metadata keeps PNG bytes identical across reruns
_SAVEFIG = {"dpi": 120, "metadata": {"Software": "hyperank"}}


def save_augment_figure(counts: dict[str, int], path: str | Path) -> None:
    """Bar chart of record counts per source."""
    sources = list(counts)
    values = [counts[s] for s in sources]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(sources, values, color="#4878a8")
    for i, value in enumerate(values):
        ax.text(i, value, str(value), ha="center", va="bottom", fontsize=9)
    ax.set_ylabel("records")
    ax.set_title("Corpus records per source")
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def save_loss_figure(report: list[tuple[int, str, float]], path: str | Path) -> None:
    """Mean loss per epoch, one line per objective."""
    series: dict[str, tuple[list[int], list[float]]] = {}
    for epoch, objective, mean_loss in report:
        xs, ys = series.setdefault(objective, ([], []))
        xs.append(epoch)
        ys.append(mean_loss)
    fig, ax = plt.subplots(figsize=(7, 4))
    for objective in sorted(series):
        xs, ys = series[objective]
        ax.plot(xs, ys, marker=".", label=objective)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean loss")
    ax.set_title("Training loss")
    if series:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def save_eval_figure(report: EvalReport, path: str | Path) -> None:
    """Per-label mean rank bars (overall metrics in the title)."""
    fig, ax = plt.subplots(figsize=(8, max(3.0, 0.35 * max(1, len(report.per_label)) + 1.5)))
    if report.per_label:
        labels = [f"{row.root} / {row.label}" for row in report.per_label]
        ranks = [row.mean_rank for row in report.per_label]
        y = np.arange(len(labels))
        ax.barh(y, ranks, color="#4878a8")
        ax.set_yticks(y)
        ax.set_yticklabels(labels, fontsize=8)
        ax.invert_yaxis()
        ax.set_xlabel("mean rank (lower is better)")
    else:
        ax.bar(["accuracy"], [report.accuracy], color="#4878a8")
        ax.set_ylim(0, 1)
    ax.set_title(
        f"accuracy {report.accuracy:.3f}, mean rank {report.mean_rank:.3f}, n={report.n}"
    )
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def save_pca_figure(
    labels: list[str], coordinates: np.ndarray, ratios, path: str | Path
) -> None:
    """Annotated scatter of the first two principal components."""
    coordinates = np.asarray(coordinates, dtype=np.float64)
    if coordinates.shape[1] < 2:
        coordinates = np.column_stack([coordinates[:, 0], np.zeros(len(coordinates))])
    fig, ax = plt.subplots(figsize=(7, 6))
    ax.scatter(coordinates[:, 0], coordinates[:, 1], color="#4878a8")
    for label, (x, y) in zip(labels, coordinates[:, :2]):
        ax.annotate(label, (x, y), fontsize=8, xytext=(3, 3), textcoords="offset points")
    ratios = list(ratios)
    ax.set_xlabel(f"PC1 ({ratios[0]:.1%} of variance)")
    if len(ratios) > 1:
        ax.set_ylabel(f"PC2 ({ratios[1]:.1%} of variance)")
    ax.set_title("Label embeddings, first two principal components")
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)
