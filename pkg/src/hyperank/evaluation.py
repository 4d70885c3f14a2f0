"""Shared-task metrics: top-cutoff Accuracy and Mean Rank, plus the
per-label breakdown."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataValidationError
from .ranker import RankedList
from .taxonomy import LabelTaxonomy


@dataclass(frozen=True)
class PerLabelRow:
    root: str
    label: str
    mean_rank: float
    accuracy: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    mean_rank: float
    n: int
    per_label: tuple[PerLabelRow, ...] = field(default_factory=tuple)


def _gold_rank(row: RankedList, gold_label: str, cutoff: int) -> int:
    # positions beyond the cutoff all count as cutoff + 1
    try:
        position = row.labels.index(gold_label) + 1
    except ValueError:
        return cutoff + 1
    return position if position <= cutoff else cutoff + 1


def _ranks_by_origin(
    ranked: list[RankedList], gold: dict[str, str], cutoff: int
) -> dict[str, int]:
    if cutoff < 1:
        raise DataValidationError("cutoff must be >= 1")
    if not ranked:
        raise DataValidationError("nothing to evaluate")
    ranks: dict[str, int] = {}
    for row in ranked:
        if row.origin_id in ranks:
            raise DataValidationError(f"duplicate origin_id {row.origin_id!r} in ranking")
        if row.origin_id not in gold:
            raise DataValidationError(f"no gold label for origin_id {row.origin_id!r}")
        ranks[row.origin_id] = _gold_rank(row, gold[row.origin_id], cutoff)
    return ranks


def evaluate(
    ranked: list[RankedList],
    gold: dict[str, str],
    cutoff: int = 3,
    tax: LabelTaxonomy | None = None,
) -> EvalReport:
    """Accuracy (fraction ranked 1) and Mean Rank with positions beyond
    `cutoff` counted as cutoff + 1. Passing a taxonomy fills in the
    per-label breakdown."""
    ranks = _ranks_by_origin(ranked, gold, cutoff)
    values = list(ranks.values())
    report = EvalReport(
        accuracy=sum(1 for r in values if r == 1) / len(values),
        mean_rank=sum(values) / len(values),
        n=len(values),
        per_label=per_label_report(ranked, gold, tax, cutoff) if tax is not None else (),
    )
    return report


def per_label_report(
    ranked: list[RankedList],
    gold: dict[str, str],
    tax: LabelTaxonomy,
    cutoff: int = 3,
) -> tuple[PerLabelRow, ...]:
    """Mean rank and accuracy grouped by gold label, sorted by root node
    then label. Labels with no gold terms are omitted."""
    ranks = _ranks_by_origin(ranked, gold, cutoff)
    groups: dict[str, list[int]] = {}
    for origin_id, rank_value in ranks.items():
        groups.setdefault(gold[origin_id], []).append(rank_value)
    rows = [
        PerLabelRow(
            root=tax.root_of(label),
            label=label,
            mean_rank=sum(group) / len(group),
            accuracy=sum(1 for r in group if r == 1) / len(group),
            support=len(group),
        )
        for label, group in groups.items()
    ]
    return tuple(sorted(rows, key=lambda row: (row.root, row.label)))


def write_report(report: EvalReport, path: str | Path) -> None:
    payload = {
        "accuracy": report.accuracy,
        "mean_rank": report.mean_rank,
        "n": report.n,
        "per_label": [
            {
                "root": row.root,
                "label": row.label,
                "mean_rank": row.mean_rank,
                "accuracy": row.accuracy,
                "support": row.support,
            }
            for row in report.per_label
        ],
    }
    Path(path).write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def write_per_label_csv(rows: tuple[PerLabelRow, ...], path: str | Path) -> None:
    """Per-label table as CSV `root,label,mean_rank,accuracy,support`."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["root", "label", "mean_rank", "accuracy", "support"])
        for row in rows:
            writer.writerow(
                [row.root, row.label, f"{row.mean_rank:.3f}", f"{row.accuracy:.3f}", row.support]
            )
