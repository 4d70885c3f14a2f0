"""Similarity scoring, per-term roll-up, ranking, and model ensembling."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import TermRecord
from .embeddings import EmbeddingTable, cosine, wire_id
from .errors import DataValidationError
from .taxonomy import LabelTaxonomy
from .trainer import ProjectionModel, encode

# SimilarityMatrix wire shape: {origin_id: {"term": str, "scores": {label: float}}}


@dataclass(frozen=True)
class RankedList:
    """All leaf labels for one term, best hypernym first."""

    origin_id: str
    term: str
    labels: tuple[str, ...]


def _base_vector(table: EmbeddingTable, text: str, hasher=None) -> np.ndarray:
    if text in table:
        return table.vector_for(text)
    if hasher is not None:
        return np.asarray(hasher(text), dtype=np.float64)
    return table.vector_for(text)  # raises with the missing-text message


def score(
    model: ProjectionModel,
    table: EmbeddingTable,
    records: list[TermRecord],
    tax: LabelTaxonomy,
    hasher=None,
) -> list[tuple[TermRecord, dict[str, float]]]:
    """Cosine between each record's projected text vector and every
    projected label-definition vector.

    ``hasher`` (text -> base vector) fills in for texts missing from the
    table; without it a missing text is an error.
    """
    label_vectors = {
        label: encode(model, _base_vector(table, tax.definition_of(label), hasher))
        for label in tax.labels()
    }
    scored = []
    for record in records:
        projected = encode(model, _base_vector(table, record.text, hasher))
        sims = {label: cosine(projected, vec) for label, vec in label_vectors.items()}
        scored.append((record, sims))
    return scored


def rollup_mean(scored: list[tuple[TermRecord, dict[str, float]]]) -> dict:
    """Mean similarity per (origin_id, label) over a term's records."""
    sums: dict[str, dict] = {}
    for record, sims in scored:
        row = sums.setdefault(
            record.origin_id,
            {"term": record.term, "count": 0, "scores": {label: 0.0 for label in sims}},
        )
        if set(row["scores"]) != set(sims):
            raise DataValidationError(
                f"origin {record.origin_id!r} scored against inconsistent label sets"
            )
        row["count"] += 1
        for label, value in sims.items():
            row["scores"][label] += value
    matrix = {}
    for origin_id, row in sums.items():
        matrix[origin_id] = {
            "term": row["term"],
            "scores": {label: total / row["count"] for label, total in row["scores"].items()},
        }
    return matrix


def rank(matrix: dict) -> list[RankedList]:
    """Labels per term by descending similarity; exact ties break by
    ascending label name. Output rows sorted by origin_id."""
    ranked = []
    for origin_id in sorted(matrix):
        row = matrix[origin_id]
        ordered = sorted(row["scores"].items(), key=lambda kv: (-kv[1], kv[0]))
        ranked.append(
            RankedList(
                origin_id=origin_id,
                term=row["term"],
                labels=tuple(label for label, _ in ordered),
            )
        )
    return ranked


def ensemble_mean(matrices: list[dict]) -> dict:
    """Elementwise mean of similarity matrices over identical keys."""
    if not matrices:
        raise DataValidationError("ensemble needs at least one matrix")
    first = matrices[0]
    for other in matrices[1:]:
        if set(other) != set(first):
            raise DataValidationError("ensemble matrices cover different origin_ids")
    out = {}
    for origin_id, row in first.items():
        labels = set(row["scores"])
        for other in matrices[1:]:
            other_row = other[origin_id]
            if set(other_row["scores"]) != labels:
                raise DataValidationError(
                    f"ensemble matrices disagree on labels for {origin_id!r}"
                )
            if other_row["term"] != row["term"]:
                raise DataValidationError(
                    f"ensemble matrices disagree on the term for {origin_id!r}"
                )
        out[origin_id] = {
            "term": row["term"],
            "scores": {
                label: sum(m[origin_id]["scores"][label] for m in matrices) / len(matrices)
                for label in row["scores"]
            },
        }
    return out


def write_similarity(matrix: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(matrix, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def read_similarity(path: str | Path) -> dict:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataValidationError(f"{path}: bad similarity JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DataValidationError(f"{path}: similarity file must be a JSON object")
    for origin_id, row in raw.items():
        if (
            not isinstance(row, dict)
            or not isinstance(row.get("term"), str)
            or not isinstance(row.get("scores"), dict)
            or not row["scores"]
        ):
            raise DataValidationError(f"{path}: malformed row for {origin_id!r}")
        for label, value in row["scores"].items():
            if not isinstance(value, (int, float)) or not -1.0 - 1e-9 <= value <= 1.0 + 1e-9:
                raise DataValidationError(
                    f"{path}: score for ({origin_id!r}, {label!r}) is not a similarity"
                )
    return raw


def write_ranked(ranked: list[RankedList], path: str | Path) -> None:
    """CSV `origin_id,term,rank1,...,rankN`."""
    if not ranked:
        raise DataValidationError("nothing to write: empty ranking")
    width = len(ranked[0].labels)
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["origin_id", "term"] + [f"rank{i}" for i in range(1, width + 1)])
        for row in ranked:
            if len(row.labels) != width:
                raise DataValidationError(
                    f"ranked row {row.origin_id!r} has {len(row.labels)} labels, expected {width}"
                )
            writer.writerow([wire_id(row.origin_id), wire_id(row.term)] + list(row.labels))


def read_ranked(path: str | Path) -> list[RankedList]:
    path = Path(path)
    ranked = []
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header or header[:2] != ["origin_id", "term"] or len(header) < 3:
            raise DataValidationError(f"{path}: expected header origin_id,term,rank1,...")
        width = len(header) - 2
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width + 2:
                raise DataValidationError(f"{path}:{lineno}: expected {width + 2} columns")
            labels = tuple(row[2:])
            if len(set(labels)) != width:
                raise DataValidationError(f"{path}:{lineno}: duplicate labels in ranking")
            ranked.append(RankedList(origin_id=row[0], term=row[1], labels=labels))
    return ranked
