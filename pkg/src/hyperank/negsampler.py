"""Graded positive/negative pair generation from the taxonomy."""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import TermRecord
from .embeddings import wire_id
from .errors import DataValidationError
from .taxonomy import LabelTaxonomy


@dataclass(frozen=True)
class ScoredPair:
    """(term text, label definition, target similarity) training pair."""

    text_a: str
    text_b: str
    score: float
    origin_id: str

    def __post_init__(self):
        if not self.text_a or not self.text_b:
            raise DataValidationError("pair texts must be non-empty")
        if not 0.0 <= self.score <= 1.0:
            raise DataValidationError(f"pair score {self.score} outside [0, 1]")


def _graded_score(tax: LabelTaxonomy, gold: str, sampled: str, k: float) -> float:
    if tax.root_of(sampled) != tax.root_of(gold):
        return 0.0
    if tax.first_child_of(sampled) == tax.first_child_of(gold):
        return 2.0 * k
    return k


def generate_pairs(
    records: list[TermRecord],
    tax: LabelTaxonomy,
    k: float = 0.4,
    n_neg: int = 10,
    seed: int = 0,
) -> list[ScoredPair]:
    """Per record: one (text, gold definition, 1.0) pair plus n_neg pairs
    against distinct other labels, scored 2k for a shared first child, k
    for a shared root only, and 0 for disjoint roots.

    Sampling is uniform without replacement with a per-record sub-seed,
    so output is stable under reordering-free parallelism and does not
    depend on k.
    """
    labels = tax.labels()
    if n_neg > len(labels) - 1:
        raise DataValidationError(
            f"n_neg = {n_neg} exceeds available negatives ({len(labels) - 1})"
        )
    if not 0.0 <= k <= 0.5:
        raise DataValidationError("k must be in [0, 0.5] so 2k stays a valid score")
    pairs: list[ScoredPair] = []
    for index, record in enumerate(records):
        if record.label is None:
            raise DataValidationError(f"record {record.origin_id!r} has no label")
        gold = record.label
        definition = tax.definition_of(gold)  # raises on unknown label
        pairs.append(ScoredPair(record.text, definition, 1.0, record.origin_id))
        rng = random.Random(f"{seed}:{index}")
        candidates = [label for label in labels if label != gold]
        for sampled in rng.sample(candidates, n_neg):
            pairs.append(
                ScoredPair(
                    record.text,
                    tax.definition_of(sampled),
                    _graded_score(tax, gold, sampled, k),
                    record.origin_id,
                )
            )
    return pairs


def subsample_zeros(pairs: list[ScoredPair], keep: int, seed: int = 0) -> list[ScoredPair]:
    """Keep all nonzero-score pairs and a uniform seeded sample of `keep`
    zero-score pairs, preserving input order."""
    if keep < 0:
        raise DataValidationError("keep must be non-negative")
    zero_positions = [i for i, pair in enumerate(pairs) if pair.score == 0.0]
    if keep >= len(zero_positions):
        return list(pairs)
    kept = set(random.Random(seed).sample(zero_positions, keep))
    return [p for i, p in enumerate(pairs) if p.score != 0.0 or i in kept]


def write_pairs(pairs: list[ScoredPair], path: str | Path) -> None:
    """Write TSV rows ``text_a<TAB>text_b<TAB>score<TAB>origin_id`` with
    scores at 6 decimals; texts pass through wire_id so rows stay one
    line each."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for pair in pairs:
            handle.write(
                f"{wire_id(pair.text_a)}\t{wire_id(pair.text_b)}"
                f"\t{pair.score:.6f}\t{wire_id(pair.origin_id)}\n"
            )


def read_pairs(path: str | Path) -> list[ScoredPair]:
    path = Path(path)
    pairs: list[ScoredPair] = []
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise DataValidationError(
                    f"{path}:{lineno}: expected 4 tab-separated fields, got {len(fields)}"
                )
            text_a, text_b, score_text, origin_id = fields
            try:
                score = float(score_text)
            except ValueError as exc:
                raise DataValidationError(f"{path}:{lineno}: bad score: {exc}") from exc
            try:
                pairs.append(ScoredPair(text_a, text_b, score, origin_id))
            except DataValidationError as exc:
                raise DataValidationError(f"{path}:{lineno}: {exc}") from exc
    return pairs
