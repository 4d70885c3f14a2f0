"""Label hierarchy: leaf labels, their root-to-leaf paths, and definitions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import DataValidationError


@dataclass(frozen=True)
class LabelTaxonomy:
    """Immutable view of the label hierarchy.

    ``leaves`` maps each leaf label to its path (root first, leaf last);
    ``definitions`` maps each leaf label to its definition text. Safe to
    share across threads once constructed.
    """

    leaves: dict[str, tuple[str, ...]]
    definitions: dict[str, str] = field(default_factory=dict)

    def labels(self) -> list[str]:
        """All leaf labels, sorted by name."""
        return sorted(self.leaves)

    def path_of(self, label: str) -> tuple[str, ...]:
        try:
            return self.leaves[label]
        except KeyError:
            raise DataValidationError(f"unknown label: {label!r}") from None

    def root_of(self, label: str) -> str:
        """Top node of the label's path."""
        return self.path_of(label)[0]

    def first_child_of(self, label: str) -> str:
        """Node immediately beneath the root on the label's path.

        Depth-1 leaves are their own first child, so same-first-child
        comparisons stay well defined for degenerate paths.
        """
        path = self.path_of(label)
        return path[1] if len(path) >= 2 else path[0]

    def definition_of(self, label: str) -> str:
        """Definition text for a leaf, falling back to the label name."""
        self.path_of(label)
        return self.definitions.get(label) or label


def _reject_duplicate_keys(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise DataValidationError(f"duplicate key {key!r}")
        seen[key] = value
    return seen


def load_taxonomy(path: str | Path) -> LabelTaxonomy:
    """Load and validate a hierarchy file.

    Expected shape: ``{"labels": {<leaf>: {"path": [...], "definition": ...}}}``.
    Rejects duplicate leaves, malformed paths, leaves reused as interior
    nodes, and inconsistent parentage (the same node name appearing under
    two different parents).
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"), object_pairs_hook=_reject_duplicate_keys)
    except OSError as exc:
        raise DataValidationError(f"{path}: cannot read hierarchy file: {exc}") from exc
    except (json.JSONDecodeError, DataValidationError) as exc:
        raise DataValidationError(f"{path}: invalid hierarchy file: {exc}") from exc

    if not isinstance(raw, dict) or not isinstance(raw.get("labels"), dict):
        raise DataValidationError(f"{path}: hierarchy file must be an object with a 'labels' object")

    leaves: dict[str, tuple[str, ...]] = {}
    definitions: dict[str, str] = {}
    for leaf, entry in raw["labels"].items():
        where = f"{path}: label {leaf!r}"
        if not isinstance(entry, dict):
            raise DataValidationError(f"{where}: entry must be an object")
        nodes = entry.get("path")
        if not isinstance(nodes, list) or not nodes:
            raise DataValidationError(f"{where}: 'path' must be a non-empty list")
        if not all(isinstance(n, str) and n for n in nodes):
            raise DataValidationError(f"{where}: path nodes must be non-empty strings")
        if nodes[-1] != leaf:
            raise DataValidationError(f"{where}: path ends in {nodes[-1]!r}, expected the leaf itself")
        leaves[leaf] = tuple(nodes)
        if "definition" in entry:
            definition = entry["definition"]
            if not isinstance(definition, str) or not definition.strip():
                raise DataValidationError(f"{where}: definition must be a non-empty string when present")
            definitions[leaf] = definition

    interior = {node for nodes in leaves.values() for node in nodes[:-1]}
    reused = interior & set(leaves)
    if reused:
        raise DataValidationError(f"{path}: leaves also appear as interior nodes: {sorted(reused)}")

    parent: dict[str, str | None] = {}
    for leaf, nodes in leaves.items():
        for depth, node in enumerate(nodes):
            expected = nodes[depth - 1] if depth else None
            if node in parent and parent[node] != expected:
                raise DataValidationError(
                    f"{path}: node {node!r} has conflicting parents "
                    f"({parent[node]!r} vs {expected!r})"
                )
            parent[node] = expected

    return LabelTaxonomy(leaves=leaves, definitions=definitions)


def default_hierarchy_path() -> Path:
    """Path of the hierarchy file shipped with the package."""
    return Path(resources.files("hyperank").joinpath("data/finsim_fibo_hierarchy.json"))
