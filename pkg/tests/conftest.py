"""Shared fixtures over the synthetic corpus builders in synthdata."""

from __future__ import annotations

import pytest

from hyperank import LabelTaxonomy, TermRecord
from synthdata import build_alien_records, build_alien_taxonomy, write_alien_hierarchy


@pytest.fixture
def alien_tax() -> LabelTaxonomy:
    return build_alien_taxonomy()


@pytest.fixture
def alien_records() -> list[TermRecord]:
    return build_alien_records()


@pytest.fixture
def alien_hierarchy_path(tmp_path):
    path = tmp_path / "alien_hierarchy.json"
    write_alien_hierarchy(path)
    return path
