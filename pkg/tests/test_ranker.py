"""Ranker tests: scoring geometry, roll-up arithmetic, rank ordering,
ensembling, and the wire formats."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthdata import build_alien_taxonomy
from hyperank.corpus import TermRecord
from hyperank.embeddings import EmbeddingTable, hash_embed, hash_table
from hyperank.errors import DataValidationError
from hyperank.ranker import (
    RankedList,
    ensemble_mean,
    rank,
    read_ranked,
    read_similarity,
    rollup_mean,
    score,
    write_ranked,
    write_similarity,
)
from hyperank.taxonomy import default_hierarchy_path, load_taxonomy
from hyperank.trainer import init_model


def record(origin_id, term, text=None, label=None):
    return TermRecord(origin_id=origin_id, term=term, text=text or term, label=label)


def matrix_row(term, scores):
    return {"term": term, "scores": dict(scores)}


class TestScore:
    def test_full_taxonomy_cardinality(self):
        tax = load_taxonomy(default_hierarchy_path())
        texts = [tax.definition_of(label) for label in tax.labels()]
        texts += ["alpha corporate paper", "beta pooled fund"]
        table = hash_table(texts, dim=32, seed=4)
        records = [record("t0000", "alpha corporate paper"), record("t0001", "beta pooled fund")]
        scored = score(init_model(32), table, records, tax)
        assert len(scored) == 2
        assert all(len(sims) == 17 for _, sims in scored)
        assert sum(len(sims) for _, sims in scored) == 34
        for _, sims in scored:
            assert set(sims) == set(tax.labels())
            assert all(-1.0 <= v <= 1.0 for v in sims.values())

    def test_hand_cosines_with_identity_model(self):
        tax = build_alien_taxonomy()
        labels = tax.labels()
        table = EmbeddingTable(2)
        table.add(tax.definition_of(labels[0]), [1.0, 0.0])
        table.add(tax.definition_of(labels[1]), [0.0, 1.0])
        for label in labels[2:]:
            table.add(tax.definition_of(label), [1.0, 1.0])
        table.add("zork", [1.0, 0.0])
        [(_, sims)] = score(init_model(2), table, [record("t0000", "zork")], tax)
        assert sims[labels[0]] == pytest.approx(1.0, abs=1e-12)
        assert sims[labels[1]] == 0.0
        for label in labels[2:]:
            assert sims[label] == pytest.approx(1.0 / math.sqrt(2), abs=1e-12)

    def test_text_matching_a_definition_scores_one(self):
        tax = build_alien_taxonomy()
        target = tax.labels()[0]
        definition = tax.definition_of(target)
        texts = [tax.definition_of(label) for label in tax.labels()] + [definition]
        table = hash_table(texts, dim=16, seed=2)
        [(_, sims)] = score(init_model(16), table, [record("t0000", "t", text=definition)], tax)
        assert sims[target] == pytest.approx(1.0, abs=1e-9)
        assert max(sims, key=sims.get) == target

    def test_hasher_fills_missing_texts(self):
        tax = build_alien_taxonomy()
        table = hash_table([tax.definition_of(label) for label in tax.labels()], dim=16, seed=2)
        records = [record("t0000", "offtable term")]
        with pytest.raises(DataValidationError):
            score(init_model(16), table, records, tax)
        scored = score(
            init_model(16), table, records, tax, hasher=lambda t: hash_embed(t, 16, 2)
        )
        assert len(scored[0][1]) == len(tax.labels())

    def test_missing_definition_errors_without_hasher(self):
        tax = build_alien_taxonomy()
        table = hash_table(["just a term"], dim=16, seed=2)
        with pytest.raises(DataValidationError):
            score(init_model(16), table, [record("t0000", "just a term")], tax)


class TestRollupMean:
    def test_two_records_average(self):
        rec = record("t0000", "wug")
        scored = [
            (rec, {"A": 0.9, "B": 0.1}),
            (record("t0000", "wug", text="wug expansion"), {"A": 0.5, "B": 0.3}),
        ]
        matrix = rollup_mean(scored)
        assert set(matrix) == {"t0000"}
        assert matrix["t0000"]["term"] == "wug"
        assert matrix["t0000"]["scores"]["A"] == pytest.approx(0.7, abs=1e-12)
        assert matrix["t0000"]["scores"]["B"] == pytest.approx(0.2, abs=1e-12)

    def test_single_record_passthrough(self):
        scored = [(record("t0001", "fep"), {"A": 0.25, "B": -0.5})]
        matrix = rollup_mean(scored)
        assert matrix["t0001"]["scores"] == {"A": 0.25, "B": -0.5}

    def test_origins_stay_separate(self):
        scored = [
            (record("t0000", "wug"), {"A": 1.0}),
            (record("t0001", "fep"), {"A": 0.0}),
        ]
        matrix = rollup_mean(scored)
        assert matrix["t0000"]["scores"]["A"] == 1.0
        assert matrix["t0001"]["scores"]["A"] == 0.0

    def test_three_way_mean(self):
        recs = [record("t0000", "wug", text=f"wug v{i}") for i in range(3)]
        scored = [(r, {"A": v}) for r, v in zip(recs, [0.0, 0.5, 1.0])]
        assert rollup_mean(scored)["t0000"]["scores"]["A"] == pytest.approx(0.5, abs=1e-12)

    def test_inconsistent_label_sets_error(self):
        scored = [
            (record("t0000", "wug"), {"A": 0.9, "B": 0.1}),
            (record("t0000", "wug", text="wug two"), {"A": 0.5, "C": 0.3}),
        ]
        with pytest.raises(DataValidationError):
            rollup_mean(scored)


class TestRank:
    def test_descending_similarity(self):
        matrix = {"t0000": matrix_row("wug", {"A": 0.1, "B": 0.9, "C": 0.5})}
        [ranked] = rank(matrix)
        assert ranked.labels == ("B", "C", "A")
        assert ranked.origin_id == "t0000"
        assert ranked.term == "wug"

    def test_exact_ties_break_lexicographically(self):
        matrix = {"t0000": matrix_row("wug", {"B": 0.5, "A": 0.5, "C": 0.9})}
        [ranked] = rank(matrix)
        assert ranked.labels == ("C", "A", "B")

    def test_rows_sorted_by_origin_id(self):
        matrix = {
            "t0002": matrix_row("c", {"A": 0.0}),
            "t0000": matrix_row("a", {"A": 0.0}),
            "t0001": matrix_row("b", {"A": 0.0}),
        }
        assert [r.origin_id for r in rank(matrix)] == ["t0000", "t0001", "t0002"]

    def test_constant_shift_leaves_order_unchanged(self):
        scores = {"A": 0.12, "B": -0.4, "C": 0.3, "D": 0.0}
        base = rank({"t0000": matrix_row("x", scores)})
        shifted = rank(
            {"t0000": matrix_row("x", {k: v + 0.25 for k, v in scores.items()})}
        )
        assert base[0].labels == shifted[0].labels

    @given(
        st.dictionaries(
            st.sampled_from(list("ABCDEFGH")),
            st.floats(min_value=-1.0, max_value=1.0, allow_nan=False),
            min_size=1,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_rank_is_a_score_sorted_permutation(self, scores):
        [ranked] = rank({"t0000": matrix_row("x", scores)})
        assert sorted(ranked.labels) == sorted(scores)
        values = [scores[label] for label in ranked.labels]
        assert values == sorted(values, reverse=True)
        assert scores[ranked.labels[0]] == max(scores.values())


class TestEnsembleMean:
    def test_singleton_is_identity(self):
        matrix = {"t0000": matrix_row("wug", {"A": 0.3, "B": -0.2})}
        out = ensemble_mean([matrix])
        assert out == matrix
        assert rank(out) == rank(matrix)

    def test_elementwise_mean(self):
        m1 = {"t0000": matrix_row("wug", {"A": 0.2, "B": 1.0})}
        m2 = {"t0000": matrix_row("wug", {"A": 0.4, "B": 0.0})}
        out = ensemble_mean([m1, m2])
        assert out["t0000"]["scores"]["A"] == pytest.approx(0.3, abs=1e-12)
        assert out["t0000"]["scores"]["B"] == pytest.approx(0.5, abs=1e-12)

    def test_commutes_with_rollup(self):
        # ensembling two single-record roll-ups equals rolling up the
        # concatenated scored lists
        r1 = [(record("t0000", "wug"), {"A": 0.9, "B": 0.1})]
        r2 = [(record("t0000", "wug"), {"A": 0.5, "B": 0.7})]
        via_ensemble = ensemble_mean([rollup_mean(r1), rollup_mean(r2)])
        via_rollup = rollup_mean(r1 + r2)
        assert via_ensemble == via_rollup

    def test_empty_list_errors(self):
        with pytest.raises(DataValidationError):
            ensemble_mean([])

    def test_origin_mismatch_errors(self):
        m1 = {"t0000": matrix_row("wug", {"A": 0.2})}
        m2 = {"t0001": matrix_row("wug", {"A": 0.2})}
        with pytest.raises(DataValidationError):
            ensemble_mean([m1, m2])

    def test_label_mismatch_errors(self):
        m1 = {"t0000": matrix_row("wug", {"A": 0.2})}
        m2 = {"t0000": matrix_row("wug", {"B": 0.2})}
        with pytest.raises(DataValidationError):
            ensemble_mean([m1, m2])

    def test_term_mismatch_errors(self):
        m1 = {"t0000": matrix_row("wug", {"A": 0.2})}
        m2 = {"t0000": matrix_row("fep", {"A": 0.2})}
        with pytest.raises(DataValidationError):
            ensemble_mean([m1, m2])


class TestSimilarityWire:
    def test_roundtrip(self, tmp_path):
        matrix = {
            "t0000": matrix_row("wug", {"A": 1.0 / 3.0, "B": -0.125}),
            "t0001": matrix_row("fep", {"A": 0.1 + 0.2, "B": 1.0}),
        }
        path = tmp_path / "sims.json"
        write_similarity(matrix, path)
        assert read_similarity(path) == matrix

    def test_bad_json_errors(self, tmp_path):
        path = tmp_path / "sims.json"
        path.write_text("{oops")
        with pytest.raises(DataValidationError):
            read_similarity(path)

    def test_non_object_errors(self, tmp_path):
        path = tmp_path / "sims.json"
        path.write_text("[1, 2]")
        with pytest.raises(DataValidationError):
            read_similarity(path)

    def test_malformed_row_errors(self, tmp_path):
        path = tmp_path / "sims.json"
        path.write_text('{"t0000": {"term": "wug", "scores": {}}}')
        with pytest.raises(DataValidationError):
            read_similarity(path)
        path.write_text('{"t0000": {"scores": {"A": 0.5}}}')
        with pytest.raises(DataValidationError):
            read_similarity(path)

    def test_out_of_range_score_errors(self, tmp_path):
        path = tmp_path / "sims.json"
        path.write_text('{"t0000": {"term": "wug", "scores": {"A": 1.5}}}')
        with pytest.raises(DataValidationError):
            read_similarity(path)


class TestRankedWire:
    def test_roundtrip(self, tmp_path):
        ranked = [
            RankedList("t0000", "wug", ("B", "C", "A")),
            RankedList("t0001", "fep", ("A", "B", "C")),
        ]
        path = tmp_path / "ranked.csv"
        write_ranked(ranked, path)
        assert read_ranked(path) == ranked

    def test_header_includes_term_column(self, tmp_path):
        path = tmp_path / "ranked.csv"
        write_ranked([RankedList("t0000", "wug", ("A", "B"))], path)
        assert path.read_text().splitlines()[0] == "origin_id,term,rank1,rank2"

    def test_tabs_in_fields_are_flattened(self, tmp_path):
        path = tmp_path / "ranked.csv"
        write_ranked([RankedList("t0000", "wug\tnote", ("A",))], path)
        assert read_ranked(path)[0].term == "wug note"

    def test_empty_ranking_errors(self, tmp_path):
        with pytest.raises(DataValidationError):
            write_ranked([], tmp_path / "ranked.csv")

    def test_inconsistent_width_errors(self, tmp_path):
        ranked = [
            RankedList("t0000", "wug", ("A", "B")),
            RankedList("t0001", "fep", ("A",)),
        ]
        with pytest.raises(DataValidationError):
            write_ranked(ranked, tmp_path / "ranked.csv")

    def test_bad_header_errors(self, tmp_path):
        path = tmp_path / "ranked.csv"
        path.write_text("id,term,rank1\nt0000,wug,A\n")
        with pytest.raises(DataValidationError):
            read_ranked(path)

    def test_duplicate_labels_error(self, tmp_path):
        path = tmp_path / "ranked.csv"
        path.write_text("origin_id,term,rank1,rank2\nt0000,wug,A,A\n")
        with pytest.raises(DataValidationError):
            read_ranked(path)

    def test_wrong_column_count_errors(self, tmp_path):
        path = tmp_path / "ranked.csv"
        path.write_text("origin_id,term,rank1,rank2\nt0000,wug,A\n")
        with pytest.raises(DataValidationError):
            read_ranked(path)


class TestEndToEndRanking:
    def test_rank_of_ensemble_of_one_matches_rank_of_matrix(self):
        tax = build_alien_taxonomy()
        texts = [tax.definition_of(label) for label in tax.labels()] + ["plonket alpha"]
        table = hash_table(texts, dim=32, seed=8)
        scored = score(init_model(32), table, [record("t0000", "plonket alpha")], tax)
        matrix = rollup_mean(scored)
        assert rank(ensemble_mean([matrix])) == rank(matrix)
