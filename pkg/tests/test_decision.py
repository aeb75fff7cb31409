"""Tests for the determinacy searches and the monotone decision procedure."""

import pytest

from viewrewrite.errors import BudgetExceeded
from viewrewrite.decision import (
    BadWordsExplorer,
    check_determinacy_bounded,
    check_monotone_pairs_bounded,
    check_monotone_words,
    database_family,
    decide_monotone_full,
    word_is_bad,
)
from viewrewrite.fixtures import A5, BRANCH, a5_path_db, a5_decoy_db
from viewrewrite.models import VerdictStatus
from viewrewrite.rpq import QuerySpec, ViewSpec
from viewrewrite.template import build_template


def unary(query, views):
    q = QuerySpec.parse(query, ["a"])
    v = ViewSpec.parse(views, ["a"])
    return q, v, build_template(q, v)


class TestDatabaseFamily:
    def test_exhaustive_when_small(self):
        family = database_family(["a"], 2)
        assert family.name == "exhaustive(nodes<=2)"
        assert len(family.databases) == 2 + 16

    def test_structured_when_large(self):
        family = database_family(["a", "b"], 3)
        assert family.name.startswith("paths(len<=6)+random(")
        assert len(family.databases) == 127 + 500

    def test_extra_databases(self):
        family = database_family(["a"], 1, extra=[a5_path_db()])
        assert family.name.endswith("+extra(1)")
        assert family.databases[-1] == a5_path_db()

    def test_rejects_empty_bound(self):
        with pytest.raises(ValueError):
            database_family(["a"], 0)


class TestBoundedDeterminacy:
    def test_refuted_when_views_lose_information(self):
        q = QuerySpec.parse("a", ["a"])
        v = ViewSpec.parse({"V": "a a"}, ["a"])
        verdict = check_determinacy_bounded(q, v, 2)
        assert verdict.refuted
        d1, d2 = verdict.evidence_pair
        assert d1 != d2

    def test_no_counterexample_for_identity_views(self):
        q = QuerySpec.parse("a a", ["a"])
        v = ViewSpec.parse({"V": "a"}, ["a"])
        verdict = check_determinacy_bounded(q, v, 2)
        assert verdict.status == VerdictStatus.NO_COUNTEREXAMPLE_UP_TO
        assert verdict.bound == 2

    def test_monotone_pairs_finds_a5_path(self):
        verdict = check_monotone_pairs_bounded(
            A5.query_spec, A5.view_spec, 1, extra=[a5_path_db(), a5_decoy_db()]
        )
        assert verdict.refuted

    def test_monotone_pairs_identity_views(self):
        q = QuerySpec.parse("a a", ["a"])
        v = ViewSpec.parse({"V": "a"}, ["a"])
        assert not check_monotone_pairs_bounded(q, v, 2).refuted


class TestWordTest:
    def test_a5_five_word_is_bad(self):
        t = build_template(A5.query_spec, A5.view_spec)
        assert word_is_bad(("a",) * 5, A5.query_spec, A5.view_spec, t)

    def test_a5_refuted(self):
        t = build_template(A5.query_spec, A5.view_spec)
        verdict = check_monotone_words(A5.query_spec, A5.view_spec, t, max_len=8)
        assert verdict.refuted
        assert verdict.evidence_word == ("a",) * 5
        assert verdict.to_text().startswith("status Refuted\nevidence_word aaaaa\n")

    def test_branch_has_no_bad_word(self):
        q, v = BRANCH.query_spec, BRANCH.view_spec
        verdict = check_monotone_words(q, v, build_template(q, v), max_len=5)
        assert verdict.status == VerdictStatus.NO_COUNTEREXAMPLE_UP_TO
        assert verdict.to_text() == "status NoCounterexampleUpTo\nchecked_bound 5\n"

    def test_negative_length(self):
        q, v, t = unary("a", {"V": "a"})
        with pytest.raises(ValueError):
            check_monotone_words(q, v, t, max_len=-1)


class TestFullDecision:
    def test_holds_for_composed_views(self):
        q, v, t = unary("a a", {"V": "a"})
        verdict = decide_monotone_full(q, v, t)
        assert verdict.status == VerdictStatus.HOLDS
        assert "disjoint" in verdict.note

    def test_refuted_for_lossy_views(self):
        q, v, t = unary("a", {"V": "a a"})
        verdict = decide_monotone_full(q, v, t)
        assert verdict.refuted
        assert verdict.evidence_word == ("a",)

    def test_pruning_does_not_change_answer(self):
        q, v, t = unary("a a | a a a", {"V1": "a", "V2": "a a"})
        pruned = BadWordsExplorer(q, v, t, budget=100_000).shortest_bad_word()
        full = BadWordsExplorer(q, v, t, budget=100_000, prune=False).shortest_bad_word()
        assert pruned is None and full is None

    def test_a5_shortest_bad_word(self):
        q, v = A5.query_spec, A5.view_spec
        t = build_template(q, v)
        try:
            verdict = decide_monotone_full(q, v, t, budget=50_000)
        except BudgetExceeded:
            pytest.skip("decision budget too small for the a5 template")
        assert verdict.evidence_word == ("a",) * 5

    def test_budget(self):
        q, v, t = unary("a a", {"V": "a"})
        with pytest.raises(BudgetExceeded):
            decide_monotone_full(q, v, t, budget=1)
