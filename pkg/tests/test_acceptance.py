"""End-to-end checks: every route to the query answers agrees on the worked examples."""

import numpy as np
import pytest

from viewrewrite.automata import all_words, enumerate_words
from viewrewrite.decision import check_determinacy_bounded, check_monotone_words
from viewrewrite.fixtures import A5, BRANCH, MOD6, a5_path_db, a5_decoy_db, reference_rewriting
from viewrewrite.graphs import GraphDb
from viewrewrite.models import VerdictStatus
from viewrewrite.oracles import enumerate_dbs, isomorphism_classes, random_db, random_word
from viewrewrite.pebble import default_l, rewrite_eval, rewrite_holds
from viewrewrite.rpq import QuerySpec, apply_view, path_of_word, rpq_eval
from viewrewrite.template import build_template, cert_all, template_core


def answers_on_image(db, fixture):
    s = apply_view(db, fixture.view_spec)
    expected = [
        p for p in rpq_eval(db, fixture.query_spec) if p[0] in s.nodes and p[1] in s.nodes
    ]
    return s, expected


def unary_cycle(n):
    return GraphDb.build(["a"], [(f"c{i}", "a", f"c{(i + 1) % n}") for i in range(n)])


@pytest.fixture(scope="module")
def branch_templates():
    t = build_template(BRANCH.query_spec, BRANCH.view_spec)
    return t, template_core(t)


@pytest.fixture(scope="module")
def mod6_templates():
    t = build_template(MOD6.query_spec, MOD6.view_spec)
    return t, template_core(t)


@pytest.mark.slow
@pytest.mark.parametrize("fixture,max_len", [(BRANCH, 10), (MOD6, 20)], ids=["Branch", "Mod6"])
class TestMonotonicallyDetermined:
    def test_query_words(self, fixture, max_len):
        t = build_template(fixture.query_spec, fixture.view_spec)
        for word in enumerate_words(fixture.query_spec.dfa, max_len):
            s, expected = answers_on_image(path_of_word(word, fixture.sigma), fixture)
            assert cert_all(s, t) == expected
            assert reference_rewriting(fixture, s) == expected

    def test_random_words(self, fixture, max_len):
        t = build_template(fixture.query_spec, fixture.view_spec)
        rng = np.random.default_rng(5)
        for _ in range(200):
            word = random_word(fixture.sigma, max_len, rng)
            s, expected = answers_on_image(path_of_word(word, fixture.sigma), fixture)
            assert cert_all(s, t) == expected, word

    def test_game_rewriting_with_default_l(self, fixture, max_len):
        q, v = fixture.query_spec, fixture.view_spec
        t = template_core(build_template(q, v))
        l = default_l(q, v, t)
        for word in enumerate_words(q.dfa, max_len):
            s, expected = answers_on_image(path_of_word(word, fixture.sigma), fixture)
            assert rewrite_eval(s, t, l) == expected, word

    def test_no_bad_word(self, fixture, max_len):
        q, v = fixture.query_spec, fixture.view_spec
        verdict = check_monotone_words(q, v, build_template(q, v), max_len)
        assert verdict.status == VerdictStatus.NO_COUNTEREXAMPLE_UP_TO
        assert verdict.bound == max_len


@pytest.mark.slow
class TestBranchRewriting:
    def test_every_word_up_to_length_ten(self, branch_templates):
        _, core = branch_templates
        q, v = BRANCH.query_spec, BRANCH.view_spec
        for word in all_words(sorted(BRANCH.sigma), 10):
            s = apply_view(path_of_word(word, BRANCH.sigma), v)
            first, last = "p0", f"p{len(word)}"
            answer = q.dfa.accepts(word)
            if first not in s.nodes or last not in s.nodes:
                assert not answer, word
                continue
            assert rewrite_holds(s, core, 1, first, last) == answer, word
            assert ((first, last) in reference_rewriting(BRANCH, s)) == answer, word

    def test_random_databases(self, branch_templates):
        _, core = branch_templates
        for seed in range(500):
            db = random_db(sorted(BRANCH.sigma), 1 + seed % 6, 0.15, seed)
            s, expected = answers_on_image(db, BRANCH)
            assert cert_all(s, core) == expected, seed
            assert reference_rewriting(BRANCH, s) == expected, seed
            assert rewrite_eval(s, core, 1) == expected, seed


@pytest.mark.slow
class TestMod6Rewriting:
    def test_unary_graphs_up_to_four_nodes(self, mod6_templates):
        _, core = mod6_templates
        graphs = isomorphism_classes(db for n in range(1, 5) for db in enumerate_dbs(["a"], n))
        assert len(graphs) == 2 + 10 + 104 + 3044
        for db in graphs:
            s, expected = answers_on_image(db, MOD6)
            assert cert_all(s, core) == expected, sorted(db.edges)
            assert reference_rewriting(MOD6, s) == expected, sorted(db.edges)

    def test_paths_and_cycles_up_to_fourteen_nodes(self, mod6_templates):
        _, core = mod6_templates
        for n in range(1, 15):
            for db in (path_of_word(("a",) * (n - 1), ["a"]), unary_cycle(n)):
                s, expected = answers_on_image(db, MOD6)
                assert cert_all(s, core) == expected, (n, sorted(db.edges))
                assert reference_rewriting(MOD6, s) == expected, (n, sorted(db.edges))


class TestDeterminedNotMonotone:
    def test_certain_answers_miss_an_answer(self):
        q, v = A5.query_spec, A5.view_spec
        s = apply_view(a5_path_db(), v)
        assert reference_rewriting(A5, s) == [("x0", "x5")]
        assert cert_all(s, build_template(q, v)) == []

    def test_bounded_determinacy_holds_on_example_databases(self):
        verdict = check_determinacy_bounded(
            A5.query_spec, A5.view_spec, 2, extra=[a5_path_db(), a5_decoy_db()]
        )
        assert not verdict.refuted

    @pytest.mark.slow
    def test_no_determinacy_counterexample_up_to_four_nodes(self):
        verdict = check_determinacy_bounded(A5.query_spec, A5.view_spec, 4)
        assert verdict.status == VerdictStatus.NO_COUNTEREXAMPLE_UP_TO
        assert verdict.note == "exhaustive(nodes<=4)"

    @pytest.mark.slow
    def test_shorter_query_is_not_determined(self):
        q = QuerySpec.parse("a a", ["a"])
        verdict = check_determinacy_bounded(q, A5.view_spec, 4)
        assert verdict.refuted
        first, second = verdict.evidence_pair
        assert apply_view(first, A5.view_spec).graph.edges == apply_view(second, A5.view_spec).graph.edges
        assert rpq_eval(first, q) != rpq_eval(second, q)

    def test_monotonicity_fails(self):
        q, v = A5.query_spec, A5.view_spec
        assert check_monotone_words(q, v, build_template(q, v), 5).evidence_word == ("a",) * 5
