"""Tests for the existential pebble game and the minimal-l sweep."""

import numpy as np
import pytest

from viewrewrite.automata import universal_dfa
from viewrewrite.errors import UnknownNode
from viewrewrite.fixtures import BRANCH
from viewrewrite.graphs import induced, is_hom
from viewrewrite.models import GameConfig, Player
from viewrewrite.oracles import brute_hom, random_db, random_instance
from viewrewrite.pebble import (
    PebbleGame,
    default_l,
    minimal_l_for_word,
    pebble_solve,
    rewrite_eval,
    sweep_minimal_l,
)
from viewrewrite.rpq import QuerySpec, ViewSpec, apply_view, path_of_word
from viewrewrite.template import Template, build_template, cert


@pytest.fixture(scope="module")
def identity():
    """Q = a over the single view V = a: certain answers are the V-edges."""
    q = QuerySpec.parse("a", ["a"])
    v = ViewSpec.parse({"V": "a"}, ["a"])
    return q, v, build_template(q, v)


@pytest.fixture(scope="module")
def branch_template():
    return build_template(BRANCH.query_spec, BRANCH.view_spec)


class TestGameConfig:
    def test_rewriting_config(self):
        cfg = GameConfig.for_rewriting(2)
        assert (cfg.l, cfg.k) == (2, 3)

    @pytest.mark.parametrize("l,k", [(0, 1), (3, 2)])
    def test_rejects_bad_resources(self, l, k):
        with pytest.raises(ValueError):
            GameConfig(l, k)


class TestPebbleSolve:
    def test_edge_is_won_by_player_one(self, identity):
        q, v, t = identity
        s = apply_view(path_of_word(("a", "a"), q.sigma), v)
        result = pebble_solve(s, t, "p0", "p1", GameConfig(1, 2))
        assert result.winner == Player.PLAYER1
        assert result.blocking_set is not None

    def test_two_step_pair_is_won_by_player_two(self, identity):
        q, v, t = identity
        s = apply_view(path_of_word(("a", "a"), q.sigma), v)
        result = pebble_solve(s, t, "p0", "p2", GameConfig(1, 2))
        assert result.winner == Player.PLAYER2
        assert result.family

    def test_schedule_does_not_change_winner(self, identity):
        q, v, t = identity
        s = apply_view(path_of_word(("a", "a", "a"), q.sigma), v)
        for x, y in [("p0", "p1"), ("p0", "p3"), ("p1", "p2")]:
            lex = pebble_solve(s, t, x, y, GameConfig(1, 2), schedule="lex")
            rev = pebble_solve(s, t, x, y, GameConfig(1, 2), schedule="reverse")
            assert lex.winner == rev.winner

    def test_full_cover_is_homomorphism_test(self, branch_template):
        q, v = BRANCH.query_spec, BRANCH.view_spec
        s = apply_view(path_of_word(("a", "b", "a"), q.sigma), v)
        cfg = GameConfig(len(s.nodes) - 1, len(s.nodes))
        for x, y in [("p0", "p3"), ("p1", "p3")]:
            won = pebble_solve(s, branch_template, x, y, cfg).player1_wins
            assert won == cert(s, x, y, branch_template).certain

    def test_player_one_win_implies_certain(self, branch_template):
        q, v = BRANCH.query_spec, BRANCH.view_spec
        s = apply_view(path_of_word(("a", "b", "a"), q.sigma), v)
        for y in sorted(s.nodes):
            if pebble_solve(s, branch_template, "p0", y, GameConfig(1, 2)).player1_wins:
                assert cert(s, "p0", y, branch_template).certain

    def test_unknown_node(self, identity):
        q, v, t = identity
        s = apply_view(path_of_word(("a",), q.sigma), v)
        with pytest.raises(UnknownNode):
            pebble_solve(s, t, "p0", "p9", GameConfig(1, 2))


class TestRewriteEval:
    def test_identity_view_returns_edges(self, identity):
        q, v, t = identity
        s = apply_view(path_of_word(("a", "a", "a"), q.sigma), v)
        assert rewrite_eval(s, t, 1) == [("p0", "p1"), ("p1", "p2"), ("p2", "p3")]

    def test_default_l(self, identity):
        q, v, t = identity
        assert default_l(q, v, t) == t.size * v.product.n_of_v


class TestMinimalL:
    def test_conjunctive_rewriting_needs_one_pebble(self, branch_template):
        q, v = BRANCH.query_spec, BRANCH.view_spec
        assert minimal_l_for_word(("a", "b", "a"), q, v, branch_template, max_l=1) == 1

    def test_sweep_frame(self, identity):
        q, v, t = identity
        df = sweep_minimal_l([("a",), ("a", "a")], q, v, t, max_l=2)
        assert list(df.columns) == ["word", "length", "endpoints_answer", "minimal_l"]
        assert df["length"].tolist() == [1, 2]
        assert df["endpoints_answer"].tolist() == [True, False]
        assert df["minimal_l"].tolist() == [1, 1]


def random_template(m, seed):
    """A one-label template on ``m`` nodes with random sources and targets."""
    rng = np.random.default_rng(seed)
    graph = random_db(["V"], m, 0.5, seed + 7919)
    nodes = graph.sorted_nodes()
    sources = [n for n in nodes if rng.random() < 0.7] or nodes[:1]
    targets = [n for n in nodes if rng.random() < 0.7] or nodes[-1:]
    return Template(graph, frozenset(sources), frozenset(targets), {}, universal_dfa(["V"]), {})


def random_case(seed, min_nodes=1):
    n = min_nodes + seed % (6 - min_nodes)
    s = random_instance(["V"], n, 0.4, seed)
    t = random_template(1 + (seed // 5) % 4, seed)
    nodes = s.graph.sorted_nodes()
    return s, t, nodes[0], nodes[-1]


@pytest.mark.slow
class TestGameAgainstBruteForce:
    def test_full_width_game_matches_homomorphism_existence(self):
        for seed in range(1000):
            s, t, u, v = random_case(seed)
            allowed = t.allowed_for(u, v)
            cfg = GameConfig(1, len(s.nodes))
            result = PebbleGame(s.graph, t, allowed, cfg).solve()
            assert result.player1_wins == (brute_hom(s.graph, t.graph, allowed=allowed) is None), seed

    def test_player_one_win_means_no_homomorphism(self):
        for seed in range(1000):
            s, t, u, v = random_case(seed, min_nodes=3)
            cfg = GameConfig(1, 2) if seed % 2 else GameConfig(2, 3)
            if cfg.k >= len(s.nodes):
                cfg = GameConfig(1, 2)
            allowed = t.allowed_for(u, v)
            if PebbleGame(s.graph, t, allowed, cfg).solve().player1_wins:
                assert brute_hom(s.graph, t.graph, allowed=allowed) is None, seed

    def test_more_pebbles_never_lose_a_win(self):
        for seed in range(300):
            s, t, u, v = random_case(seed, min_nodes=3)
            small = pebble_solve(s, t, u, v, GameConfig(1, 2))
            large = pebble_solve(s, t, u, v, GameConfig(2, 3))
            if small.player1_wins:
                assert large.player1_wins, seed


class TestEnumeration:
    @pytest.mark.parametrize("l,k", [(1, 2), (1, 3), (2, 3)])
    def test_all_sizes_agrees_with_full_size_domains(self, l, k):
        for seed in range(120):
            s, t, u, v = random_case(seed, min_nodes=k + 1)
            allowed = t.allowed_for(u, v)
            cfg = GameConfig(l, k)
            exact = PebbleGame(s.graph, t, allowed, cfg).solve()
            naive = PebbleGame(s.graph, t, allowed, cfg, all_sizes=True).solve()
            assert exact.winner == naive.winner, seed

    def test_family_positions_have_full_width(self, identity):
        q, v, t = identity
        s = apply_view(path_of_word(("a", "a", "a"), q.sigma), v)
        result = pebble_solve(s, t, "p0", "p1", GameConfig(1, 2))
        assert result.winner == Player.PLAYER2
        assert {len(domain) for domain, _ in result.family} == {2}


class TestFamilyRestrictions:
    def test_shortcut_family_is_closed_under_restriction(self, identity):
        q, v, t = identity
        s = apply_view(path_of_word(("a", "a"), q.sigma), v)
        result = pebble_solve(s, t, "p0", "p2", GameConfig(2, 3))
        assert result.winner == Player.PLAYER2
        assert [domain for domain, _ in result.family] == [("p0", "p1", "p2")]
        closed = result.restrictions()
        assert len(closed) == 2 ** 3
        assert ((), ()) in closed

    def test_restrictions_are_partial_homomorphisms(self, identity):
        q, v, t = identity
        s = apply_view(path_of_word(("a", "a", "a"), q.sigma), v)
        result = pebble_solve(s, t, "p0", "p2", GameConfig(1, 2))
        assert result.winner == Player.PLAYER2
        for domain, images in result.restrictions():
            assert is_hom(dict(zip(domain, images)), induced(s.graph, domain), t.graph)
