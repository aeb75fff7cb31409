"""Tests for regex parsing and the automata pipeline."""

import numpy as np
import pytest

from viewrewrite.automata import (
    Epsilon,
    ast_matches,
    all_words,
    build_view_product,
    determinize,
    dfa_to_regex,
    enumerate_words,
    format_word,
    lifted_set_transition,
    minimize,
    nonempty_intersection,
    parse_regex,
    regex_to_text,
    to_nfa,
    to_min_dfa,
    universal_dfa,
    word_transition,
)
from viewrewrite.errors import EmptyViewSet, ParseError, UnknownState, UnknownSymbol
from viewrewrite.oracles import random_word

AB = ("a", "b")


def dfa(text, alphabet=AB):
    return to_min_dfa(parse_regex(text, alphabet), alphabet)


class TestParseRegex:
    def test_precedence(self):
        ast = parse_regex("a b* | b", AB)
        assert ast_matches(ast, ("a", "b", "b"))
        assert ast_matches(ast, ("b",))
        assert not ast_matches(ast, ("a", "b", "a"))

    def test_multi_character_symbols(self):
        ast = parse_regex("rg gr*", ("rg", "gr"))
        assert ast_matches(ast, ("rg", "gr", "gr"))

    def test_eps_and_empty(self):
        assert parse_regex("eps", AB) == Epsilon()
        assert dfa("empty").is_empty()

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbol):
            parse_regex("a c", AB)

    def test_unbalanced(self):
        with pytest.raises(ParseError):
            parse_regex("(a b", AB)


class TestMinimalDfa:
    def test_sizes(self):
        # complete DFAs keep their dead state
        assert len(dfa("a a a a a", ("a",)).table) == 7
        assert len(dfa("(a a)*", ("a",)).table) == 2

    def test_equal_languages_give_identical_automata(self):
        assert dfa("a a* | b") == dfa("b | a+")

    def test_agrees_with_regex_semantics(self):
        ast = parse_regex("(a | b b)* a?", AB)
        d = to_min_dfa(ast, AB)
        for word in all_words(AB, 6):
            assert d.accepts(word) == ast_matches(ast, word)

    def test_matrix_matches_table(self):
        d = dfa("a b*")
        assert d.matrix.shape == (len(d.table), 2)
        assert d.matrix[d.initial, d.label_index("a")] == d.step(d.initial, "a")

    def test_pipeline_stages_agree(self):
        nfa = to_nfa(parse_regex("(a | b)* a b", AB), AB)
        subset = determinize(nfa)
        small = minimize(subset)
        assert len(small.table) == 3
        assert len(small.table) <= len(subset.table)
        for word in all_words(AB, 5):
            assert nfa.accepts(word) == subset.accepts(word) == small.accepts(word)


class TestWords:
    def test_enumerate_words_sorted_by_length(self):
        assert enumerate_words(dfa("a b*"), 3) == [("a",), ("a", "b"), ("a", "b", "b")]

    def test_nonempty_intersection_is_shortest(self):
        assert nonempty_intersection(dfa("a* b"), dfa("a a+ b | b b")) == ("a", "a", "b")
        assert nonempty_intersection(dfa("a+"), dfa("b+")) is None

    def test_format_word(self):
        assert format_word(("a", "a")) == "aa"
        assert format_word(("rg", "gr")) == "rg gr"
        assert format_word(()) == "eps"


class TestDfaToRegex:
    @pytest.mark.parametrize("text", ["a b* a | a", "(a b)*", "empty", "eps", "a* b a*"])
    def test_language_preserved(self, text):
        original = dfa(text)
        assert to_min_dfa(dfa_to_regex(original), AB) == original

    def test_renders(self):
        assert regex_to_text(dfa_to_regex(dfa("a"))) == "a"


class TestTransitions:
    def setup_method(self):
        self.d = dfa("a (b a)* | b b")

    def test_word_transition_composes(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            u, w = random_word(AB, 4, rng), random_word(AB, 4, rng)
            assert word_transition(self.d, u).then(word_transition(self.d, w)) == word_transition(self.d, u + w)

    def test_lifted_set_transition(self):
        image = lifted_set_transition(self.d, [self.d.initial], ("a",))
        assert image == {self.d.step(self.d.initial, "a")}
        with pytest.raises(UnknownState):
            lifted_set_transition(self.d, [99], ("a",))


class TestViewProduct:
    def test_n_of_v(self):
        a = ("a",)
        product = build_view_product([parse_regex("a a a", a), parse_regex("a a a a", a)], a)
        assert product.n_of_v == 6
        finals = [product.accepting_views(q) for q in product.states]
        assert sum(1 for f in finals if f == [0]) == 1
        assert sum(1 for f in finals if f == [1]) == 1

    def test_empty_view_set(self):
        with pytest.raises(EmptyViewSet):
            build_view_product([])

    def test_single_universal_view(self):
        assert build_view_product([universal_dfa(AB)]).n_of_v == 1
