"""Tests for preimage search, size ceilings and the 3-colourability reduction."""

import math

import networkx as nx
import pytest

from viewrewrite.config import Settings
from viewrewrite.errors import BudgetExceeded, NotAViewImage, NotConnected, ParseError
from viewrewrite.fixtures import A5, THREE_COL
from viewrewrite.graphs import GraphDb
from viewrewrite.models import PreimageStatus
from viewrewrite.oracles import random_connected_graph, three_coloring
from viewrewrite.preimage import (
    colour_alphabet,
    colouring_from_preimage,
    default_node_bound,
    find_preimage,
    gen_3col,
    parse_undirected,
    preimage_size_ceiling,
    rewrite_via_preimage,
)
from viewrewrite.rpq import QuerySpec, ViewInstance, ViewSpec, apply_view, path_of_word


def single_v2_edge():
    return ViewInstance(GraphDb.build(["V1", "V2"], [("x", "V2", "y")]))


class TestFindPreimage:
    def test_identity_view(self):
        v = ViewSpec.parse({"V": "a"}, ["a"])
        s = apply_view(path_of_word(("a", "a"), ["a"]), v)
        result = find_preimage(s, v, len(s.nodes))
        assert result.found
        assert apply_view(result.database, v).graph.edges == s.graph.edges

    def test_fresh_nodes(self):
        v = ViewSpec.parse({"V": "a a"}, ["a"])
        s = ViewInstance(GraphDb.build(["V"], [("x", "V", "y")]))
        assert not find_preimage(s, v, 2).found
        result = find_preimage(s, v, 3)
        assert result.found
        assert len(result.database.nodes) == 3
        assert apply_view(result.database, v).graph.edges == s.graph.edges

    def test_single_v2_edge_is_not_a_view_image(self):
        s = single_v2_edge()
        bound = default_node_bound(s)
        assert bound == 2 + 4
        result = find_preimage(s, A5.view_spec, bound)
        assert result.status == PreimageStatus.NOT_FOUND_WITHIN_BOUND
        assert result.bound == bound

    def test_bound_below_instance(self):
        s = single_v2_edge()
        assert find_preimage(s, A5.view_spec, 1).steps == 0

    def test_label_mismatch(self):
        s = ViewInstance(GraphDb.build(["W"], [("x", "W", "y")]))
        with pytest.raises(ParseError):
            find_preimage(s, A5.view_spec, 4)


class TestRewriteViaPreimage:
    def test_composed_views(self):
        q = QuerySpec.parse("a a", ["a"])
        v = ViewSpec.parse({"V": "a"}, ["a"])
        s = apply_view(path_of_word(("a",) * 3, ["a"]), v)
        assert rewrite_via_preimage(s, q, v) == [("p0", "p2"), ("p1", "p3")]

    def test_raises_without_preimage(self):
        with pytest.raises(NotAViewImage):
            rewrite_via_preimage(single_v2_edge(), A5.query_spec, A5.view_spec)


class TestCeiling:
    def test_a5_example_databases(self):
        v = A5.view_spec
        s = apply_view(path_of_word(("a",) * 5, ["a"]), v)
        report = preimage_size_ceiling(s, v)
        n = v.product.n_of_v
        assert report.n_of_v == n
        assert report.instance_size == len(s.nodes)
        assert report.log10_transition_functions == pytest.approx(n * math.log10(n))
        assert report.log10_path_bound == pytest.approx(
            2 * math.log10(len(s.nodes)) + n * math.log10(n)
        )
        assert report.log10_log10_ramsey_bound > report.log10_transition_functions

    def test_as_dict_keys(self):
        v = ViewSpec.parse({"V": "a"}, ["a"])
        s = apply_view(path_of_word(("a",), ["a"]), v)
        report = preimage_size_ceiling(s, v)
        assert set(report.as_dict()) == {
            "n_of_v", "instance_size", "log10_transition_functions",
            "log10_path_bound", "log10_log10_ramsey_bound",
        }
        assert math.isfinite(report.log10_log10_ramsey_bound)


class TestThreeColouring:
    def test_alphabet(self):
        assert sorted(colour_alphabet()) == list(THREE_COL.sigma)
        assert len(colour_alphabet()) == 6

    def test_instance_is_symmetric(self):
        v, s = gen_3col(nx.path_graph(3))
        assert v.tau == ("V1", "V2")
        assert s.graph.edges_with_label("V2") == []
        assert sorted(s.graph.edges_with_label("V1")) == [
            ("0", "1"), ("1", "0"), ("1", "2"), ("2", "1"),
        ]

    @pytest.mark.parametrize(
        "graph",
        [nx.complete_graph(3), nx.cycle_graph(5), nx.petersen_graph()],
        ids=["K3", "C5", "Petersen"],
    )
    def test_colourable_graphs_have_preimages(self, graph):
        v, s = gen_3col(graph)
        result = find_preimage(s, v, len(s.nodes))
        assert result.status == PreimageStatus.FOUND
        colours = colouring_from_preimage(result.database)
        assert set(colours) == {str(n) for n in graph.nodes}
        assert all(colours[str(x)] != colours[str(y)] for x, y in graph.edges)

    def test_k4_has_no_preimage(self):
        graph = nx.complete_graph(4)
        assert three_coloring(graph) is None
        v, s = gen_3col(graph)
        # no fresh nodes: every candidate segment is a single letter
        result = find_preimage(s, v, len(s.nodes))
        assert result.status == PreimageStatus.NOT_FOUND_WITHIN_BOUND
        assert result.bound == 4
        assert 0 < result.steps <= Settings().max_preimage_steps

    def test_step_budget(self):
        v, s = gen_3col(nx.complete_graph(4))
        with pytest.raises(BudgetExceeded):
            find_preimage(s, v, len(s.nodes), Settings(max_preimage_steps=1))

    def test_triangle_with_apex_has_no_preimage(self):
        graph = nx.Graph([("a", "b"), ("b", "c"), ("c", "a")])
        graph.add_edges_from(("top", n) for n in "abc")
        assert nx.is_isomorphic(graph, nx.complete_graph(4))
        v, s = gen_3col(graph)
        result = find_preimage(s, v, len(s.nodes))
        assert result.status == PreimageStatus.NOT_FOUND_WITHIN_BOUND
        assert result.bound == len(s.nodes)

    @pytest.mark.slow
    def test_agrees_with_backtracking_colouring(self):
        for seed in range(30):
            graph = random_connected_graph(3 + seed % 6, 0.5, seed)
            v, s = gen_3col(graph)
            result = find_preimage(s, v, len(s.nodes))
            assert result.found == (three_coloring(graph) is not None), sorted(graph.edges)

    def test_edge_list_input(self):
        v, s = gen_3col([("a", "b"), ("b", "c")])
        assert s.nodes == {"a", "b", "c"}

    @pytest.mark.parametrize("graph", [nx.Graph(), nx.Graph([(0, 1), (2, 3)])])
    def test_needs_connected_graph(self, graph):
        with pytest.raises(NotConnected):
            gen_3col(graph)

    def test_parse_undirected(self):
        g = parse_undirected("# triangle\nnode a\nedge a b\nedge b c\nedge c a\n")
        assert g.number_of_nodes() == 3 and g.number_of_edges() == 3

    @pytest.mark.parametrize("text", ["edge a a\n", "vertex a\n", "edge a\n"])
    def test_parse_undirected_errors(self, text):
        with pytest.raises(ParseError):
            parse_undirected(text)
