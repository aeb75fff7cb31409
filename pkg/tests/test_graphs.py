"""Tests for graph databases, paths and homomorphisms."""

import pytest

from viewrewrite.errors import ParseError, PartialMap, UnknownLabel, UnknownNode
from viewrewrite.graphs import (
    GraphDb,
    Path,
    compose,
    find_hom,
    induced,
    is_hom,
    parse_graph,
    serialize_graph,
)
from viewrewrite.oracles import brute_hom


def cycle(n, label="a", prefix="c"):
    nodes = [f"{prefix}{i}" for i in range(n)]
    return GraphDb.build({label}, [(nodes[i], label, nodes[(i + 1) % n]) for i in range(n)], nodes)


class TestGraphDb:
    def test_edge_endpoints_must_be_nodes(self):
        with pytest.raises(UnknownNode):
            GraphDb(frozenset({"a"}), frozenset({"x"}), frozenset({("x", "a", "y")}))

    def test_edge_label_must_be_in_alphabet(self):
        with pytest.raises(UnknownLabel):
            GraphDb(frozenset({"a"}), frozenset({"x"}), frozenset({("x", "b", "x")}))

    def test_build_adds_endpoints(self):
        db = GraphDb.build({"a"}, [("x", "a", "y")])
        assert db.nodes == {"x", "y"}
        assert db.successors("x", "a") == {"y"}
        assert db.predecessors("y", "a") == {"x"}

    def test_induced_keeps_internal_edges_only(self):
        db = cycle(3)
        sub = induced(db, ["c0", "c1"])
        assert sub.edges == {("c0", "a", "c1")}
        with pytest.raises(UnknownNode):
            induced(db, ["zz"])


class TestPath:
    def test_lies_in(self):
        db = cycle(3)
        assert Path(("c0", "c1", "c2"), ("a", "a")).lies_in(db)
        assert not Path(("c0", "c2"), ("a",)).lies_in(db)

    def test_node_label_count_mismatch(self):
        with pytest.raises(ValueError):
            Path(("x",), ("a",))


class TestHomomorphisms:
    def test_is_hom_requires_total_map(self):
        with pytest.raises(PartialMap):
            is_hom({"c0": "c0"}, cycle(3), cycle(3))

    def test_even_cycle_maps_to_an_edge_pair(self):
        target = GraphDb.build({"a"}, [("p", "a", "q"), ("q", "a", "p")])
        h = find_hom(cycle(4), target)
        assert h is not None
        assert is_hom(h, cycle(4), target)

    def test_triangle_does_not_map_to_two_cycle(self):
        target = GraphDb.build({"a"}, [("p", "a", "q"), ("q", "a", "p")])
        assert find_hom(cycle(3), target) is None
        assert brute_hom(cycle(3), target) is None

    def test_pinning_and_allowed(self):
        src = cycle(4)
        dst = cycle(2, prefix="d")
        h = find_hom(src, dst, pin={"c0": "d1"})
        assert h["c0"] == "d1" and h["c1"] == "d0"
        assert find_hom(src, dst, allowed={"c0": ["d0"], "c1": ["d0"]}) is None

    def test_agrees_with_brute_force(self):
        dst = GraphDb.build({"a", "b"}, [("p", "a", "q"), ("q", "b", "p"), ("q", "a", "q")])
        src = GraphDb.build({"a", "b"}, [("x", "a", "y"), ("y", "a", "z"), ("z", "b", "x")])
        assert (find_hom(src, dst) is None) == (brute_hom(src, dst) is None)

    def test_compose(self):
        assert compose({"x": "y"}, {"y": "z"}) == {"x": "z"}


class TestTextFormat:
    def test_roundtrip_is_canonical(self):
        db = parse_graph("alphabet a b\nedge x a y\nnode z\nedge y b x  # back\n")
        text = serialize_graph(db)
        assert text == "alphabet a b\nnode x\nnode y\nnode z\nedge x a y\nedge y b x\n"
        assert parse_graph(text) == db

    def test_undeclared_label(self):
        with pytest.raises(UnknownLabel):
            parse_graph("alphabet a\nedge x b y\n")

    def test_bad_line_reports_line_number(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_graph("node x\nvertex y\n")
