"""
Worked examples with hand-written reference rewritings.

Each fixture pairs a query and views with a first-order rewriting evaluated
directly over the view instance, with quantifiers ranging over the
instance's nodes. The rewritings are independent of the template and game
machinery, so they serve as oracles for it.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set

import networkx as nx

from .errors import FixtureMismatch
from .graphs import GraphDb
from .rpq import Pair, QuerySpec, SpecFile, ViewInstance, ViewSpec, parse_spec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Fixture:
    """A named query/view pair, optionally with a reference rewriting."""

    id: str
    sigma: tuple
    views: Dict[str, str] = field(hash=False)
    query: Optional[str] = None
    notes: str = ""

    def spec_text(self) -> str:
        lines = ["alphabet " + " ".join(self.sigma)]
        lines += [f"view {name} = {regex}" for name, regex in self.views.items()]
        if self.query is not None:
            lines.append(f"query Q = {self.query}")
        return "\n".join(lines) + "\n"

    def spec(self) -> SpecFile:
        return parse_spec(self.spec_text())

    @property
    def view_spec(self) -> ViewSpec:
        return ViewSpec.parse(self.views, self.sigma)

    @property
    def query_spec(self) -> QuerySpec:
        if self.query is None:
            raise FixtureMismatch(f"fixture {self.id} has no query")
        return QuerySpec.parse(self.query, self.sigma)


A5 = Fixture(
    "A5",
    ("a",),
    {"V1": "a a a", "V2": "a a a a"},
    "a a a a a",
    "determined by an FO rewriting, not monotonically determined",
)
A5_ALT = Fixture(
    "A5Alt",
    ("a",),
    {"V1": "a a a", "V2": "a a a a"},
    "a a a a a",
    "A5 with the extra conjunct V1(x, u'); agrees with A5 on view images only",
)
BRANCH = Fixture(
    "Branch",
    ("a", "b", "c"),
    {"V1": "a b*", "V2": "a c*", "V3": "b* a | c* a"},
    "a b* a | a c* a",
    "monotonically determined with a conjunctive rewriting but no RPQ rewriting",
)
MOD6 = Fixture(
    "Mod6",
    ("a",),
    {"V1": "a | a a", "V2": "a a | a a a"},
    "a (a a a a a a)* | a a (a a a a a a)*",
    "monotonically determined; the rewriting needs a transitive closure",
)
THREE_COL = Fixture(
    "ThreeCol",
    ("bg", "br", "gb", "gr", "rb", "rg"),
    {
        "V1": "rg | gr | bg | gb | rb | br",
        "V2": " | ".join(
            f"{x} {y}"
            for x in ("rg", "gr", "bg", "gb", "rb", "br")
            for y in ("rg", "gr", "bg", "gb", "rb", "br")
            if x[1] != y[0]
        ),
    },
    None,
    "preimage existence encodes 3-colourability (see preimage.gen_3col)",
)

FIXTURES: Dict[str, Fixture] = {f.id: f for f in (A5, A5_ALT, BRANCH, MOD6, THREE_COL)}

# numbered names accepted wherever a fixture id is
ALIASES: Dict[str, str] = {"Ex1": "A5", "Ex1Alt": "A5Alt", "Ex2": "Branch", "Ex3": "Mod6"}


def get_fixture(name: str) -> Fixture:
    try:
        return FIXTURES[ALIASES.get(name, name)]
    except KeyError:
        raise FixtureMismatch(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}") from None


# ── Example databases ────────────────────────────────────────────────────────


def a5_path_db() -> GraphDb:
    """The path ``x0 –a→ … –a→ x5``."""
    nodes = [f"x{i}" for i in range(6)]
    return GraphDb.build({"a"}, [(nodes[i], "a", nodes[i + 1]) for i in range(5)], nodes)


def a5_decoy_db() -> GraphDb:
    """Same A5 view image as :func:`a5_path_db` (plus more), but no ``a⁵`` path from x0 to x5."""
    chains = [
        ["x0", "y1", "y2", "x3", "x4"],
        ["x1", "x2", "y3", "x4"],
        ["x2", "y4", "y5", "x5"],
    ]
    edges = [(c[i], "a", c[i + 1]) for c in chains for i in range(len(c) - 1)]
    return GraphDb.build({"a"}, edges)


def branch_db() -> GraphDb:
    """``x –a→ z –b→ –b→ –b→ –b→ –a→ y``."""
    path = ["x", "z", "n2", "n3", "n4", "n5", "y"]
    labels = ["a", "b", "b", "b", "b", "a"]
    edges = [(path[i], labels[i], path[i + 1]) for i in range(len(labels))]
    return GraphDb.build({"a", "b", "c"}, edges)


def branch_decoy_db() -> GraphDb:
    """An ``abbb`` path and an ``acc`` path from x into z, then ``ba`` to y."""
    chains = [
        (["x", "t1", "t2", "t3", "z"], ["a", "b", "b", "b"]),
        (["x", "u1", "u2", "z"], ["a", "c", "c"]),
        (["z", "w", "y"], ["b", "a"]),
    ]
    edges = [(c[i], labels[i], c[i + 1]) for c, labels in chains for i in range(len(labels))]
    return GraphDb.build({"a", "b", "c"}, edges)


# ── Reference rewritings ─────────────────────────────────────────────────────


def _rel(s: ViewInstance, label: str) -> Set[Pair]:
    return set(s.graph.edges_with_label(label))


def _a5(s: ViewInstance) -> Set[Pair]:
    """∃u V2(x,u) ∧ ∀v (V1(v,u) ⇒ V2(v,y))"""
    v2 = _rel(s, "V2")
    out = set()
    for x, u in v2:
        into_u = s.graph.predecessors(u, "V1")
        for y in s.nodes:
            if all((v, y) in v2 for v in into_u):
                out.add((x, y))
    return out


def _a5_alt(s: ViewInstance) -> Set[Pair]:
    """A5 with the extra conjunct ∃u' V1(x,u')"""
    has_v1 = {x for x, _ in _rel(s, "V1")}
    return {(x, y) for x, y in _a5(s) if x in has_v1}


def _branch(s: ViewInstance) -> Set[Pair]:
    """∃z V1(x,z) ∧ V2(x,z) ∧ V3(z,y)"""
    both = _rel(s, "V1") & _rel(s, "V2")
    return {(x, y) for x, z in both for y in s.graph.successors(z, "V3")}


def _mod6(s: ViewInstance) -> Set[Pair]:
    """∃z V1(x,z) ∧ T*(z,y), T the chain of three V1∧V2 steps"""
    both = _rel(s, "V1") & _rel(s, "V2")
    step: Dict[str, Set[str]] = {}
    for x, y in both:
        step.setdefault(x, set()).add(y)
    closure = nx.DiGraph()
    closure.add_nodes_from(s.nodes)
    for x in s.nodes:
        for z1 in step.get(x, ()):
            for z2 in step.get(z1, ()):
                for y in step.get(z2, ()):
                    closure.add_edge(x, y)
    out = set()
    for x, z in _rel(s, "V1"):
        for y in nx.descendants(closure, z) | {z}:
            out.add((x, y))
    return out


_REWRITINGS: Dict[str, Callable[[ViewInstance], Set[Pair]]] = {
    "A5": _a5,
    "A5Alt": _a5_alt,
    "Branch": _branch,
    "Mod6": _mod6,
}


def reference_rewriting(fixture: Fixture, s: ViewInstance) -> List[Pair]:
    """Evaluate the fixture's rewriting on ``s``; sorted pairs."""
    rewriting = _REWRITINGS.get(fixture.id)
    if rewriting is None:
        raise FixtureMismatch(f"fixture {fixture.id} has no reference rewriting")
    known = set(fixture.views)
    if not s.tau <= known:
        raise FixtureMismatch(
            f"instance labels {sorted(s.tau)} are not views of {fixture.id} ({sorted(known)})"
        )
    result = sorted(rewriting(s))
    logger.debug("reference rewriting %s: %d pairs", fixture.id, len(result))
    return result
