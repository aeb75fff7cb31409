"""
Edge-labeled directed graphs: the substrate for databases and view instances.

A ``GraphDb`` is a finite relational structure over a binary schema. Node ids
and labels are opaque tokens; edges form a set, so parallel edges with the
same label collapse. Besides construction and the text format, the module
provides induced substructures, simple paths and a complete homomorphism
search with pinned/allowed images.
"""

import logging
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from .errors import ParseError, PartialMap, UnknownLabel, UnknownNode

logger = logging.getLogger(__name__)

TOKEN = re.compile(r"^[A-Za-z0-9_]+$")

Edge = Tuple[str, str, str]
NodeMap = Dict[str, str]


def is_token(text: str) -> bool:
    """True for a valid node id or label (letters, digits, underscore)."""
    return bool(TOKEN.match(text))


@dataclass(frozen=True)
class GraphDb:
    """
    A finite edge-labeled directed graph over an alphabet.

    Every edge endpoint must be a node and every edge label must belong to the
    alphabet. Instances are immutable; derived indexes are cached lazily.
    """

    alphabet: FrozenSet[str]
    nodes: FrozenSet[str] = frozenset()
    edges: FrozenSet[Edge] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        for src, label, dst in self.edges:
            if src not in self.nodes:
                raise UnknownNode(f"edge source {src!r} is not a node")
            if dst not in self.nodes:
                raise UnknownNode(f"edge target {dst!r} is not a node")
            if label not in self.alphabet:
                raise UnknownLabel(f"edge label {label!r} is not in the alphabet")

    # ── Construction ──────────────────────────────────────────────────────────

    @classmethod
    def build(
        cls,
        alphabet: Iterable[str],
        edges: Iterable[Edge] = (),
        nodes: Iterable[str] = (),
    ) -> "GraphDb":
        """Build a graph, adding edge endpoints to the node set."""
        edge_set = frozenset(tuple(e) for e in edges)
        node_set = set(nodes)
        for src, _, dst in edge_set:
            node_set.add(src)
            node_set.add(dst)
        return cls(frozenset(alphabet), frozenset(node_set), edge_set)

    @classmethod
    def empty(cls, alphabet: Iterable[str] = ()) -> "GraphDb":
        return cls(frozenset(alphabet))

    def with_alphabet(self, alphabet: Iterable[str]) -> "GraphDb":
        return GraphDb(frozenset(alphabet), self.nodes, self.edges)

    def with_nodes(self, nodes: Iterable[str]) -> "GraphDb":
        """Same edges, node set extended by ``nodes``."""
        return GraphDb(self.alphabet, self.nodes | frozenset(nodes), self.edges)

    def union(self, other: "GraphDb") -> "GraphDb":
        return GraphDb(
            self.alphabet | other.alphabet,
            self.nodes | other.nodes,
            self.edges | other.edges,
        )

    def rename(self, mapping: Mapping[str, str]) -> "GraphDb":
        """Apply a node renaming (nodes missing from ``mapping`` keep their id)."""
        def r(n: str) -> str:
            return mapping.get(n, n)

        return GraphDb(
            self.alphabet,
            frozenset(r(n) for n in self.nodes),
            frozenset((r(s), a, r(d)) for s, a, d in self.edges),
        )

    def relabel(self, labels: Mapping[str, str]) -> "GraphDb":
        """Rename edge labels; the alphabet is renamed alongside."""
        return GraphDb(
            frozenset(labels.get(a, a) for a in self.alphabet),
            self.nodes,
            frozenset((s, labels.get(a, a), d) for s, a, d in self.edges),
        )

    # ── Queries ───────────────────────────────────────────────────────────────

    @cached_property
    def _out(self) -> Dict[Tuple[str, str], FrozenSet[str]]:
        index: Dict[Tuple[str, str], Set[str]] = {}
        for src, label, dst in self.edges:
            index.setdefault((src, label), set()).add(dst)
        return {k: frozenset(v) for k, v in index.items()}

    @cached_property
    def _in(self) -> Dict[Tuple[str, str], FrozenSet[str]]:
        index: Dict[Tuple[str, str], Set[str]] = {}
        for src, label, dst in self.edges:
            index.setdefault((dst, label), set()).add(src)
        return {k: frozenset(v) for k, v in index.items()}

    def successors(self, node: str, label: str) -> FrozenSet[str]:
        return self._out.get((node, label), frozenset())

    def predecessors(self, node: str, label: str) -> FrozenSet[str]:
        return self._in.get((node, label), frozenset())

    def out_edges(self, node: str) -> List[Tuple[str, str]]:
        """Sorted ``(label, dst)`` pairs leaving ``node``."""
        return sorted(
            (label, dst)
            for label in self.alphabet
            for dst in self.successors(node, label)
        )

    def has_edge(self, src: str, label: str, dst: str) -> bool:
        return (src, label, dst) in self.edges

    def sorted_nodes(self) -> List[str]:
        return sorted(self.nodes)

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def edges_with_label(self, label: str) -> List[Tuple[str, str]]:
        return sorted((s, d) for s, a, d in self.edges if a == label)

    def is_edge_subset_of(self, other: "GraphDb") -> bool:
        """True if every edge of this graph is an edge of ``other``."""
        return self.edges <= other.edges

    def reachable_from(self, node: str) -> Set[str]:
        """All nodes reachable from ``node`` (BFS, any labels)."""
        if node not in self.nodes:
            raise UnknownNode(node)
        visited: Set[str] = {node}
        queue: deque = deque([node])
        while queue:
            current = queue.popleft()
            for _, dst in self.out_edges(current):
                if dst not in visited:
                    visited.add(dst)
                    queue.append(dst)
        return visited

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class Path:
    """A path x0 a0 x1 ... a(m-1) xm; ``labels`` has one entry per edge."""

    nodes: Tuple[str, ...]
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.labels) + 1:
            raise ValueError("a path has exactly one more node than labels")

    @property
    def label_word(self) -> Tuple[str, ...]:
        return self.labels

    @property
    def source(self) -> str:
        return self.nodes[0]

    @property
    def target(self) -> str:
        return self.nodes[-1]

    def triples(self) -> List[Edge]:
        return [
            (self.nodes[i], self.labels[i], self.nodes[i + 1])
            for i in range(len(self.labels))
        ]

    def lies_in(self, graph: GraphDb) -> bool:
        """True if every consecutive triple is an edge of ``graph``."""
        if any(n not in graph.nodes for n in self.nodes):
            return False
        return all(graph.has_edge(*t) for t in self.triples())


# ── Substructures and homomorphisms ──────────────────────────────────────────


def induced(db: GraphDb, nodes: Iterable[str]) -> GraphDb:
    """The substructure of ``db`` induced by ``nodes``."""
    keep = frozenset(nodes)
    missing = keep - db.nodes
    if missing:
        raise UnknownNode(f"not in graph: {sorted(missing)}")
    return GraphDb(
        db.alphabet,
        keep,
        frozenset(e for e in db.edges if e[0] in keep and e[2] in keep),
    )


def is_hom(mapping: Mapping[str, str], src: GraphDb, dst: GraphDb) -> bool:
    """True iff ``mapping`` sends every edge of ``src`` to an edge of ``dst``."""
    unassigned = [n for n in src.nodes if n not in mapping]
    if unassigned:
        raise PartialMap(f"unassigned source nodes: {sorted(unassigned)}")
    for n in src.nodes:
        if mapping[n] not in dst.nodes:
            raise UnknownNode(f"image {mapping[n]!r} is not a node of the target")
    return all(
        dst.has_edge(mapping[s], a, mapping[d]) for s, a, d in src.edges
    )


def compose(first: Mapping[str, str], second: Mapping[str, str]) -> NodeMap:
    """``second ∘ first``: apply ``first`` then ``second``."""
    return {n: second[m] for n, m in first.items()}


def find_hom(
    src: GraphDb,
    dst: GraphDb,
    pin: Optional[Mapping[str, str]] = None,
    allowed: Optional[Mapping[str, Iterable[str]]] = None,
) -> Optional[NodeMap]:
    """
    Search for a homomorphism ``src → dst`` extending ``pin``.

    Each node's image is restricted to ``allowed[node]`` when given (default:
    every node of ``dst``). The search is complete: backtracking with forward
    checking along edge constraints, choosing the unassigned node with the
    smallest remaining candidate set (ties by node id), candidates in sorted
    order. Returns ``None`` when no homomorphism exists.
    """
    pin = dict(pin or {})
    allowed = allowed or {}
    for n, image in pin.items():
        if n not in src.nodes:
            raise UnknownNode(f"pinned node {n!r} is not in the source")
        if image not in dst.nodes:
            raise UnknownNode(f"pinned image {image!r} is not in the target")
    for n, images in allowed.items():
        if n not in src.nodes:
            raise UnknownNode(f"constrained node {n!r} is not in the source")

    domains: Dict[str, FrozenSet[str]] = {}
    for n in src.nodes:
        candidates = frozenset(allowed[n]) & dst.nodes if n in allowed else dst.nodes
        if n in pin:
            candidates = candidates & {pin[n]}
        for s, a, d in src.edges:
            if s == n and d == n:
                candidates = frozenset(c for c in candidates if dst.has_edge(c, a, c))
        domains[n] = candidates
        if not candidates:
            logger.debug("find_hom: empty initial domain for %s", n)
            return None

    neighbours: Dict[str, List[Tuple[str, str, bool]]] = {n: [] for n in src.nodes}
    for s, a, d in src.edges:
        if s != d:
            neighbours[s].append((a, d, True))
            neighbours[d].append((a, s, False))

    result = _extend({}, domains, src, dst, neighbours)
    if result is not None:
        # The returned map must satisfy the defining check.
        if not is_hom(result, src, dst):
            raise AssertionError("find_hom produced a non-homomorphism")
        result = dict(sorted(result.items()))
    return result


def _extend(
    assignment: NodeMap,
    domains: Dict[str, FrozenSet[str]],
    src: GraphDb,
    dst: GraphDb,
    neighbours: Dict[str, List[Tuple[str, str, bool]]],
) -> Optional[NodeMap]:
    if len(assignment) == len(src.nodes):
        return dict(assignment)
    var = min(
        (n for n in domains if n not in assignment),
        key=lambda n: (len(domains[n]), n),
    )
    for value in sorted(domains[var]):
        narrowed = dict(domains)
        narrowed[var] = frozenset((value,))
        feasible = True
        for label, other, outgoing in neighbours[var]:
            if other in assignment:
                ok = (
                    dst.has_edge(value, label, assignment[other])
                    if outgoing
                    else dst.has_edge(assignment[other], label, value)
                )
                if not ok:
                    feasible = False
                    break
                continue
            reach = (
                dst.successors(value, label) if outgoing else dst.predecessors(value, label)
            )
            narrowed[other] = narrowed[other] & reach
            if not narrowed[other]:
                feasible = False
                break
        if not feasible:
            continue
        assignment[var] = value
        found = _extend(assignment, narrowed, src, dst, neighbours)
        if found is not None:
            return found
        del assignment[var]
    return None


# ── Text format ──────────────────────────────────────────────────────────────


def parse_graph(text: str, alphabet: Optional[Iterable[str]] = None) -> GraphDb:
    """
    Parse the graph file format.

    Lines are ``alphabet <label>...`` (optional header), ``node <id>`` and
    ``edge <src> <label> <dst>``; ``#`` starts a comment. When a header is
    present (or ``alphabet`` is passed), undeclared edge labels raise
    ``UnknownLabel``; otherwise the alphabet is the set of labels used.
    """
    declared: Optional[Set[str]] = set(alphabet) if alphabet is not None else None
    nodes: Set[str] = set()
    edges: Set[Edge] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        keyword, args = parts[0], parts[1:]
        if any(not is_token(a) for a in args):
            raise ParseError(f"invalid token in {line!r}", lineno)
        if keyword == "alphabet":
            declared = (declared or set()) | set(args)
        elif keyword == "node":
            if len(args) != 1:
                raise ParseError("expected 'node <id>'", lineno)
            nodes.add(args[0])
        elif keyword == "edge":
            if len(args) != 3:
                raise ParseError("expected 'edge <src> <label> <dst>'", lineno)
            src, label, dst = args
            if declared is not None and label not in declared:
                raise UnknownLabel(f"line {lineno}: label {label!r} not declared")
            edges.add((src, label, dst))
            nodes.update((src, dst))
        else:
            raise ParseError(f"unknown directive {keyword!r}", lineno)
    labels = declared if declared is not None else {e[1] for e in edges}
    return GraphDb(frozenset(labels), frozenset(nodes), frozenset(edges))


def serialize_graph(db: GraphDb) -> str:
    """Canonical text: alphabet header, then sorted nodes, then sorted edges."""
    lines = []
    if db.alphabet:
        lines.append("alphabet " + " ".join(sorted(db.alphabet)))
    lines.extend(f"node {n}" for n in db.sorted_nodes())
    lines.extend(f"edge {s} {a} {d}" for s, a, d in db.sorted_edges())
    return "\n".join(lines) + "\n"


def graph_to_dict(db: GraphDb) -> dict:
    """JSON-serialisable form of a graph."""
    return {
        "alphabet": sorted(db.alphabet),
        "nodes": db.sorted_nodes(),
        "edges": [list(e) for e in db.sorted_edges()],
    }
