"""
Rewriting through preimages.

Under monotone determinacy the answer on a view instance ``S`` is ``Q(D)``
for any database ``D`` with ``V(D) = S``. Such a ``D`` can be assembled from
V-minimal paths: each one joins two instance nodes through fresh interior
nodes and contributes no view tuple outside ``S``. :func:`find_preimage`
searches those assemblies in canonical order under a node bound.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx

from .automata import Word, all_words, words_regex
from .config import Settings, resolve
from .errors import BudgetExceeded, NotAViewImage, NotConnected, ParseError
from .graphs import Edge, GraphDb, is_token
from .models import CeilingReport, PreimageResult, PreimageStatus
from .rpq import Pair, QuerySpec, ViewInstance, ViewSpec, apply_view, rpq_eval

logger = logging.getLogger(__name__)

COLOURS = ("r", "g", "b")


@dataclass(frozen=True)
class Segment:
    """A candidate path ``source –word→ target`` with fresh interior nodes."""

    index: int
    source: str
    target: str
    word: Word

    @property
    def fresh(self) -> int:
        return len(self.word) - 1

    def interior(self, prefix: str) -> List[str]:
        return [f"{prefix}{self.index}_{j}" for j in range(1, len(self.word))]

    def edges(self, prefix: str) -> List[Edge]:
        path = [self.source] + self.interior(prefix) + [self.target]
        return [(path[j], self.word[j], path[j + 1]) for j in range(len(self.word))]


def _fresh_prefix(taken: Iterable[str]) -> str:
    prefix = "f"
    taken = list(taken)
    while any(n.startswith(prefix) for n in taken):
        prefix += "f"
    return prefix


class _PreimageSearch:
    """Include-in-order backtracking over candidate segments."""

    def __init__(self, s: ViewInstance, v: ViewSpec, max_nodes: int, settings: Settings):
        self.s = s
        self.v = v
        self.target = s.graph.edges
        self.fresh_budget = max_nodes - len(s.nodes)
        self.settings = settings
        self.prefix = _fresh_prefix(s.nodes)
        self.steps = 0
        self.base = GraphDb.build(v.sigma, (), s.nodes)

    def image(self, db: GraphDb):
        return apply_view(db, self.v).graph.edges

    def fits(self, db: GraphDb) -> bool:
        return self.image(db) <= self.target

    def with_segment(self, db: GraphDb, seg: Segment) -> GraphDb:
        return GraphDb(
            db.alphabet,
            db.nodes | frozenset(seg.interior(self.prefix)),
            db.edges | frozenset(seg.edges(self.prefix)),
        )

    def candidates(self) -> List[Segment]:
        longest = min(self.settings.preimage_word_cap, self.fresh_budget + 1)
        words = [w for w in all_words(self.v.sigma, longest) if w]
        nodes = self.s.graph.sorted_nodes()
        out: List[Segment] = []
        for word in words:
            for x in nodes:
                for y in nodes:
                    seg = Segment(len(out), x, y, word)
                    if self.fits(self.with_segment(self.base, seg)):
                        out.append(seg)
        logger.debug("preimage: %d candidate segments up to length %d", len(out), longest)
        return out

    def run(self, db: GraphDb, fresh: int, remaining: List[Segment]) -> Optional[GraphDb]:
        self.steps += 1
        if self.steps > self.settings.max_preimage_steps:
            raise BudgetExceeded(
                f"preimage search exceeded max_preimage_steps={self.settings.max_preimage_steps}"
            )
        if self.image(db) == self.target:
            return db
        ceiling = db
        for seg in remaining:
            ceiling = self.with_segment(ceiling, seg)
        if not self.target <= self.image(ceiling):
            return None
        for i, seg in enumerate(remaining):
            if fresh + seg.fresh > self.fresh_budget:
                continue
            grown = self.with_segment(db, seg)
            if not self.fits(grown):
                continue
            rest = [r for r in remaining[i + 1:] if self.fits(self.with_segment(grown, r))]
            found = self.run(grown, fresh + seg.fresh, rest)
            if found is not None:
                return found
        return None


def find_preimage(
    s: ViewInstance,
    v: ViewSpec,
    max_nodes: int,
    settings: Optional[Settings] = None,
) -> PreimageResult:
    """
    Search for ``D`` with at most ``max_nodes`` nodes and ``V(D) = S``.

    ``D`` always contains the nodes of ``S``; every further node is the
    interior of a laid-out segment. The first database in canonical
    segment order wins.
    """
    cfg = resolve(settings)
    if s.tau != frozenset(v.tau):
        raise ParseError(f"instance labels {sorted(s.tau)} differ from view names {list(v.tau)}")
    if max_nodes < len(s.nodes):
        return PreimageResult(PreimageStatus.NOT_FOUND_WITHIN_BOUND, bound=max_nodes)
    search = _PreimageSearch(s, v, max_nodes, cfg)
    if not search.fits(search.base):
        return PreimageResult(PreimageStatus.NOT_FOUND_WITHIN_BOUND, bound=max_nodes, steps=0)
    found = search.run(search.base, 0, search.candidates())
    logger.info("preimage: %s after %d steps", "found" if found else "none", search.steps)
    if found is None:
        return PreimageResult(
            PreimageStatus.NOT_FOUND_WITHIN_BOUND, bound=max_nodes, steps=search.steps
        )
    return PreimageResult(PreimageStatus.FOUND, found, max_nodes, search.steps)


def default_node_bound(s: ViewInstance, settings: Optional[Settings] = None) -> int:
    cfg = resolve(settings)
    return len(s.nodes) + len(s.graph.edges) * (cfg.preimage_word_cap - 1)


def rewrite_via_preimage(
    s: ViewInstance,
    q: QuerySpec,
    v: ViewSpec,
    max_nodes: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> List[Pair]:
    """``Q(D)`` restricted to the nodes of ``S`` for the first preimage ``D``."""
    bound = max_nodes if max_nodes is not None else default_node_bound(s, settings)
    result = find_preimage(s, v, bound, settings)
    if not result.found:
        raise NotAViewImage(f"no preimage with at most {bound} nodes")
    return [(x, y) for x, y in rpq_eval(result.database, q) if x in s.nodes and y in s.nodes]


def preimage_size_ceiling(s: ViewInstance, v: ViewSpec) -> CeilingReport:
    """
    Size ceilings for a preimage of ``S``, as logarithms.

    With ``N`` states in the view product there are at most ``N^N``
    transition functions, so a V-minimal path needs at most ``|S|²·N^N``
    nodes. The Ramsey-style ceiling over ``c = N^N · 2^(N^N)`` colours is
    ``⌊e·c!⌋ + 1``; it is reported as a doubled logarithm.
    """
    n = v.product.n_of_v
    size = max(len(s.nodes), 1)
    log_fns = n * math.log10(n)
    log_c = log_fns + (n ** n) * math.log10(2)
    if log_c < 15:
        c = round(10 ** log_c)
        log_ramsey = math.log10(math.floor(math.e * math.factorial(c)) + 1) if c < 20 else (
            math.log10(math.e) + math.lgamma(c + 1) / math.log(10)
        )
        log_log_ramsey = math.log10(log_ramsey)
    else:
        # log10(c!) ~ c * (log10 c - log10 e)
        log_log_ramsey = log_c + math.log10(log_c - math.log10(math.e))
    return CeilingReport(
        n_of_v=n,
        instance_size=len(s.nodes),
        log10_transition_functions=log_fns,
        log10_path_bound=2 * math.log10(size) + log_fns,
        log10_log10_ramsey_bound=log_log_ramsey,
    )


# ── 3-colourability ──────────────────────────────────────────────────────────


def colour_alphabet() -> List[str]:
    return [a + b for a in COLOURS for b in COLOURS if a != b]


def parse_undirected(text: str) -> nx.Graph:
    """
    Read ``node n`` / ``edge u v`` lines into an undirected graph.

    Blank lines and ``#`` comments are skipped.
    """
    g = nx.Graph()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "node" and len(parts) == 2 and is_token(parts[1]):
            g.add_node(parts[1])
        elif parts[0] == "edge" and len(parts) == 3 and all(is_token(p) for p in parts[1:]):
            if parts[1] == parts[2]:
                raise ParseError("self-loops are not allowed", lineno)
            g.add_edge(parts[1], parts[2])
        else:
            raise ParseError(f"expected 'node n' or 'edge u v', got {raw!r}", lineno)
    return g


def gen_3col(
    graph: Union[nx.Graph, Sequence[Tuple[object, object]]]
) -> Tuple[ViewSpec, ViewInstance]:
    """
    Encode 3-colourability of a connected undirected graph as a preimage problem.

    Letters ``αβ`` colour the two ends of a directed edge. ``V1`` exposes
    every single letter and holds each graph edge in both directions; ``V2``
    matches two letters whose shared node gets different colours and stays
    empty. A preimage exists iff the graph is 3-colourable.
    """
    g = graph if isinstance(graph, nx.Graph) else nx.Graph(list(graph))
    if g.number_of_nodes() == 0 or not nx.is_connected(g):
        raise NotConnected("3-colourability reduction needs a non-empty connected graph")
    names = {n: str(n) for n in g.nodes}
    bad = [n for n in names.values() if not is_token(n)]
    if bad:
        raise ParseError(f"node names must be tokens: {bad}")

    sigma = colour_alphabet()
    clashes = [(x, y) for x in sigma for y in sigma if x[1] != y[0]]
    v = ViewSpec(
        frozenset(sigma),
        ("V1", "V2"),
        {"V1": words_regex([(a,) for a in sigma]), "V2": words_regex(clashes)},
    )
    edges = []
    for x, y in g.edges:
        if x == y:
            raise ParseError(f"self-loop on {x!r}")
        edges.append((names[x], "V1", names[y]))
        edges.append((names[y], "V1", names[x]))
    s = ViewInstance(GraphDb.build(v.tau, edges, names.values()))
    logger.debug("gen_3col: %d nodes, %d symmetric view edges", len(s.nodes), len(edges))
    return v, s


def colouring_from_preimage(db: GraphDb) -> dict:
    """Read node colours off a preimage of a :func:`gen_3col` instance."""
    colours = {}
    for x, label, y in db.sorted_edges():
        colours.setdefault(x, label[0])
        colours.setdefault(y, label[1])
    return colours
