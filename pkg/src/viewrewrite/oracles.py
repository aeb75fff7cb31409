"""
Brute-force reference oracles.

Each oracle deliberately avoids the machinery it checks: paths are
enumerated one by one and matched against the regex AST, homomorphisms are
scanned exhaustively, colourings are found by plain backtracking.
"""

import logging
from dataclasses import dataclass
from itertools import permutations, product
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .automata import Word, ast_matches, enumerate_words
from .config import Settings, resolve
from .errors import BudgetExceeded
from .graphs import Edge, GraphDb, NodeMap, is_hom
from .rpq import Pair, QuerySpec, ViewInstance, ViewSpec, apply_view, rpq_eval

logger = logging.getLogger(__name__)


def canonical_nodes(n: int) -> List[str]:
    return [f"v{i}" for i in range(1, n + 1)]


def possible_edges(alphabet: Iterable[str], nodes: Sequence[str]) -> List[Edge]:
    labels = sorted(alphabet)
    return [(s, a, d) for s in nodes for a in labels for d in nodes]


def enumerate_dbs(
    alphabet: Iterable[str], n: int, settings: Optional[Settings] = None
) -> Iterator[GraphDb]:
    """
    Every labeled digraph on ``v1..vn``, ordered by the bitmask of its edge
    set over the sorted candidate edges.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    cfg = resolve(settings)
    labels = sorted(alphabet)
    nodes = canonical_nodes(n)
    candidates = possible_edges(labels, nodes)
    total = 2 ** len(candidates)
    if total > cfg.max_enumerated_dbs:
        raise BudgetExceeded(
            f"{total} graphs on {n} nodes over {len(labels)} labels exceed "
            f"max_enumerated_dbs={cfg.max_enumerated_dbs}"
        )
    for mask in range(total):
        edges = [e for i, e in enumerate(candidates) if mask >> i & 1]
        yield GraphDb.build(labels, edges, nodes)


def canonical_form(db: GraphDb) -> Tuple[Edge, ...]:
    """Least sorted edge list over every renaming of the nodes onto ``v1..vn``."""
    nodes = db.sorted_nodes()
    best: Optional[Tuple[Edge, ...]] = None
    for names in permutations(canonical_nodes(len(nodes))):
        rename = dict(zip(nodes, names))
        key = tuple(sorted((rename[x], a, rename[y]) for x, a, y in db.edges))
        if best is None or key < best:
            best = key
    return best or ()


def isomorphism_classes(dbs: Iterable[GraphDb]) -> List[GraphDb]:
    """First database of each isomorphism class, in input order."""
    seen: Dict[Tuple[int, Tuple[Edge, ...]], GraphDb] = {}
    for db in dbs:
        seen.setdefault((len(db.nodes), canonical_form(db)), db)
    return list(seen.values())


def random_db(
    alphabet: Iterable[str], n: int, edge_prob: float, seed: int
) -> GraphDb:
    """Seeded random graph on ``v1..vn``; each candidate edge kept with ``edge_prob``."""
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    labels = sorted(alphabet)
    nodes = canonical_nodes(n)
    candidates = possible_edges(labels, nodes)
    keep = rng.random(len(candidates)) < edge_prob
    return GraphDb.build(labels, [e for e, k in zip(candidates, keep) if k], nodes)


def random_instance(tau: Sequence[str], n: int, edge_prob: float, seed: int) -> ViewInstance:
    """Seeded random τ-structure; all nodes retained."""
    return ViewInstance(random_db(tau, n, edge_prob, seed))


def random_word(alphabet: Iterable[str], max_len: int, rng: np.random.Generator) -> Word:
    labels = sorted(alphabet)
    length = int(rng.integers(0, max_len + 1))
    return tuple(labels[int(i)] for i in rng.integers(0, len(labels), size=length))


def random_connected_graph(n: int, edge_prob: float, seed: int) -> nx.Graph:
    """Seeded connected simple graph on nodes ``0..n-1`` (resampled until connected)."""
    rng = np.random.default_rng(seed)
    while True:
        g = nx.gnp_random_graph(n, edge_prob, seed=int(rng.integers(0, 2 ** 31)))
        if n <= 1 or nx.is_connected(g):
            return g


# ── Path semantics ───────────────────────────────────────────────────────────


def brute_rpq_eval(db: GraphDb, q: QuerySpec, settings: Optional[Settings] = None) -> List[Pair]:
    """
    ``Q(D)`` by enumerating every path shorter than ``|nodes| · |DFA states|``
    and matching its label against the regex.
    """
    cfg = resolve(settings)
    bound = max(1, len(db.nodes) * len(q.dfa.table))
    pairs = set()
    explored = 0
    for start in db.sorted_nodes():
        stack: List[Tuple[str, Word]] = [(start, ())]
        while stack:
            node, word = stack.pop()
            explored += 1
            if explored > cfg.max_brute_paths:
                raise BudgetExceeded(f"more than {cfg.max_brute_paths} paths enumerated")
            if ast_matches(q.regex, word):
                pairs.add((start, node))
            if len(word) + 1 < bound:
                for label, dst in db.out_edges(node):
                    stack.append((dst, word + (label,)))
    return sorted(pairs)


# ── Homomorphisms ────────────────────────────────────────────────────────────


def brute_hom(
    src: GraphDb,
    dst: GraphDb,
    pin: Optional[Mapping[str, str]] = None,
    allowed: Optional[Mapping[str, Iterable[str]]] = None,
    settings: Optional[Settings] = None,
) -> Optional[NodeMap]:
    """First homomorphism in canonical order (sorted nodes, sorted images), or ``None``."""
    cfg = resolve(settings)
    pin = pin or {}
    allowed = {n: set(c) for n, c in (allowed or {}).items()}
    order = src.sorted_nodes()
    images = dst.sorted_nodes()
    total = len(images) ** len(order)
    if total > cfg.max_hom_maps:
        raise BudgetExceeded(f"{total} candidate maps exceed max_hom_maps={cfg.max_hom_maps}")
    for choice in product(images, repeat=len(order)):
        mapping = dict(zip(order, choice))
        if any(mapping[n] != m for n, m in pin.items()):
            continue
        if any(mapping[n] not in c for n, c in allowed.items()):
            continue
        if is_hom(mapping, src, dst):
            return mapping
    return None


# ── Certain answers ──────────────────────────────────────────────────────────


@dataclass
class BruteCertResult:
    """Outcome of the bounded counterexample search for one pair."""

    counterexample: Optional[GraphDb]
    checked: int
    family: str

    @property
    def found(self) -> bool:
        return self.counterexample is not None


def _refutes(db: GraphDb, s: ViewInstance, v: ViewSpec, q: QuerySpec, pair: Pair) -> bool:
    image = apply_view(db, v, keep_all_nodes=True).graph
    if not s.graph.edges <= image.edges:
        return False
    return pair not in set(rpq_eval(db, q))


def brute_cert_bounded(
    s: ViewInstance,
    q: QuerySpec,
    v: ViewSpec,
    n: int,
    pair: Pair,
    settings: Optional[Settings] = None,
) -> BruteCertResult:
    """
    Search databases on at most ``n`` nodes with ``s ⊆ V(D')`` and
    ``pair ∉ Q(D')``.

    Candidates lay each view edge of ``s`` out as a fresh path labeled by a
    word of that view (length up to ``preimage_word_cap``); for ``n ≤ 4``
    every graph on the instance nodes plus fresh ones is tried as well. A
    found database refutes certainty; an empty search is evidence only.
    """
    cfg = resolve(settings)
    if n < len(s.nodes):
        raise ValueError(f"n={n} is smaller than the instance ({len(s.nodes)} nodes)")
    edges = s.graph.sorted_edges()
    base = s.graph.sorted_nodes()
    options: List[List[Word]] = []
    for x, label, y in edges:
        words = enumerate_words(v.dfas[label], cfg.preimage_word_cap)
        if x != y:
            words = [w for w in words if w]
        options.append(words)

    checked = 0
    for choice in product(*options):
        fresh = sum(max(len(w) - 1, 0) for w in choice)
        if len(base) + fresh > n:
            continue
        checked += 1
        if checked > cfg.max_enumerated_dbs:
            raise BudgetExceeded(f"more than {cfg.max_enumerated_dbs} path layouts")
        db = _lay_out(base, edges, choice, v.sigma)
        if _refutes(db, s, v, q, pair):
            logger.debug("brute cert: path layout refutes %s after %d candidates", pair, checked)
            return BruteCertResult(db, checked, "paths")

    if n <= 4:
        extra = [f"z{i}" for i in range(1, n - len(base) + 1) if f"z{i}" not in s.nodes]
        nodes = base + extra
        candidates = possible_edges(v.sigma, nodes)
        if 2 ** len(candidates) > cfg.max_enumerated_dbs:
            logger.warning("brute cert: %d arbitrary graphs exceed budget, skipped", 2 ** len(candidates))
        else:
            for mask in range(2 ** len(candidates)):
                checked += 1
                db = GraphDb.build(
                    v.sigma, [e for i, e in enumerate(candidates) if mask >> i & 1], nodes
                )
                if _refutes(db, s, v, q, pair):
                    return BruteCertResult(db, checked, "paths+graphs")
            return BruteCertResult(None, checked, "paths+graphs")
    return BruteCertResult(None, checked, "paths")


def _lay_out(
    nodes: Sequence[str], edges: Sequence[Edge], words: Sequence[Word], sigma: Iterable[str]
) -> GraphDb:
    out: List[Edge] = []
    all_nodes = list(nodes)
    for idx, ((x, _, y), word) in enumerate(zip(edges, words)):
        if not word:
            continue
        path = [x] + [f"q{idx}_{j}" for j in range(1, len(word))] + [y]
        all_nodes.extend(path[1:-1])
        out.extend((path[j], word[j], path[j + 1]) for j in range(len(word)))
    return GraphDb.build(sigma, out, all_nodes)


# ── 3-colourability ──────────────────────────────────────────────────────────


def three_coloring(graph: nx.Graph) -> Optional[Dict[object, int]]:
    """A proper 3-colouring by backtracking in sorted node order, or ``None``."""
    order = sorted(graph.nodes)
    colors: Dict[object, int] = {}

    def place(i: int) -> bool:
        if i == len(order):
            return True
        node = order[i]
        for c in range(3):
            if all(colors.get(m) != c for m in graph.neighbors(node)):
                colors[node] = c
                if place(i + 1):
                    return True
                del colors[node]
        return False

    return dict(colors) if place(0) else None
