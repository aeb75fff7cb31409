"""
The CSP template behind certain answers.

Nodes of ``T_{Q,V}`` are subsets of the states of the minimal DFA of ``Q``.
An edge ``Vi(d1, d2)`` exists when some word ``w ∈ L(Vi)`` lifts ``d1`` into
``d2``; sources are the subsets holding the initial state and targets are the
subsets avoiding every final state. A pair ``(u, v)`` of a view instance is
certain exactly when no homomorphism into the template sends ``u`` to a
source and ``v`` to a target.
"""

import logging
from collections import defaultdict, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .automata import Dfa, Word, format_word
from .config import Settings, resolve
from .errors import AlphabetMismatch, CertificateFailure, TemplateTooLarge, UnknownNode
from .graphs import Edge, GraphDb, NodeMap, find_hom, induced, serialize_graph
from .models import CertVerdict
from .rpq import Pair, QuerySpec, ViewInstance, ViewSpec, apply_view, rpq_eval

logger = logging.getLogger(__name__)


def subset_name(states: Iterable[int]) -> str:
    """Canonical node id of a state subset: ``d`` followed by ``_q`` per state."""
    return "d" + "".join(f"_{q}" for q in sorted(states))


def _bits(mask: int) -> FrozenSet[int]:
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


@dataclass
class Template:
    """The τ-structure ``T_{Q,V}`` with distinguished sources and targets."""

    graph: GraphDb
    sources: FrozenSet[str]
    targets: FrozenSet[str]
    witnesses: Dict[Edge, Word]
    q_dfa: Dfa
    subsets: Dict[str, FrozenSet[int]]

    def __post_init__(self) -> None:
        self.sources = frozenset(self.sources)
        self.targets = frozenset(self.targets)
        stray = (self.sources | self.targets) - self.graph.nodes
        if stray:
            raise UnknownNode(f"distinguished nodes outside the template: {sorted(stray)}")

    @property
    def size(self) -> int:
        return len(self.graph.nodes)

    def subset(self, node: str) -> FrozenSet[int]:
        return self.subsets[node]

    def allowed_for(self, u: str, v: str) -> Dict[str, FrozenSet[str]]:
        """Image constraints pinning ``u`` to sources and ``v`` to targets."""
        if u == v:
            return {u: self.sources & self.targets}
        return {u: self.sources, v: self.targets}

    def restrict(self, nodes: Iterable[str]) -> "Template":
        """Induced sub-template on ``nodes``."""
        keep = frozenset(nodes)
        graph = induced(self.graph, keep)
        return Template(
            graph,
            self.sources & keep,
            self.targets & keep,
            {e: w for e, w in self.witnesses.items() if e in graph.edges},
            self.q_dfa,
            {n: s for n, s in self.subsets.items() if n in keep},
        )


# ── Construction ─────────────────────────────────────────────────────────────


def _lifted_table(dfa: Dfa) -> List[Tuple[int, ...]]:
    """``lift[mask][li]``: bitmask of ``δ̂(mask, label li)``."""
    n = len(dfa.table)
    width = len(dfa.alphabet)
    lift: List[Tuple[int, ...]] = [(0,) * width]
    for mask in range(1, 1 << n):
        low = mask & -mask
        q = low.bit_length() - 1
        rest = lift[mask ^ low]
        lift.append(tuple(rest[li] | (1 << dfa.table[q][li]) for li in range(width)))
    return lift


def _reach_final(
    lift: List[Tuple[int, ...]], view: Dfa, start: int
) -> List[Tuple[int, Word]]:
    """
    Pairs (subset, view state) reachable from ``(start, initial)``, breadth
    first with sorted labels; returns ``(mask, word)`` for every pair whose
    view state is final, in shortest-then-lexicographic word order.
    """
    origin = (start, view.initial)
    parent: Dict[Tuple[int, int], Tuple[Optional[Tuple[int, int]], Optional[str]]] = {
        origin: (None, None)
    }
    queue = deque([origin])
    found: List[Tuple[int, Word]] = []
    while queue:
        node = queue.popleft()
        mask, state = node
        if state in view.finals:
            found.append((mask, _word_to(parent, node)))
        for li, label in enumerate(view.alphabet):
            nxt = (lift[mask][li], view.table[state][li])
            if nxt not in parent:
                parent[nxt] = (node, label)
                queue.append(nxt)
    return found


def _word_to(parent: dict, node) -> Word:
    letters: List[str] = []
    while True:
        prev, label = parent[node]
        if prev is None:
            return tuple(reversed(letters))
        letters.append(label)
        node = prev


def _edges_from(
    d1: int, full: int, lift: List[Tuple[int, ...]], views: List[Tuple[str, Dfa]]
) -> List[Tuple[int, str, int, Word]]:
    edges: List[Tuple[int, str, int, Word]] = []
    for name, view in views:
        assigned: Dict[int, Word] = {}
        for mask, word in _reach_final(lift, view, d1):
            free = full ^ mask
            extra = free
            while True:
                assigned.setdefault(mask | extra, word)
                if extra == 0:
                    break
                extra = (extra - 1) & free
            if len(assigned) == full + 1:
                break
        edges.extend((d1, name, d2, w) for d2, w in assigned.items())
    return edges


def build_template(q: QuerySpec, v: ViewSpec, settings: Optional[Settings] = None) -> Template:
    """
    Build ``T_{Q,V}`` over all subsets of the query DFA's states.

    Each edge keeps its shortest (then lexicographically least) witness word.
    """
    cfg = resolve(settings)
    if q.sigma != v.sigma:
        raise AlphabetMismatch(f"query over {sorted(q.sigma)}, views over {sorted(v.sigma)}")
    dfa = q.dfa
    n = len(dfa.table)
    if n > cfg.full_subset_limit:
        raise TemplateTooLarge(
            f"query DFA has {n} states; the full template needs 2^{n} nodes "
            f"(limit {cfg.full_subset_limit})"
        )
    full = (1 << n) - 1
    lift = _lifted_table(dfa)
    views = [(name, v.dfas[name]) for name in v.tau]

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(lambda d1: _edges_from(d1, full, lift, views), range(full + 1)))
    else:
        chunks = [_edges_from(d1, full, lift, views) for d1 in range(full + 1)]

    subsets = {subset_name(_bits(m)): _bits(m) for m in range(full + 1)}
    names = {m: subset_name(_bits(m)) for m in range(full + 1)}
    witnesses: Dict[Edge, Word] = {}
    for chunk in chunks:
        for d1, label, d2, word in chunk:
            witnesses[(names[d1], label, names[d2])] = word
    graph = GraphDb(frozenset(v.tau), frozenset(subsets), frozenset(witnesses))
    sources = frozenset(name for name, s in subsets.items() if dfa.initial in s)
    targets = frozenset(name for name, s in subsets.items() if not s & dfa.finals)
    logger.info(
        "template: %d nodes, %d edges, %d sources, %d targets",
        len(subsets), len(witnesses), len(sources), len(targets),
    )
    return Template(graph, sources, targets, witnesses, dfa, subsets)


def edge_witness(
    t: Template, view: Dfa, d1: str, d2: str, nonempty: bool = False
) -> Optional[Word]:
    """
    Shortest ``w ∈ L(view)`` with ``δ̂(d1, w) ⊆ d2`` (length ≥ 1 if ``nonempty``),
    or ``None``.
    """
    dfa = t.q_dfa
    target = t.subset(d2)
    origin = (t.subset(d1), view.initial, not nonempty)
    parent = {origin: (None, None)}
    queue = deque([origin])
    while queue:
        node = queue.popleft()
        states, vstate, started = node
        if started and vstate in view.finals and states <= target:
            return _word_to(parent, node)
        for label in view.alphabet:
            nxt = (
                frozenset(dfa.step(q, label) for q in states),
                view.step(vstate, label),
                True,
            )
            if nxt not in parent:
                parent[nxt] = (node, label)
                queue.append(nxt)
    return None


def validate_template(t: Template, v: ViewSpec) -> List[str]:
    """Violations of the template invariants; empty when the template is sound."""
    problems: List[str] = []
    dfa = t.q_dfa
    for node in t.sources:
        if dfa.initial not in t.subset(node):
            problems.append(f"source {node} misses the initial state")
    for node in t.targets:
        if t.subset(node) & dfa.finals:
            problems.append(f"target {node} meets a final state")
    for edge in t.graph.edges:
        d1, label, d2 = edge
        word = t.witnesses.get(edge)
        if word is None:
            problems.append(f"edge {edge} has no witness")
            continue
        if not v.dfas[label].accepts(word):
            problems.append(f"witness {format_word(word)} of {edge} not in L({label})")
        image = frozenset(dfa.run(word, q) for q in t.subset(d1))
        if not image <= t.subset(d2):
            problems.append(f"witness {format_word(word)} does not lift {d1} into {d2}")
    return problems


# ── Core ─────────────────────────────────────────────────────────────────────


def template_core(t: Template, settings: Optional[Settings] = None) -> Template:
    """
    Shrink ``t`` to a hom-equivalent retract with the same certain answers.

    Greedy single-node folds first (``a ↦ b`` with everything else fixed),
    then, for small enough templates, a full endomorphism search that avoids
    one node at a time.
    """
    cfg = resolve(settings)
    out: Dict[str, Dict[str, Set[str]]] = {n: defaultdict(set) for n in t.graph.nodes}
    inc: Dict[str, Dict[str, Set[str]]] = {n: defaultdict(set) for n in t.graph.nodes}
    for s, label, d in t.graph.edges:
        out[s][label].add(d)
        inc[d][label].add(s)
    alive = set(t.graph.nodes)

    def member_ok(a: str, b: str) -> bool:
        return (a not in t.sources or b in t.sources) and (a not in t.targets or b in t.targets)

    def covered(mine: Dict[str, Set[str]], theirs: Dict[str, Set[str]], a: str, b: str) -> bool:
        for label, nodes in mine.items():
            have = theirs.get(label, set())
            for x in nodes:
                if (b if x == a else x) not in have:
                    return False
        return True

    def fold(a: str) -> None:
        for label, nodes in out[a].items():
            for x in nodes:
                if x != a:
                    inc[x][label].discard(a)
        for label, nodes in inc[a].items():
            for x in nodes:
                if x != a:
                    out[x][label].discard(a)
        del out[a], inc[a]
        alive.discard(a)

    changed = True
    while changed:
        changed = False
        for a in sorted(alive):
            if a not in alive:
                continue
            for b in sorted(alive):
                if b == a or not member_ok(a, b):
                    continue
                if covered(out[a], out[b], a, b) and covered(inc[a], inc[b], a, b):
                    fold(a)
                    changed = True
                    break
    logger.debug("template core: folding left %d of %d nodes", len(alive), t.size)

    if len(alive) <= cfg.core_search_limit:
        while True:
            graph = induced(t.graph, alive)
            shrunk = False
            for a in sorted(alive):
                rest = alive - {a}
                allowed = {}
                for n in alive:
                    candidates = set(rest)
                    if n in t.sources:
                        candidates &= t.sources
                    if n in t.targets:
                        candidates &= t.targets
                    allowed[n] = candidates
                h = find_hom(graph, graph, allowed=allowed)
                if h is not None:
                    alive = set(h.values())
                    shrunk = True
                    break
            if not shrunk:
                break

    core = t.restrict(alive)
    logger.info("template core: %d -> %d nodes", t.size, core.size)
    return core


# ── Certain answers ──────────────────────────────────────────────────────────


def cert(s: ViewInstance, u: str, v: str, t: Template) -> CertVerdict:
    """Is ``(u, v)`` a certain answer on ``s``? Not certain iff a pinned hom into ``t`` exists."""
    for node in (u, v):
        if node not in s.nodes:
            raise UnknownNode(f"{node!r} is not a node of the instance")
    h = find_hom(s.graph, t.graph, allowed=t.allowed_for(u, v))
    if h is None:
        return CertVerdict(certain=True)
    return CertVerdict(certain=False, witness=h)


def cert_all(s: ViewInstance, t: Template) -> List[Pair]:
    """All certain pairs of ``s``, sorted."""
    nodes = s.graph.sorted_nodes()
    return [(u, v) for u in nodes for v in nodes if cert(s, u, v, t).certain]


def materialize_counterexample(
    s: ViewInstance,
    h: NodeMap,
    t: Template,
    q: QuerySpec,
    v: ViewSpec,
    pair: Optional[Pair] = None,
) -> GraphDb:
    """
    Build a database ``D'`` with ``s ⊆ V(D')`` that refutes certainty.

    Every view edge ``Vi(x, y)`` of ``s`` becomes a fresh path labeled with
    the template witness of ``(h(x), Vi, h(y))``. Both guarantees are checked
    before returning: ``s ⊆ V(D')`` edgewise and no pair ``(x, y)`` with
    ``h(x)`` a source and ``h(y)`` a target (``pair`` in particular) is in
    ``Q(D')``.
    """
    prefix = "m"
    while any(n.startswith(prefix) for n in s.nodes):
        prefix += "m"
    nodes = set(s.nodes)
    edges: Set[Edge] = set()
    for idx, (x, label, y) in enumerate(s.graph.sorted_edges()):
        key = (h[x], label, h[y])
        word = t.witnesses.get(key)
        if word is None:
            raise CertificateFailure(f"template has no edge {key}")
        if not word and x != y:
            word = edge_witness(t, v.dfas[label], h[x], h[y], nonempty=True)
            if word is None:
                raise CertificateFailure(
                    f"edge {label}({x},{y}) only has the empty witness in the template"
                )
        if not word:
            continue
        path = [x] + [f"{prefix}{idx}_{j}" for j in range(1, len(word))] + [y]
        nodes.update(path)
        edges.update((path[j], word[j], path[j + 1]) for j in range(len(word)))
    db = GraphDb.build(v.sigma, edges, nodes)

    image = apply_view(db, v, keep_all_nodes=True).graph
    missing = [e for e in s.graph.edges if e not in image.edges]
    if missing:
        raise CertificateFailure(f"view edges not reproduced by the counterexample: {sorted(missing)}")
    answers = set(rpq_eval(db, q))
    pinned = [(x, y) for x in s.nodes for y in s.nodes
              if h[x] in t.sources and h[y] in t.targets]
    if pair is not None:
        pinned.append(pair)
    bad = sorted(p for p in pinned if p in answers)
    if bad:
        raise CertificateFailure(f"counterexample still answers {bad}")
    logger.debug("counterexample: %d nodes, %d edges", len(db.nodes), len(db.edges))
    return db


# ── Text format ──────────────────────────────────────────────────────────────


def dump_template(t: Template) -> str:
    """Graph file text plus ``source``/``target``/``witness`` lines."""
    lines = [serialize_graph(t.graph).rstrip("\n")]
    lines.extend(f"source {n}" for n in sorted(t.sources))
    lines.extend(f"target {n}" for n in sorted(t.targets))
    lines.extend(
        f"witness {d1} {label} {d2} = {format_word(w)}"
        for (d1, label, d2), w in sorted(t.witnesses.items())
    )
    return "\n".join(lines) + "\n"
