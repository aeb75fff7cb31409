"""
RPQ and view semantics.

Evaluates regular path queries by reachability in the product of a database
with an automaton, materializes view instances ``V(D)``, builds simple-path
databases ``P_w`` and computes the ``∼_k`` equivalence on path positions.
Also home of the spec file format shared by the CLI.
"""

import logging
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .automata import (
    Dfa,
    ProductDfa,
    RegexAst,
    Word,
    build_view_product,
    dfa_to_regex,
    parse_regex,
    symbols_of,
    to_min_dfa,
)
from .errors import AlphabetMismatch, IndexOutOfRange, ParseError, UndeclaredSymbol, UnknownSymbol
from .graphs import GraphDb, is_token

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]


@dataclass(frozen=True)
class QuerySpec:
    """An RPQ ``Q`` over ``sigma``."""

    sigma: FrozenSet[str]
    regex: RegexAst

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma", frozenset(self.sigma))
        unknown = symbols_of(self.regex) - self.sigma
        if unknown:
            raise UnknownSymbol(f"query uses symbols outside sigma: {sorted(unknown)}")

    @cached_property
    def dfa(self) -> Dfa:
        return to_min_dfa(self.regex, self.sigma)

    @classmethod
    def parse(cls, text: str, sigma: Iterable[str]) -> "QuerySpec":
        sigma = frozenset(sigma)
        return cls(sigma, parse_regex(text, sigma))


@dataclass(frozen=True)
class ViewSpec:
    """
    A view ``V = {V1, ..., Vn}`` from ``sigma`` to ``tau``.

    ``tau`` is the ordered list of view names; ``definitions`` maps each name
    to its regex over ``sigma``.
    """

    sigma: FrozenSet[str]
    tau: Tuple[str, ...]
    definitions: Dict[str, RegexAst] = field(hash=False)
    compiled: Optional[Dict[str, Dfa]] = field(default=None, hash=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma", frozenset(self.sigma))
        object.__setattr__(self, "tau", tuple(self.tau))
        if len(set(self.tau)) != len(self.tau):
            raise ParseError(f"duplicate view names in {list(self.tau)}")
        if set(self.tau) != set(self.definitions):
            raise ParseError("view names and definitions disagree")
        for name, ast in self.definitions.items():
            unknown = symbols_of(ast) - self.sigma
            if unknown:
                raise UnknownSymbol(f"view {name} uses symbols outside sigma: {sorted(unknown)}")

    @classmethod
    def parse(cls, definitions: Dict[str, str], sigma: Iterable[str]) -> "ViewSpec":
        """Build from ``{name: regex text}`` keeping the dict order as ``tau``."""
        sigma = frozenset(sigma)
        return cls(
            sigma,
            tuple(definitions),
            {name: parse_regex(text, sigma) for name, text in definitions.items()},
        )

    @classmethod
    def from_dfas(cls, sigma: Iterable[str], dfas: Dict[str, Dfa]) -> "ViewSpec":
        """Views given directly by automata; definitions are derived by state elimination."""
        sigma = frozenset(sigma)
        for name, d in dfas.items():
            if frozenset(d.alphabet) != sigma:
                raise AlphabetMismatch(f"automaton for {name} is over {list(d.alphabet)}")
        return cls(sigma, tuple(dfas), {n: dfa_to_regex(d) for n, d in dfas.items()}, dict(dfas))

    @cached_property
    def dfas(self) -> Dict[str, Dfa]:
        if self.compiled is not None:
            return {name: self.compiled[name] for name in self.tau}
        return {name: to_min_dfa(self.definitions[name], self.sigma) for name in self.tau}

    @cached_property
    def product(self) -> ProductDfa:
        return build_view_product([self.dfas[name] for name in self.tau])

    def renamed(self, mapping: Dict[str, str]) -> "ViewSpec":
        return ViewSpec(
            self.sigma,
            tuple(mapping.get(n, n) for n in self.tau),
            {mapping.get(n, n): ast for n, ast in self.definitions.items()},
            None if self.compiled is None else {mapping.get(n, n): d for n, d in self.compiled.items()},
        )


@dataclass(frozen=True)
class ViewInstance:
    """A τ-structure; ``V(D)`` when produced by :func:`apply_view`."""

    graph: GraphDb

    @property
    def nodes(self) -> FrozenSet[str]:
        return self.graph.nodes

    @property
    def tau(self) -> FrozenSet[str]:
        return self.graph.alphabet

    def is_subinstance_of(self, other: "ViewInstance") -> bool:
        return self.graph.is_edge_subset_of(other.graph)


@dataclass(frozen=True)
class SimPartition:
    """The classes of ``∼_k`` over positions ``0..k``, each sorted, ordered by first member."""

    k: int
    classes: Tuple[Tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.classes)

    def same_class(self, i: int, j: int) -> bool:
        return any(i in c and j in c for c in self.classes)


# ── Evaluation ───────────────────────────────────────────────────────────────


def _check_alphabet(db: GraphDb, sigma: FrozenSet[str]) -> None:
    used = {label for _, label, _ in db.edges}
    if not used <= sigma:
        raise AlphabetMismatch(f"database labels outside sigma: {sorted(used - sigma)}")


def _product_reach(db: GraphDb, step, initial: int, start: str) -> Set[Tuple[str, int]]:
    """All (node, state) pairs reachable from ``(start, initial)``."""
    seen = {(start, initial)}
    queue = deque(seen)
    while queue:
        node, state = queue.popleft()
        for label, dst in db.out_edges(node):
            nxt = (dst, step(state, label))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def rpq_eval(db: GraphDb, q: QuerySpec) -> List[Pair]:
    """``Q(D)``: pairs joined by a path whose label is in ``L(Q)``, sorted."""
    _check_alphabet(db, q.sigma)
    dfa = q.dfa
    pairs = set()
    for x in db.nodes:
        for y, state in _product_reach(db, dfa.step, dfa.initial, x):
            if state in dfa.finals:
                pairs.add((x, y))
    return sorted(pairs)


def apply_view(db: GraphDb, v: ViewSpec, keep_all_nodes: bool = False) -> ViewInstance:
    """
    Materialize ``V(D)``.

    Edge ``Vi(x, y)`` is present iff ``(x, y) ∈ Vi(D)``. The node set is the
    set of nodes occurring in some view tuple, or all database nodes when
    ``keep_all_nodes`` is set.
    """
    _check_alphabet(db, v.sigma)
    product = v.product
    edges: Set[Tuple[str, str, str]] = set()
    for x in db.nodes:
        for y, state in _product_reach(db, product.step, product.initial, x):
            for vi in product.accepting_views(state):
                edges.add((x, v.tau[vi], y))
    nodes = set(db.nodes) if keep_all_nodes else set()
    return ViewInstance(GraphDb.build(v.tau, edges, nodes))


def path_of_word(word: Sequence[str], alphabet: Optional[Iterable[str]] = None) -> GraphDb:
    """The simple path ``p0 –w[0]→ p1 … → p|w|``."""
    word = tuple(word)
    nodes = [f"p{i}" for i in range(len(word) + 1)]
    edges = [(nodes[i], a, nodes[i + 1]) for i, a in enumerate(word)]
    labels = set(alphabet) if alphabet is not None else set(word)
    return GraphDb.build(labels, edges, nodes)


def path_endpoints(word: Sequence[str]) -> Pair:
    return ("p0", f"p{len(word)}")


def sim_classes(word: Sequence[str], v: ViewSpec, k: int) -> SimPartition:
    """
    Partition of positions ``0..k`` of ``P_w`` by ``∼_k``.

    ``i ∼_k j`` iff for every view and every ``r ≥ k``, ``(p_i, p_r)`` and
    ``(p_j, p_r)`` are both or neither in that view's relation.
    """
    word = tuple(word)
    if not 0 <= k <= len(word):
        raise IndexOutOfRange(f"k={k} outside 0..{len(word)}")
    image = apply_view(path_of_word(word, v.sigma), v, keep_all_nodes=True).graph
    columns = [(name, r) for name in v.tau for r in range(k, len(word) + 1)]
    rows = np.array(
        [[image.has_edge(f"p{i}", name, f"p{r}") for name, r in columns] for i in range(k + 1)],
        dtype=bool,
    ).reshape(k + 1, len(columns))
    _, labels = np.unique(rows, axis=0, return_inverse=True)
    groups: Dict[int, List[int]] = {}
    for i, label in enumerate(np.asarray(labels).reshape(-1)):
        groups.setdefault(int(label), []).append(i)
    classes = sorted(tuple(g) for g in groups.values())
    return SimPartition(k, tuple(classes))


# ── Spec file format ─────────────────────────────────────────────────────────


@dataclass
class SpecFile:
    """Parsed contents of a spec file."""

    sigma: FrozenSet[str]
    views: Optional[ViewSpec] = None
    query: Optional[QuerySpec] = None
    cfg_views: Dict[str, object] = field(default_factory=dict)


_VIEW_LINE = re.compile(r"^view\s+([A-Za-z0-9_]+)\s*=\s*(.+)$")
_QUERY_LINE = re.compile(r"^query\s+([A-Za-z0-9_]+)\s*=\s*(.+)$")
_CFG_OPEN = re.compile(r"^cfgview\s+([A-Za-z0-9_]+)\s*\{(.*)$")


def parse_spec(text: str) -> SpecFile:
    """
    Parse a spec file: ``alphabet ...``, ``view <Name> = <regex>``,
    ``query Q = <regex>``, ``cfgview <Name> { ... }`` and ``#`` comments.
    """
    from .cfpq import parse_cfg

    sigma: Optional[Set[str]] = None
    view_texts: Dict[str, Tuple[int, str]] = {}
    query_text: Optional[Tuple[int, str]] = None
    cfg_blocks: Dict[str, Tuple[int, str]] = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        lineno = i + 1
        line = lines[i].split("#", 1)[0].strip()
        i += 1
        if not line:
            continue
        head, *symbols = line.split()
        if head == "alphabet":
            if not all(is_token(s) for s in symbols):
                raise ParseError("invalid alphabet symbol", lineno)
            sigma = (sigma or set()) | set(symbols)
            continue
        m = _VIEW_LINE.match(line)
        if m:
            if m.group(1) in view_texts:
                raise ParseError(f"view {m.group(1)} defined twice", lineno)
            view_texts[m.group(1)] = (lineno, m.group(2))
            continue
        m = _QUERY_LINE.match(line)
        if m:
            query_text = (lineno, m.group(2))
            continue
        m = _CFG_OPEN.match(line)
        if m:
            body = m.group(2)
            while "}" not in body:
                if i >= len(lines):
                    raise ParseError("unterminated cfgview block", lineno)
                body += "\n" + lines[i].split("#", 1)[0]
                i += 1
            body, _, rest = body.partition("}")
            if rest.strip():
                raise ParseError("text after closing '}'", lineno)
            cfg_blocks[m.group(1)] = (lineno, body)
            continue
        raise ParseError(f"unrecognized line {line!r}", lineno)

    if sigma is None:
        raise ParseError("missing 'alphabet' line")
    sigma_f = frozenset(sigma)

    def regex(entry: Tuple[int, str]) -> RegexAst:
        lineno, body = entry
        try:
            return parse_regex(body, sigma_f)
        except ParseError as exc:
            raise ParseError(str(exc), lineno) from exc
        except UnknownSymbol as exc:
            raise UnknownSymbol(f"line {lineno}: {exc}") from exc

    spec = SpecFile(sigma_f)
    if view_texts:
        spec.views = ViewSpec(
            sigma_f, tuple(view_texts), {name: regex(e) for name, e in view_texts.items()}
        )
    if query_text is not None:
        spec.query = QuerySpec(sigma_f, regex(query_text))
    for name, (lineno, body) in cfg_blocks.items():
        try:
            spec.cfg_views[name] = parse_cfg(body, sigma_f)
        except ParseError as exc:
            raise ParseError(str(exc), lineno) from exc
        except UndeclaredSymbol as exc:
            raise UndeclaredSymbol(f"line {lineno}: {exc}") from exc
    return spec


def format_pairs(pairs: Iterable[Pair]) -> str:
    """One ``x y`` line per pair, sorted."""
    return "".join(f"{x} {y}\n" for x, y in sorted(pairs))


def word_from_text(text: str) -> Word:
    """Parse a word given as space-separated labels, or as single characters."""
    text = text.strip()
    if text in ("", "eps"):
        return ()
    if " " in text:
        return tuple(text.split())
    return tuple(text)
