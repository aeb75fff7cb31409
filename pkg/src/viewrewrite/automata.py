"""
Regular expressions over label alphabets and the automata built from them.

Symbols are whitespace-separated tokens, so multi-character labels such as
``rg`` are single symbols. ``eps`` denotes the empty word and ``empty`` the
empty language. Regexes compile through a Thompson NFA and the subset
construction into a complete DFA, which is minimized (Hopcroft) and
renumbered canonically: states are numbered in BFS order from the initial
state following label-sorted edges, so equal languages give identical
automata.

Words are tuples of labels.
"""

import logging
import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .errors import EmptyViewSet, ParseError, UnknownState, UnknownSymbol

logger = logging.getLogger(__name__)

Word = Tuple[str, ...]

EPSILON_TOKEN = "eps"
EMPTY_TOKEN = "empty"
_TOKENS = re.compile(r"\s*([()|*+?]|[A-Za-z0-9_]+)")


# ── Regex AST ────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Epsilon:
    pass


@dataclass(frozen=True)
class EmptySet:
    pass


@dataclass(frozen=True)
class Symbol:
    label: str


@dataclass(frozen=True)
class Concat:
    parts: Tuple["RegexAst", ...]


@dataclass(frozen=True)
class Alt:
    parts: Tuple["RegexAst", ...]


@dataclass(frozen=True)
class Star:
    child: "RegexAst"


@dataclass(frozen=True)
class Plus:
    child: "RegexAst"


@dataclass(frozen=True)
class Opt:
    child: "RegexAst"


RegexAst = Union[Epsilon, EmptySet, Symbol, Concat, Alt, Star, Plus, Opt]


def symbols_of(ast: RegexAst) -> Set[str]:
    """All labels occurring in ``ast``."""
    if isinstance(ast, Symbol):
        return {ast.label}
    if isinstance(ast, (Concat, Alt)):
        out: Set[str] = set()
        for p in ast.parts:
            out |= symbols_of(p)
        return out
    if isinstance(ast, (Star, Plus, Opt)):
        return symbols_of(ast.child)
    return set()


def word_regex(word: Sequence[str]) -> RegexAst:
    """The regex matching exactly ``word``."""
    if not word:
        return Epsilon()
    if len(word) == 1:
        return Symbol(word[0])
    return Concat(tuple(Symbol(a) for a in word))


def words_regex(words: Iterable[Sequence[str]]) -> RegexAst:
    """The regex matching exactly the given finite set of words."""
    parts = tuple(word_regex(w) for w in sorted(set(tuple(w) for w in words)))
    if not parts:
        return EmptySet()
    return parts[0] if len(parts) == 1 else Alt(parts)


def regex_to_text(ast: RegexAst) -> str:
    """Render an AST back into the regex grammar."""
    if isinstance(ast, Epsilon):
        return EPSILON_TOKEN
    if isinstance(ast, EmptySet):
        return EMPTY_TOKEN
    if isinstance(ast, Symbol):
        return ast.label
    if isinstance(ast, Concat):
        return " ".join(
            f"({regex_to_text(p)})" if isinstance(p, Alt) else regex_to_text(p)
            for p in ast.parts
        )
    if isinstance(ast, Alt):
        return " | ".join(regex_to_text(p) for p in ast.parts)
    op = {Star: "*", Plus: "+", Opt: "?"}[type(ast)]
    inner = regex_to_text(ast.child)
    if isinstance(ast.child, (Symbol, Epsilon, EmptySet)):
        return inner + op
    return f"({inner}){op}"


class _RegexParser:
    """Recursive-descent parser: alt := cat ('|' cat)*; cat := post+;
    post := atom ('*'|'+'|'?')*; atom := SYMBOL | 'eps' | 'empty' | '(' alt ')'."""

    def __init__(self, text: str, alphabet: FrozenSet[str]):
        self.alphabet = alphabet
        self.tokens: List[str] = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKENS.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r} at offset {pos}")
            self.tokens.append(m.group(1))
            pos = m.end()
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> RegexAst:
        if not self.tokens:
            raise ParseError("empty regular expression")
        ast = self.alt()
        if self.peek() is not None:
            raise ParseError(f"unexpected token {self.peek()!r}")
        return ast

    def alt(self) -> RegexAst:
        parts = [self.cat()]
        while self.peek() == "|":
            self.take()
            parts.append(self.cat())
        return parts[0] if len(parts) == 1 else Alt(tuple(parts))

    def cat(self) -> RegexAst:
        parts = []
        while self.peek() is not None and self.peek() not in ("|", ")"):
            parts.append(self.post())
        if not parts:
            raise ParseError("expected a symbol or '('")
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))

    def post(self) -> RegexAst:
        node = self.atom()
        while self.peek() in ("*", "+", "?"):
            op = self.take()
            node = {"*": Star, "+": Plus, "?": Opt}[op](node)
        return node

    def atom(self) -> RegexAst:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression")
        if tok == "(":
            self.take()
            inner = self.alt()
            if self.peek() != ")":
                raise ParseError("missing ')'")
            self.take()
            return inner
        if tok in ("*", "+", "?", "|", ")"):
            raise ParseError(f"unexpected operator {tok!r}")
        self.take()
        if tok == EPSILON_TOKEN:
            return Epsilon()
        if tok == EMPTY_TOKEN:
            return EmptySet()
        if tok not in self.alphabet:
            raise UnknownSymbol(f"symbol {tok!r} is not in the alphabet {sorted(self.alphabet)}")
        return Symbol(tok)


def parse_regex(text: str, alphabet: Iterable[str]) -> RegexAst:
    """Parse ``text`` into an AST over ``alphabet``."""
    return _RegexParser(text, frozenset(alphabet)).parse()


def ast_matches(ast: RegexAst, word: Sequence[str]) -> bool:
    """Direct structural matching, independent of any automaton."""
    return len(word) in _ends(ast, tuple(word), 0)


def _ends(ast: RegexAst, word: Word, start: int) -> Set[int]:
    if isinstance(ast, Epsilon):
        return {start}
    if isinstance(ast, EmptySet):
        return set()
    if isinstance(ast, Symbol):
        return {start + 1} if start < len(word) and word[start] == ast.label else set()
    if isinstance(ast, Concat):
        current = {start}
        for part in ast.parts:
            current = {e for s in current for e in _ends(part, word, s)}
        return current
    if isinstance(ast, Alt):
        return {e for p in ast.parts for e in _ends(p, word, start)}
    if isinstance(ast, Opt):
        return {start} | _ends(ast.child, word, start)
    # Star / Plus: closure of repeated child matches
    if isinstance(ast, Plus):
        reached = set(_ends(ast.child, word, start))
    else:
        reached = {start}
    frontier = set(reached)
    while frontier:
        nxt = {e for s in frontier for e in _ends(ast.child, word, s)} - reached
        reached |= nxt
        frontier = nxt
    return reached


# ── NFA ──────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Nfa:
    """Thompson NFA; ``None`` labels are epsilon moves."""

    states: FrozenSet[int]
    alphabet: FrozenSet[str]
    transitions: FrozenSet[Tuple[int, Optional[str], int]]
    initial: int
    finals: FrozenSet[int]

    @cached_property
    def _moves(self) -> Dict[Tuple[int, Optional[str]], FrozenSet[int]]:
        out: Dict[Tuple[int, Optional[str]], Set[int]] = {}
        for s, a, t in self.transitions:
            out.setdefault((s, a), set()).add(t)
        return {k: frozenset(v) for k, v in out.items()}

    def closure(self, states: Iterable[int]) -> FrozenSet[int]:
        seen = set(states)
        stack = list(seen)
        while stack:
            s = stack.pop()
            for t in self._moves.get((s, None), ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    def step(self, states: Iterable[int], label: str) -> FrozenSet[int]:
        moved: Set[int] = set()
        for s in states:
            moved |= self._moves.get((s, label), frozenset())
        return self.closure(moved)

    def accepts(self, word: Sequence[str]) -> bool:
        current = self.closure([self.initial])
        for a in word:
            if a not in self.alphabet:
                raise UnknownSymbol(a)
            current = self.step(current, a)
        return bool(current & self.finals)


def to_nfa(ast: RegexAst, alphabet: Iterable[str]) -> Nfa:
    """Thompson construction."""
    alphabet = frozenset(alphabet)
    unknown = symbols_of(ast) - alphabet
    if unknown:
        raise UnknownSymbol(f"symbols outside the alphabet: {sorted(unknown)}")
    transitions: Set[Tuple[int, Optional[str], int]] = set()
    counter = [0]

    def fresh() -> int:
        counter[0] += 1
        return counter[0] - 1

    def build(node: RegexAst) -> Tuple[int, int]:
        s, f = fresh(), fresh()
        if isinstance(node, Epsilon):
            transitions.add((s, None, f))
        elif isinstance(node, Symbol):
            transitions.add((s, node.label, f))
        elif isinstance(node, Concat):
            prev = s
            for part in node.parts:
                ps, pf = build(part)
                transitions.add((prev, None, ps))
                prev = pf
            transitions.add((prev, None, f))
        elif isinstance(node, Alt):
            for part in node.parts:
                ps, pf = build(part)
                transitions.add((s, None, ps))
                transitions.add((pf, None, f))
        elif isinstance(node, (Star, Plus, Opt)):
            cs, cf = build(node.child)
            transitions.add((s, None, cs))
            transitions.add((cf, None, f))
            if not isinstance(node, Plus):
                transitions.add((s, None, f))
            if not isinstance(node, Opt):
                transitions.add((cf, None, cs))
        # EmptySet: no path from s to f
        return s, f

    start, final = build(ast)
    return Nfa(
        frozenset(range(counter[0])), alphabet, frozenset(transitions), start, frozenset({final})
    )


# ── DFA ──────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Dfa:
    """
    Complete DFA with states ``0..n-1``.

    ``table[q][i]`` is the successor of ``q`` on ``alphabet[i]``; the alphabet
    is sorted. An explicit dead state is kept whenever one is needed.
    """

    alphabet: Tuple[str, ...]
    table: Tuple[Tuple[int, ...], ...]
    initial: int
    finals: FrozenSet[int]

    @property
    def states(self) -> range:
        return range(len(self.table))

    @cached_property
    def _index(self) -> Dict[str, int]:
        return {a: i for i, a in enumerate(self.alphabet)}

    @cached_property
    def matrix(self) -> np.ndarray:
        """Transition table as an ``(n_states, n_labels)`` integer array."""
        return np.array(self.table, dtype=np.int64).reshape(len(self.table), len(self.alphabet))

    def label_index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownSymbol(f"symbol {label!r} is not in the alphabet") from None

    def step(self, state: int, label: str) -> int:
        return self.table[state][self.label_index(label)]

    def run(self, word: Sequence[str], start: Optional[int] = None) -> int:
        q = self.initial if start is None else start
        for a in word:
            q = self.step(q, a)
        return q

    def accepts(self, word: Sequence[str]) -> bool:
        return self.run(word) in self.finals

    @cached_property
    def live_states(self) -> FrozenSet[int]:
        """States from which some final state is reachable."""
        reverse: Dict[int, Set[int]] = {q: set() for q in self.states}
        for q in self.states:
            for t in self.table[q]:
                reverse[t].add(q)
        live = set(self.finals)
        stack = list(live)
        while stack:
            q = stack.pop()
            for p in reverse[q]:
                if p not in live:
                    live.add(p)
                    stack.append(p)
        return frozenset(live)

    def is_empty(self) -> bool:
        return self.initial not in self.live_states

    def complement(self) -> "Dfa":
        return Dfa(self.alphabet, self.table, self.initial, frozenset(self.states) - self.finals)


def determinize(nfa: Nfa) -> Dfa:
    """Subset construction producing a complete DFA (empty subset = dead state)."""
    alphabet = tuple(sorted(nfa.alphabet))
    start = nfa.closure([nfa.initial])
    index: Dict[FrozenSet[int], int] = {start: 0}
    order = [start]
    table: List[List[int]] = []
    i = 0
    while i < len(order):
        current = order[i]
        row = []
        for a in alphabet:
            nxt = nfa.step(current, a)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        table.append(row)
        i += 1
    finals = frozenset(index[s] for s in order if s & nfa.finals)
    return Dfa(alphabet, tuple(tuple(r) for r in table), 0, finals)


def hopcroft_partition(dfa: Dfa) -> List[FrozenSet[int]]:
    """Coarsest partition of the states into language-equivalence blocks."""
    states = frozenset(dfa.states)
    finals = dfa.finals & states
    partition = [b for b in (finals, states - finals) if b]
    work = [min(partition, key=len)] if len(partition) == 2 else list(partition)
    inverse: List[Dict[int, Set[int]]] = [dict() for _ in dfa.alphabet]
    for q in dfa.states:
        for i, t in enumerate(dfa.table[q]):
            inverse[i].setdefault(t, set()).add(q)
    while work:
        splitter = work.pop()
        for i in range(len(dfa.alphabet)):
            x: Set[int] = set()
            for t in splitter:
                x |= inverse[i].get(t, set())
            if not x:
                continue
            refined = []
            for block in partition:
                inside = block & x
                outside = block - x
                if inside and outside:
                    refined.extend([inside, outside])
                    if block in work:
                        work.remove(block)
                        work.extend([inside, outside])
                    else:
                        work.append(min(inside, outside, key=len))
                else:
                    refined.append(block)
            partition = refined
    return partition


def minimize(dfa: Dfa) -> Dfa:
    """Merge equivalent states (Hopcroft) of the reachable part."""
    dfa = canonicalize(dfa)
    blocks = hopcroft_partition(dfa)
    block_of = {q: bi for bi, block in enumerate(blocks) for q in block}
    table = []
    for block in blocks:
        rep = min(block)
        table.append(tuple(block_of[t] for t in dfa.table[rep]))
    finals = frozenset(block_of[q] for q in dfa.finals)
    return canonicalize(Dfa(dfa.alphabet, tuple(table), block_of[dfa.initial], finals))


def canonicalize(dfa: Dfa) -> Dfa:
    """Drop unreachable states and renumber in BFS order along sorted labels."""
    order = [dfa.initial]
    index = {dfa.initial: 0}
    i = 0
    while i < len(order):
        for t in dfa.table[order[i]]:
            if t not in index:
                index[t] = len(order)
                order.append(t)
        i += 1
    table = tuple(tuple(index[t] for t in dfa.table[q]) for q in order)
    finals = frozenset(index[q] for q in dfa.finals if q in index)
    return Dfa(dfa.alphabet, table, 0, finals)


def _alt(x: RegexAst, y: RegexAst) -> RegexAst:
    if isinstance(x, EmptySet):
        return y
    if isinstance(y, EmptySet):
        return x
    parts: List[RegexAst] = []
    for p in (x, y):
        for part in p.parts if isinstance(p, Alt) else (p,):
            if part not in parts:
                parts.append(part)
    return parts[0] if len(parts) == 1 else Alt(tuple(parts))


def _cat(x: RegexAst, y: RegexAst) -> RegexAst:
    if isinstance(x, EmptySet) or isinstance(y, EmptySet):
        return EmptySet()
    if isinstance(x, Epsilon):
        return y
    if isinstance(y, Epsilon):
        return x
    parts = (x.parts if isinstance(x, Concat) else (x,)) + (y.parts if isinstance(y, Concat) else (y,))
    return Concat(parts)


def _star(x: RegexAst) -> RegexAst:
    if isinstance(x, (EmptySet, Epsilon)):
        return Epsilon()
    if isinstance(x, Star):
        return x
    return Star(x)


def dfa_to_regex(dfa: Dfa) -> RegexAst:
    """A regex for ``L(dfa)`` by state elimination over its useful states."""
    useful = [q for q in dfa.states if q in dfa.live_states]
    if dfa.initial not in dfa.live_states:
        return EmptySet()
    start, accept = -1, -2
    arcs: Dict[Tuple[int, int], RegexAst] = {(start, dfa.initial): Epsilon()}
    for q in useful:
        for a, t in zip(dfa.alphabet, dfa.table[q]):
            if t in dfa.live_states:
                arcs[(q, t)] = _alt(arcs.get((q, t), EmptySet()), Symbol(a))
        if q in dfa.finals:
            arcs[(q, accept)] = Epsilon()
    for k in reversed(useful):
        loop = _star(arcs.pop((k, k), EmptySet()))
        incoming = [(p, r) for (p, t), r in arcs.items() if t == k]
        outgoing = [(t, r) for (p, t), r in arcs.items() if p == k]
        for p, _ in incoming:
            del arcs[(p, k)]
        for t, _ in outgoing:
            del arcs[(k, t)]
        for p, into in incoming:
            for t, out in outgoing:
                through = _cat(_cat(into, loop), out)
                arcs[(p, t)] = _alt(arcs.get((p, t), EmptySet()), through)
    return arcs.get((start, accept), EmptySet())


def to_min_dfa(ast: RegexAst, alphabet: Iterable[str]) -> Dfa:
    """Minimal complete DFA of ``L(ast)`` over ``alphabet``, canonically numbered."""
    return minimize(determinize(to_nfa(ast, alphabet)))


def dfa_intersection(d1: Dfa, d2: Dfa) -> Dfa:
    """Product DFA accepting ``L(d1) ∩ L(d2)``."""
    _check_shared(d1, d2)
    index = {(d1.initial, d2.initial): 0}
    order = [(d1.initial, d2.initial)]
    table = []
    i = 0
    while i < len(order):
        p, q = order[i]
        row = []
        for a in d1.alphabet:
            nxt = (d1.step(p, a), d2.step(q, a))
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        table.append(tuple(row))
        i += 1
    finals = frozenset(index[s] for s in order if s[0] in d1.finals and s[1] in d2.finals)
    return Dfa(d1.alphabet, tuple(table), 0, finals)


def _check_shared(d1: Dfa, d2: Dfa) -> None:
    if d1.alphabet != d2.alphabet:
        raise UnknownSymbol(
            f"automata over different alphabets: {list(d1.alphabet)} vs {list(d2.alphabet)}"
        )


def nonempty_intersection(d1: Dfa, d2: Dfa) -> Optional[Word]:
    """
    A shortest word in ``L(d1) ∩ L(d2)`` or ``None``.

    Breadth-first over the product with labels in sorted order, so the first
    accepting pair found carries the lexicographically least shortest word.
    """
    _check_shared(d1, d2)
    start = (d1.initial, d2.initial)
    parent: Dict[Tuple[int, int], Tuple[Optional[Tuple[int, int]], Optional[str]]] = {
        start: (None, None)
    }
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        if pair[0] in d1.finals and pair[1] in d2.finals:
            return _trace(parent, pair)
        for a in d1.alphabet:
            nxt = (d1.step(pair[0], a), d2.step(pair[1], a))
            if nxt not in parent:
                parent[nxt] = (pair, a)
                queue.append(nxt)
    return None


def _trace(parent: dict, node) -> Word:
    word: List[str] = []
    while True:
        prev, label = parent[node]
        if prev is None:
            return tuple(reversed(word))
        word.append(label)
        node = prev


def universal_dfa(alphabet: Iterable[str]) -> Dfa:
    alphabet = tuple(sorted(alphabet))
    return Dfa(alphabet, ((0,) * len(alphabet),), 0, frozenset({0}))


def nonempty_words_dfa(alphabet: Iterable[str]) -> Dfa:
    """DFA of all words of length at least one."""
    alphabet = tuple(sorted(alphabet))
    return Dfa(alphabet, ((1,) * len(alphabet), (1,) * len(alphabet)), 0, frozenset({1}))


def enumerate_words(ast_or_dfa: Union[RegexAst, Dfa], max_len: int, alphabet: Iterable[str] = ()) -> List[Word]:
    """
    All words of the language up to length ``max_len``, length-then-lex order.

    Accepts an AST (with ``alphabet``) or an already-built DFA.
    """
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    dfa = ast_or_dfa if isinstance(ast_or_dfa, Dfa) else to_min_dfa(ast_or_dfa, alphabet)
    live = dfa.live_states
    out: List[Word] = []
    level: List[Tuple[Word, int]] = [((), dfa.initial)] if dfa.initial in live else []
    for length in range(max_len + 1):
        out.extend(w for w, q in level if q in dfa.finals)
        if length == max_len:
            break
        level = [
            (w + (a,), t)
            for w, q in level
            for a in dfa.alphabet
            for t in (dfa.step(q, a),)
            if t in live
        ]
    return out


def all_words(alphabet: Iterable[str], max_len: int) -> List[Word]:
    """Every word over ``alphabet`` up to ``max_len``, length-then-lex order."""
    alphabet = sorted(alphabet)
    out: List[Word] = [()]
    level: List[Word] = [()]
    for _ in range(max_len):
        level = [w + (a,) for w in level for a in alphabet]
        out.extend(level)
    return out


def format_word(word: Sequence[str]) -> str:
    """Concatenate single-character labels; space-separate otherwise."""
    if not word:
        return EPSILON_TOKEN
    if all(len(a) == 1 for a in word):
        return "".join(word)
    return " ".join(word)


def dump_automaton(dfa: Union[Dfa, "ProductDfa"]) -> str:
    """Debug dump: ``initial``/``final`` headers then ``state label state`` lines."""
    lines = [f"initial {dfa.initial}"]
    finals = dfa.finals if isinstance(dfa, Dfa) else frozenset().union(*dfa.per_view_finals)
    lines.extend(f"final {q}" for q in sorted(finals))
    for q in dfa.states:
        for i, a in enumerate(dfa.alphabet):
            lines.append(f"{q} {a} {dfa.table[q][i]}")
    return "\n".join(lines) + "\n"


# ── View product and transition functions ────────────────────────────────────


@dataclass(frozen=True)
class ProductDfa:
    """
    Reachable product of the minimal DFAs of all view expressions.

    States are ``0..n-1`` in BFS order; ``tuples[q]`` gives the component
    states. ``per_view_finals[i]`` holds the states whose i-th component is
    final in the i-th view's DFA.
    """

    component_dfas: Tuple[Dfa, ...]
    tuples: Tuple[Tuple[int, ...], ...]
    table: Tuple[Tuple[int, ...], ...]
    initial: int
    per_view_finals: Tuple[FrozenSet[int], ...]

    @property
    def alphabet(self) -> Tuple[str, ...]:
        return self.component_dfas[0].alphabet

    @property
    def states(self) -> range:
        return range(len(self.table))

    @property
    def n_of_v(self) -> int:
        return len(self.table)

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.table, dtype=np.int64).reshape(len(self.table), len(self.alphabet))

    def label_index(self, label: str) -> int:
        return self.component_dfas[0].label_index(label)

    def step(self, state: int, label: str) -> int:
        return self.table[state][self.label_index(label)]

    def run(self, word: Sequence[str], start: Optional[int] = None) -> int:
        q = self.initial if start is None else start
        for a in word:
            q = self.step(q, a)
        return q

    def accepting_views(self, state: int) -> List[int]:
        """Indices of the views whose language the state accepts."""
        return [i for i, finals in enumerate(self.per_view_finals) if state in finals]


def build_view_product(
    views: Sequence[Union[RegexAst, Dfa]], alphabet: Iterable[str] = ()
) -> ProductDfa:
    """Reachable product of the minimal DFAs of ``views`` (ASTs or DFAs)."""
    if not views:
        raise EmptyViewSet("at least one view is required")
    dfas = tuple(
        v if isinstance(v, Dfa) else to_min_dfa(v, alphabet) for v in views
    )
    labels = dfas[0].alphabet
    for d in dfas[1:]:
        _check_shared(dfas[0], d)
    start = tuple(d.initial for d in dfas)
    index = {start: 0}
    order = [start]
    table = []
    i = 0
    while i < len(order):
        current = order[i]
        row = []
        for li in range(len(labels)):
            nxt = tuple(d.table[q][li] for d, q in zip(dfas, current))
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        table.append(tuple(row))
        i += 1
    per_view = tuple(
        frozenset(index[t] for t in order if t[vi] in d.finals)
        for vi, d in enumerate(dfas)
    )
    logger.debug("view product: %d components, N(V) = %d", len(dfas), len(order))
    return ProductDfa(dfas, tuple(order), tuple(table), 0, per_view)


@dataclass(frozen=True)
class TransitionFn:
    """The total function ``q ↦ δ(q, w)``, stored as ``mapping[q]``."""

    mapping: Tuple[int, ...]

    def __call__(self, state: int) -> int:
        return self.mapping[state]

    def then(self, other: "TransitionFn") -> "TransitionFn":
        """``other ∘ self``: the function of ``u v`` when self = δ(·,u), other = δ(·,v)."""
        return TransitionFn(tuple(other.mapping[q] for q in self.mapping))

    @classmethod
    def identity(cls, n: int) -> "TransitionFn":
        return cls(tuple(range(n)))


def word_transition(aut: Union[Dfa, ProductDfa], word: Sequence[str]) -> TransitionFn:
    """The transition function of ``word`` on ``aut``."""
    matrix = aut.matrix
    current = np.arange(len(aut.table), dtype=np.int64)
    for a in word:
        current = matrix[current, aut.label_index(a)]
    return TransitionFn(tuple(int(q) for q in current))


def lifted_set_transition(dfa: Dfa, states: Iterable[int], word: Sequence[str]) -> FrozenSet[int]:
    """``{ δ(q, w) : q ∈ states }``."""
    states = frozenset(states)
    bad = [q for q in states if q not in dfa.states]
    if bad:
        raise UnknownState(f"states not in automaton: {sorted(bad)}")
    return frozenset(dfa.run(word, q) for q in states)
