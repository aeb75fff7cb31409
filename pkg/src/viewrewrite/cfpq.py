"""
Context-free path views.

A view given by a grammar is replaced by a regular one relative to the
query: ``L_V`` collects every word whose transition function on the query
DFA is shared by some word of the grammar. Certain answers do not change,
so the regular machinery applies unchanged.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from .automata import EPSILON_TOKEN, Dfa, TransitionFn, Word, minimize, word_transition
from .config import Settings, resolve
from .errors import AlphabetMismatch, BudgetExceeded, CertificateFailure, ParseError, UndeclaredSymbol
from .graphs import is_token
from .rpq import Pair, QuerySpec, ViewInstance, ViewSpec
from .template import build_template, cert_all

logger = logging.getLogger(__name__)

Production = Tuple[str, Tuple[str, ...]]


@dataclass(frozen=True)
class BinaryGrammar:
    """Rules of the forms ``A → ε``, ``A → a``, ``A → B`` and ``A → B C``."""

    start: str
    nullable: FrozenSet[str]
    terms: Tuple[Tuple[str, str], ...]
    units: Tuple[Tuple[str, str], ...]
    pairs: Tuple[Tuple[str, str, str], ...]


@dataclass(frozen=True)
class Cfg:
    """A context-free grammar over a label alphabet."""

    terminals: FrozenSet[str]
    nonterminals: FrozenSet[str]
    productions: Tuple[Production, ...]
    start: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals))
        if self.start not in self.nonterminals:
            raise UndeclaredSymbol(f"start symbol {self.start!r} is not a nonterminal")
        clash = self.terminals & self.nonterminals
        if clash:
            raise ParseError(f"symbols used both as terminal and nonterminal: {sorted(clash)}")
        for head, body in self.productions:
            for sym in (head,) + body:
                if sym not in self.nonterminals and sym not in self.terminals:
                    raise UndeclaredSymbol(f"symbol {sym!r} is not declared")

    @cached_property
    def binary(self) -> BinaryGrammar:
        """Binary normal form; helper nonterminals are not valid tokens, so they never clash."""
        nullable: Set[str] = set()
        terms: List[Tuple[str, str]] = []
        units: List[Tuple[str, str]] = []
        pairs: List[Tuple[str, str, str]] = []

        def lift(sym: str) -> str:
            if sym in self.terminals:
                wrapper = f"<{sym}>"
                terms.append((wrapper, sym))
                return wrapper
            return sym

        for idx, (head, body) in enumerate(self.productions):
            if not body:
                nullable.add(head)
            elif len(body) == 1 and body[0] in self.terminals:
                terms.append((head, body[0]))
            elif len(body) == 1:
                units.append((head, body[0]))
            else:
                syms = [lift(s) for s in body]
                left = head
                for j, sym in enumerate(syms[:-2]):
                    rest = f"<{head}#{idx}.{j}>"
                    pairs.append((left, sym, rest))
                    left = rest
                pairs.append((left, syms[-2], syms[-1]))
        return BinaryGrammar(
            self.start, frozenset(nullable), tuple(sorted(set(terms))), tuple(units), tuple(pairs)
        )


def parse_cfg(body: str, sigma: Iterable[str]) -> Cfg:
    """
    Parse a grammar block: ``NT -> sym ... | ... ;`` statements, ``eps`` for
    the empty body. The first head is the start symbol; an empty block is the
    empty language with start ``S``.
    """
    sigma = frozenset(sigma)
    statements = [s.strip() for s in body.split(";")]
    rules: List[Tuple[str, List[List[str]]]] = []
    for stmt in statements:
        if not stmt:
            continue
        head, arrow, rhs = stmt.partition("->")
        head = head.strip()
        if not arrow or not is_token(head):
            raise ParseError(f"expected 'NT -> ...', got {stmt!r}")
        alternatives = [alt.split() for alt in rhs.split("|")]
        for alt in alternatives:
            bad = [s for s in alt if not is_token(s)]
            if bad:
                raise ParseError(f"invalid grammar symbols {bad}")
        rules.append((head, alternatives))

    if not rules:
        return Cfg(sigma, frozenset({"S"}), (), "S")
    nonterminals = frozenset(head for head, _ in rules)
    productions: List[Production] = []
    for head, alternatives in rules:
        for alt in alternatives:
            syms = tuple(s for s in alt if s != EPSILON_TOKEN)
            for s in syms:
                if s not in nonterminals and s not in sigma:
                    raise UndeclaredSymbol(f"symbol {s!r} is neither a nonterminal nor in the alphabet")
            productions.append((head, syms))
    return Cfg(sigma, nonterminals, tuple(productions), rules[0][0])


# ── Membership ───────────────────────────────────────────────────────────────


def cfg_accepts(g: Cfg, word: Iterable[str]) -> bool:
    """CYK over the binary form, with ε and unit rules closed per span."""
    word = tuple(word)
    b = g.binary
    n = len(word)
    chart: Dict[Tuple[int, int], Set[str]] = {}
    for length in range(n + 1):
        for i in range(n - length + 1):
            j = i + length
            cell: Set[str] = set(b.nullable) if length == 0 else set()
            if length == 1:
                cell |= {head for head, a in b.terms if a == word[i]}
            chart[(i, j)] = cell
            changed = True
            while changed:
                changed = False
                for head, body in b.units:
                    if body in cell and head not in cell:
                        cell.add(head)
                        changed = True
                for head, left, right in b.pairs:
                    if head in cell:
                        continue
                    if any(left in chart[(i, k)] and right in chart[(k, j)] for k in range(i, j + 1)):
                        cell.add(head)
                        changed = True
    return b.start in chart[(0, n)]


# ── Intersection with a regular language ─────────────────────────────────────


def _check_terminals(g: Cfg, d: Dfa) -> None:
    used = {sym for _, body in g.productions for sym in body if sym in g.terminals}
    missing = used - set(d.alphabet)
    if missing:
        raise AlphabetMismatch(f"grammar terminals outside the automaton alphabet: {sorted(missing)}")


def _generating(g: Cfg, d: Dfa) -> Dict[str, Set[Tuple[int, int]]]:
    """For each nonterminal ``A`` the pairs ``(p, q)`` with ``A ⇒* w`` and ``δ(p, w) = q``."""
    b = g.binary
    gen: Dict[str, Set[Tuple[int, int]]] = {}
    for head in b.nullable:
        gen.setdefault(head, set()).update((p, p) for p in d.states)
    for head, a in b.terms:
        gen.setdefault(head, set()).update((p, d.step(p, a)) for p in d.states)
    changed = True
    while changed:
        changed = False
        for head, body in b.units:
            new = gen.get(body, set()) - gen.get(head, set())
            if new:
                gen.setdefault(head, set()).update(new)
                changed = True
        for head, left, right in b.pairs:
            lefts, rights = gen.get(left), gen.get(right)
            if not lefts or not rights:
                continue
            by_source: Dict[int, Set[int]] = {}
            for p, q in rights:
                by_source.setdefault(p, set()).add(q)
            new = {(p, r) for p, q in lefts for r in by_source.get(q, ())} - gen.get(head, set())
            if new:
                gen.setdefault(head, set()).update(new)
                changed = True
    return gen


def cfg_regular_intersects(g: Cfg, d: Dfa) -> bool:
    """Is ``L(g) ∩ L(d)`` nonempty?"""
    _check_terminals(g, d)
    reached = _generating(g, d).get(g.start, set())
    return any((d.initial, f) in reached for f in d.finals)


def _shorter(candidate: Word, current: Optional[Word]) -> bool:
    return current is None or (len(candidate), candidate) < (len(current), current)


def _shortest_witness(g: Cfg, d: Dfa, cap: int) -> Optional[Word]:
    b = g.binary
    best: Dict[str, Dict[Tuple[int, int], Word]] = {}

    def offer(head: str, key: Tuple[int, int], word: Word) -> bool:
        table = best.setdefault(head, {})
        if len(word) <= cap and _shorter(word, table.get(key)):
            table[key] = word
            return True
        return False

    for head in b.nullable:
        for p in d.states:
            offer(head, (p, p), ())
    for head, a in b.terms:
        for p in d.states:
            offer(head, (p, d.step(p, a)), (a,))
    changed = True
    while changed:
        changed = False
        for head, body in b.units:
            for key, word in list(best.get(body, {}).items()):
                changed |= offer(head, key, word)
        for head, left, right in b.pairs:
            rights: Dict[int, List[Tuple[int, Word]]] = {}
            for (p, q), word in best.get(right, {}).items():
                rights.setdefault(p, []).append((q, word))
            for (p, q), w1 in list(best.get(left, {}).items()):
                for r, w2 in rights.get(q, ()):
                    changed |= offer(head, (p, r), w1 + w2)
    found = [best.get(g.start, {}).get((d.initial, f)) for f in d.finals]
    found = [w for w in found if w is not None]
    return min(found, key=lambda w: (len(w), w)) if found else None


def cfg_regular_nonempty(g: Cfg, d: Dfa, settings: Optional[Settings] = None) -> Optional[Word]:
    """
    A shortest word of ``L(g) ∩ L(d)``, or ``None`` when the intersection is
    empty. The witness is re-checked by CYK and by running ``d``.
    """
    cfg = resolve(settings)
    if not cfg_regular_intersects(g, d):
        return None
    word = _shortest_witness(g, d, cfg.derivation_cap)
    if word is None:
        raise BudgetExceeded(f"shortest witness is longer than derivation_cap={cfg.derivation_cap}")
    if not cfg_accepts(g, word) or not d.accepts(word):
        raise CertificateFailure(f"witness {word} failed re-verification")
    return word


# ── Regularization ───────────────────────────────────────────────────────────


def function_automaton(q_dfa: Dfa) -> Tuple[Dfa, List[TransitionFn]]:
    """
    The deterministic automaton whose states are the transition functions of
    ``q_dfa`` reachable from the identity; it has no final states.
    """
    letters = [word_transition(q_dfa, (a,)) for a in q_dfa.alphabet]
    fns = [TransitionFn.identity(len(q_dfa.table))]
    index = {fns[0]: 0}
    table: List[Tuple[int, ...]] = []
    i = 0
    while i < len(fns):
        row = []
        for letter in letters:
            nxt = fns[i].then(letter)
            if nxt not in index:
                index[nxt] = len(fns)
                fns.append(nxt)
            row.append(index[nxt])
        table.append(tuple(row))
        i += 1
    logger.debug("function automaton: %d reachable transition functions", len(fns))
    return Dfa(q_dfa.alphabet, tuple(table), 0, frozenset()), fns


def regularize_view(g: Cfg, q: QuerySpec, settings: Optional[Settings] = None) -> Dfa:
    """Minimal DFA of ``L_V``: the union of the classes ``L_f`` that meet ``L(g)``."""
    cfg = resolve(settings)
    if not g.terminals <= q.sigma:
        raise AlphabetMismatch(f"grammar over {sorted(g.terminals)}, query over {sorted(q.sigma)}")
    functions, fns = function_automaton(q.dfa)

    def meets(state: int) -> bool:
        single = Dfa(functions.alphabet, functions.table, functions.initial, frozenset({state}))
        return cfg_regular_intersects(g, single)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            hits = list(pool.map(meets, functions.states))
    else:
        hits = [meets(state) for state in functions.states]
    finals = frozenset(state for state, hit in zip(functions.states, hits) if hit)
    logger.info("regularize: %d of %d transition functions met by the grammar", len(finals), len(fns))
    return minimize(Dfa(functions.alphabet, functions.table, 0, finals))


def regularize_views(
    q: QuerySpec, views: Mapping[str, Cfg], settings: Optional[Settings] = None
) -> ViewSpec:
    """The regular view ``Ṽ`` with one regularized automaton per grammar."""
    return ViewSpec.from_dfas(q.sigma, {name: regularize_view(g, q, settings) for name, g in views.items()})


def cert_cfpq(
    s: ViewInstance,
    q: QuerySpec,
    views: Mapping[str, Cfg],
    settings: Optional[Settings] = None,
) -> List[Pair]:
    """Certain answers for grammar views, through the template of their regularization."""
    extra = s.tau - set(views)
    if extra:
        raise ParseError(f"instance uses labels with no grammar view: {sorted(extra)}")
    regular = regularize_views(q, views, settings)
    return cert_all(s, build_template(q, regular, settings))
