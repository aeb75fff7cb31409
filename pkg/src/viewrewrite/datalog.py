"""
Datalog programs over view instances.

Holds the program model and its text format, the canonical program
``Q_{l,k}`` of the pebble game against a template, and a bottom-up
evaluator (naive or semi-naive, same result).

Emitted programs use one IDB predicate ``no<m>_<i1>_..._<im>`` per tuple of
template nodes: ``no1_3(Z, X, Y)`` says that, in the game for ``(X, Y)``,
no surviving strategy maps ``Z`` to template node number 3. The built-in
EDB predicate ``node`` holds for every node of the instance.
"""

import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import chain, combinations, product
from typing import Collection, Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from .config import Settings, resolve
from .errors import EmissionTooLarge, ParseError, UnboundHeadVariable
from .graphs import is_token
from .models import GameConfig
from .rpq import Pair, ViewInstance
from .template import Template

logger = logging.getLogger(__name__)

NODE_PREDICATE = "node"
GOAL_PREDICATE = "goal"

Fact = Tuple[str, ...]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: Tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.pred}({','.join(self.args)})"


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: Tuple[Atom, ...]

    def variables(self) -> Set[str]:
        return set(self.head.args).union(*(a.args for a in self.body))

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(str(a) for a in self.body)}."


@dataclass
class DatalogProgram:
    """
    A Datalog program with a binary goal.

    Every argument is a variable; IDB predicates are those declared or used
    in a head. ``l`` and ``k`` record the fragment a program was emitted for.
    """

    edb: FrozenSet[str]
    idb: Dict[str, int]
    rules: List[Rule]
    goal: str
    l: Optional[int] = None
    k: Optional[int] = None

    def __post_init__(self) -> None:
        self.edb = frozenset(self.edb)
        self.check()

    def check(self) -> None:
        """Static well-formedness; raises on the first problem."""
        if self.goal not in self.idb or self.idb[self.goal] != 2:
            raise ParseError(f"goal {self.goal!r} must be a binary IDB predicate")
        arities: Dict[str, int] = dict(self.idb)
        for rule in self.rules:
            if rule.head.pred not in self.idb:
                raise ParseError(f"head predicate {rule.head.pred!r} is not IDB")
            body_vars = set(chain.from_iterable(a.args for a in rule.body))
            unbound = [v for v in rule.head.args if v not in body_vars]
            if unbound:
                raise UnboundHeadVariable(f"{unbound} unbound in rule {rule}")
            for atom in (rule.head,) + rule.body:
                if atom.pred not in self.idb and atom.pred not in self.edb:
                    raise ParseError(f"undeclared predicate {atom.pred!r} in {rule}")
                known = arities.setdefault(atom.pred, len(atom.args))
                if known != len(atom.args):
                    raise ParseError(f"{atom.pred} used with arities {known} and {len(atom.args)}")

    @property
    def max_idb_arity(self) -> int:
        return max(self.idb.values(), default=0)

    @property
    def max_rule_variables(self) -> int:
        return max((len(r.variables()) for r in self.rules), default=0)

    def fragment_violations(self) -> List[str]:
        """Where the program leaves Datalog_{l,k} (IDB arity ≤ l+2, ≤ k+2 variables per rule)."""
        if self.l is None or self.k is None:
            return []
        problems = [
            f"IDB {name} has arity {arity} > {self.l + 2}"
            for name, arity in sorted(self.idb.items())
            if arity > self.l + 2
        ]
        problems.extend(
            f"rule {rule} uses {len(rule.variables())} variables > {self.k + 2}"
            for rule in self.rules
            if len(rule.variables()) > self.k + 2
        )
        return problems

    def to_text(self) -> str:
        lines = [f"@goal {self.goal}"]
        if self.l is not None and self.k is not None:
            lines.append(f"@fragment {self.l} {self.k}")
        lines.extend(f"@idb {name}/{arity}" for name, arity in sorted(self.idb.items()))
        lines.extend(str(rule) for rule in self.rules)
        return "\n".join(lines) + "\n"


# ── Text format ──────────────────────────────────────────────────────────────

_ATOM = re.compile(r"\s*([A-Za-z0-9_]+)\s*\(([^()]*)\)\s*")


def _parse_atoms(text: str, lineno: int) -> List[Atom]:
    atoms: List[Atom] = []
    pos = 0
    while pos < len(text):
        m = _ATOM.match(text, pos)
        if not m:
            raise ParseError(f"malformed atom near {text[pos:]!r}", lineno)
        args = tuple(a.strip() for a in m.group(2).split(",")) if m.group(2).strip() else ()
        if not all(is_token(a) for a in args):
            raise ParseError(f"invalid argument in {m.group(0).strip()!r}", lineno)
        atoms.append(Atom(m.group(1), args))
        pos = m.end()
        if pos < len(text):
            if text[pos] != ",":
                raise ParseError(f"expected ',' near {text[pos:]!r}", lineno)
            pos += 1
    return atoms


def parse_datalog(text: str) -> DatalogProgram:
    """
    Parse ``head(X,Y) :- body1(X,Z), body2(Z,Y).`` rules, one per line, with
    ``@goal <pred>``, optional ``@idb <pred>/<arity>`` and
    ``@fragment <l> <k>`` directives and ``%`` or ``#`` comments.
    """
    goal: Optional[str] = None
    fragment: Tuple[Optional[int], Optional[int]] = (None, None)
    declared: Dict[str, int] = {}
    rules: List[Rule] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = re.split(r"[%#]", raw, maxsplit=1)[0].strip()
        if not line:
            continue
        if line.startswith("@"):
            parts = line.split()
            if parts[0] == "@goal" and len(parts) == 2:
                goal = parts[1]
            elif parts[0] == "@fragment" and len(parts) == 3 and all(p.isdigit() for p in parts[1:]):
                fragment = (int(parts[1]), int(parts[2]))
            elif parts[0] == "@idb" and len(parts) == 2 and "/" in parts[1]:
                name, _, arity = parts[1].partition("/")
                if not arity.isdigit():
                    raise ParseError(f"bad arity in {line!r}", lineno)
                declared[name] = int(arity)
            else:
                raise ParseError(f"unknown directive {line!r}", lineno)
            continue
        if not line.endswith("."):
            raise ParseError("rule must end with '.'", lineno)
        head_text, sep, body_text = line[:-1].partition(":-")
        heads = _parse_atoms(head_text, lineno)
        if len(heads) != 1:
            raise ParseError("a rule has exactly one head atom", lineno)
        body = _parse_atoms(body_text, lineno) if sep else []
        rules.append(Rule(heads[0], tuple(body)))

    idb = dict(declared)
    for rule in rules:
        idb.setdefault(rule.head.pred, len(rule.head.args))
    if goal is None:
        if GOAL_PREDICATE not in idb:
            raise ParseError("missing '@goal' directive")
        goal = GOAL_PREDICATE
    edb = {a.pred for r in rules for a in r.body if a.pred not in idb}
    return DatalogProgram(frozenset(edb), idb, rules, goal, fragment[0], fragment[1])


# ── Evaluation ───────────────────────────────────────────────────────────────


class _Facts:
    """Relations with indexes keyed on any set of bound positions, rebuilt on demand."""

    def __init__(self) -> None:
        self.relations: Dict[str, Set[Fact]] = defaultdict(set)
        self._index: Dict[Tuple[str, Tuple[int, ...]], Dict[Fact, List[Fact]]] = {}

    def add_all(self, pred: str, facts) -> None:
        self.relations[pred].update(facts)
        self._index = {key: index for key, index in self._index.items() if key[0] != pred}

    def lookup(self, pred: str, arity: int, positions: Tuple[int, ...], values: Fact) -> Collection[Fact]:
        relation = self.relations.get(pred, ())
        if not positions:
            return relation
        if len(positions) == arity:
            return (values,) if values in relation else ()
        key = (pred, positions)
        if key not in self._index:
            index: Dict[Fact, List[Fact]] = defaultdict(list)
            for fact in relation:
                if len(fact) == arity:
                    index[tuple(fact[p] for p in positions)].append(fact)
            self._index[key] = index
        return self._index[key].get(values, ())


def _solutions(
    body: Sequence[Atom], full: _Facts, delta: Optional[_Facts] = None, delta_pos: int = -1
) -> Iterator[Dict[str, str]]:
    """
    Bindings satisfying every atom of ``body``.

    Each step first checks the atoms whose variables are all bound, then
    joins the atom with the fewest matching facts under the current binding.
    """
    binding: Dict[str, str] = {}

    def candidates(i: int) -> Tuple[bool, Collection[Fact]]:
        atom = body[i]
        positions = tuple(p for p, var in enumerate(atom.args) if var in binding)
        values = tuple(binding[atom.args[p]] for p in positions)
        source = delta if i == delta_pos else full
        found = source.lookup(atom.pred, len(atom.args), positions, values)
        return len(positions) == len(atom.args), found

    def rec(remaining: Tuple[int, ...]) -> Iterator[Dict[str, str]]:
        best: Optional[int] = None
        best_found: Collection[Fact] = ()
        open_atoms = []
        for i in remaining:
            closed, found = candidates(i)
            if not found:
                return
            if closed:
                continue
            open_atoms.append(i)
            if best is None or len(found) < len(best_found):
                best, best_found = i, found
        if best is None:
            yield dict(binding)
            return
        rest = tuple(i for i in open_atoms if i != best)
        args = body[best].args
        for fact in best_found:
            if len(fact) != len(args):
                continue
            added = []
            ok = True
            for var, value in zip(args, fact):
                current = binding.get(var)
                if current is None:
                    binding[var] = value
                    added.append(var)
                elif current != value:
                    ok = False
                    break
            if ok:
                yield from rec(rest)
            for var in added:
                del binding[var]

    yield from rec(tuple(range(len(body))))


def datalog_naive_eval(p: DatalogProgram, s: ViewInstance, semi_naive: bool = False) -> List[Pair]:
    """
    Least fixpoint of ``p`` over the facts of ``s``; the goal relation, sorted.

    Edges ``Vi(x, y)`` become facts ``Vi(x, y)``; every node ``n`` gives
    ``node(n)``. Semi-naive iteration computes the same fixpoint.
    """
    p.check()
    facts = _Facts()
    for x, label, y in s.graph.edges:
        facts.relations[label].add((x, y))
    facts.add_all(NODE_PREDICATE, {(n,) for n in s.nodes})

    def fire(rule: Rule, delta: Optional[_Facts] = None, pos: int = -1) -> Set[Fact]:
        out = set()
        for b in _solutions(rule.body, facts, delta, pos):
            fact = tuple(b[v] for v in rule.head.args)
            if fact not in facts.relations[rule.head.pred]:
                out.add(fact)
        return out

    delta: Dict[str, Set[Fact]] = defaultdict(set)
    for rule in p.rules:
        delta[rule.head.pred] |= fire(rule)
    rounds = 1
    while any(delta.values()):
        for pred, new in delta.items():
            facts.add_all(pred, new)
        previous = _Facts()
        for pred, new in delta.items():
            previous.add_all(pred, new)
        delta = defaultdict(set)
        for rule in p.rules:
            if not semi_naive:
                delta[rule.head.pred] |= fire(rule)
                continue
            for pos, atom in enumerate(rule.body):
                if atom.pred in p.idb and previous.relations.get(atom.pred):
                    delta[rule.head.pred] |= fire(rule, previous, pos)
        rounds += 1
        logger.debug("datalog round %d: %d new facts", rounds, sum(len(d) for d in delta.values()))
    return sorted(f for f in facts.relations.get(p.goal, ()) if len(f) == 2)


# ── Canonical program emission ───────────────────────────────────────────────


@dataclass
class _Emitter:
    t: Template
    cfg: GameConfig
    settings: Settings
    rules: List[Rule] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.tnodes = self.t.graph.sorted_nodes()
        self.index = {n: i for i, n in enumerate(self.tnodes)}
        self.labels = sorted(self.t.graph.alphabet)
        self.considered = 0
        clash = [a for a in self.labels if a in (NODE_PREDICATE, GOAL_PREDICATE) or re.match(r"^no\d", a)]
        if clash:
            raise ParseError(f"view names clash with emitted predicates: {clash}")

    def pred(self, images: Sequence[str]) -> str:
        return f"no{len(images)}" + "".join(f"_{self.index[i]}" for i in images)

    def no_atom(self, images: Sequence[str], variables: Sequence[str]) -> Atom:
        return Atom(self.pred(images), tuple(variables) + ("X", "Y"))

    def add(self, head: Atom, body: List[Atom]) -> None:
        bound = set(chain.from_iterable(a.args for a in body))
        needed = list(dict.fromkeys(head.args + tuple(chain.from_iterable(a.args for a in body))))
        guards = [Atom(NODE_PREDICATE, (v,)) for v in needed if v not in bound]
        edb = [a for a in body if not a.pred.startswith("no")]
        idb = [a for a in body if a.pred.startswith("no")]
        self.rules.append(Rule(head, tuple(edb + guards + idb)))

    def tick(self, amount: int = 1) -> None:
        self.considered += amount
        if self.considered > self.settings.max_datalog_rules:
            raise EmissionTooLarge(
                f"more than {self.settings.max_datalog_rules} candidate rules for l={self.cfg.l}"
            )

    def allowed(self, role: Optional[str]) -> List[str]:
        if role == "X":
            return [n for n in self.tnodes if n in self.t.sources]
        if role == "Y":
            return [n for n in self.tnodes if n in self.t.targets]
        return list(self.tnodes)

    # rules ─────────────────────────────────────────────────────────────────

    def base_rules(self) -> None:
        for n in self.tnodes:
            if n not in self.t.sources:
                self.add(self.no_atom([n], ["X"]), [])
            if n not in self.t.targets:
                self.add(self.no_atom([n], ["Y"]), [])
        for a in self.labels:
            for n in self.tnodes:
                if not self.t.graph.has_edge(n, a, n):
                    self.add(self.no_atom([n], ["C1"]), [Atom(a, ("C1", "C1"))])
        if self.cfg.l >= 2:
            for n1, n2 in product(self.tnodes, repeat=2):
                head = self.no_atom([n1, n2], ["C1", "C2"])
                self.add(head, [self.no_atom([n1], ["C1"])])
                self.add(head, [self.no_atom([n2], ["C2"])])
                for a in self.labels:
                    if not self.t.graph.has_edge(n1, a, n2):
                        self.add(head, [Atom(a, ("C1", "C2"))])
                    if not self.t.graph.has_edge(n2, a, n1):
                        self.add(head, [Atom(a, ("C2", "C1"))])

    def extension_rules(self, m: int) -> None:
        extra = self.cfg.k - m
        if extra < 1:
            return
        size = m + extra
        positions = list(range(size))
        atoms = [
            (p, a, q)
            for p in positions for q in positions for a in self.labels
            if p >= m or q >= m
        ]
        if 2 ** len(atoms) > self.settings.max_datalog_rules:
            raise EmissionTooLarge(
                f"{2 ** len(atoms)} edge patterns over {size} variables exceed the rule budget"
            )
        patterns = sorted(
            (frozenset(c) for r in range(len(atoms) + 1) for c in combinations(atoms, r)),
            key=lambda c: (len(c), sorted(c)),
        )
        overlaps = [
            d for r in range(1, self.cfg.l + 1) for d in combinations(positions, r)
            if any(i >= m for i in d)
        ]
        for roles in _role_assignments(size):
            names = [
                roles[i] or (f"C{i + 1}" if i < m else f"W{i - m + 1}") for i in positions
            ]
            heads = [n for i, n in enumerate(names) if i < m]
            pools = [self.allowed(roles[i]) for i in positions]
            for rho in product(*pools[:m]):
                extensions = list(product(*pools[m:]))
                kept: Dict[FrozenSet, List[FrozenSet]] = defaultdict(list)
                for phi in patterns:
                    self.tick()
                    open_ext = frozenset(
                        g for g in extensions
                        if all(
                            self.t.graph.has_edge((rho + g)[p], a, (rho + g)[q])
                            for p, a, q in phi
                        )
                    )
                    if any(prior <= phi for prior in kept[open_ext]):
                        continue
                    kept[open_ext].append(phi)
                    body_edb = [Atom(a, (names[p], names[q])) for p, a, q in sorted(phi)]
                    choices = [overlaps] * len(open_ext)
                    self.tick(max(1, len(overlaps) ** len(open_ext)) - 1)
                    for picks in product(*choices):
                        body = list(body_edb)
                        for g, d in zip(sorted(open_ext), picks):
                            full = rho + g
                            body.append(self.no_atom([full[i] for i in d], [names[i] for i in d]))
                        self.add(self.no_atom(list(rho), heads), body)

    def goal_rule(self) -> None:
        body = [self.no_atom([n], ["Z"]) for n in self.tnodes]
        self.rules.append(Rule(Atom(GOAL_PREDICATE, ("X", "Y")), tuple(body)))

    def program(self) -> DatalogProgram:
        self.base_rules()
        for m in range(1, self.cfg.l + 1):
            self.extension_rules(m)
        self.goal_rule()
        idb = {GOAL_PREDICATE: 2}
        for m in range(1, self.cfg.l + 1):
            for images in product(self.tnodes, repeat=m):
                idb[self.pred(images)] = m + 2
        rules = list(dict.fromkeys(self.rules))
        logger.info("emitted Q_{%d,%d}: %d IDB predicates, %d rules", self.cfg.l, self.cfg.k, len(idb), len(rules))
        return DatalogProgram(
            frozenset(self.labels) | {NODE_PREDICATE}, idb, rules, GOAL_PREDICATE,
            self.cfg.l, self.cfg.k,
        )


def _role_assignments(size: int) -> List[Tuple[Optional[str], ...]]:
    """Ways to name at most one position ``X`` and at most one ``Y``."""
    out: List[Tuple[Optional[str], ...]] = []
    for x in [None] + list(range(size)):
        for y in [None] + list(range(size)):
            if x is not None and x == y:
                continue
            roles: List[Optional[str]] = [None] * size
            if x is not None:
                roles[x] = "X"
            if y is not None:
                roles[y] = "Y"
            out.append(tuple(roles))
    return out


def emit_datalog(t: Template, cfg: GameConfig, settings: Optional[Settings] = None) -> DatalogProgram:
    """
    The canonical program ``Q_{l,k}`` whose goal holds on ``(u, v)`` exactly
    when Player 1 wins the (l, k)-game on ``(S, u, v)`` against ``t``.
    """
    st = resolve(settings)
    if cfg.l > st.max_emission_l:
        raise EmissionTooLarge(f"emission is capped at l <= {st.max_emission_l}, got l={cfg.l}")
    n = t.size
    predicates = 1 + sum(n ** m for m in range(1, cfg.l + 1))
    if predicates > st.max_datalog_predicates:
        raise EmissionTooLarge(
            f"{predicates} IDB predicates exceed the budget of {st.max_datalog_predicates}"
        )
    return _Emitter(t, cfg, st).program()
