"""
Determinacy and monotone determinacy.

Bounded refutation searches over database families, the word-based test for
monotone determinacy (every word of ``Q`` must have certain endpoints on the
view image of its path), and a complete decision procedure that explores a
lazily built automaton for the words that fail that test.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from .automata import Word, all_words, enumerate_words, format_word
from .config import Settings, resolve
from .errors import BudgetExceeded, CertificateFailure
from .graphs import GraphDb, serialize_graph
from .models import Verdict, VerdictStatus
from .oracles import enumerate_dbs, random_db
from .rpq import QuerySpec, ViewSpec, apply_view, path_endpoints, path_of_word, rpq_eval
from .template import Template, cert, materialize_counterexample

logger = logging.getLogger(__name__)

RANDOM_FAMILY_SIZE = 500
RANDOM_FAMILY_SEED = 20240607


@dataclass(frozen=True)
class DatabaseFamily:
    name: str
    databases: Tuple[GraphDb, ...]


def database_family(
    sigma: Iterable[str], max_nodes: int, settings: Optional[Settings] = None,
    extra: Sequence[GraphDb] = (),
) -> DatabaseFamily:
    """
    All graphs up to ``max_nodes`` nodes when that fits the budget; otherwise
    every simple path up to length ``2 · max_nodes`` plus seeded random graphs.
    """
    cfg = resolve(settings)
    if max_nodes < 1:
        raise ValueError("max_nodes must be at least 1")
    labels = sorted(sigma)
    total = sum(2 ** (n * n * len(labels)) for n in range(1, max_nodes + 1))
    if total <= cfg.max_enumerated_dbs:
        dbs = [db for n in range(1, max_nodes + 1) for db in enumerate_dbs(labels, n, cfg)]
        name = f"exhaustive(nodes<={max_nodes})"
    else:
        max_len = 2 * max_nodes
        paths = sum(len(labels) ** k for k in range(max_len + 1))
        if paths + RANDOM_FAMILY_SIZE > cfg.max_enumerated_dbs:
            raise BudgetExceeded(
                f"structured family of {paths} paths exceeds max_enumerated_dbs={cfg.max_enumerated_dbs}"
            )
        dbs = [path_of_word(w, labels) for w in all_words(labels, max_len)]
        dbs.extend(
            random_db(labels, 1 + i % max_nodes, 0.3, RANDOM_FAMILY_SEED + i)
            for i in range(RANDOM_FAMILY_SIZE)
        )
        name = f"paths(len<={max_len})+random({RANDOM_FAMILY_SIZE})"
        logger.warning("exhaustive family too large (%d graphs); using %s", total, name)
    if extra:
        dbs.extend(extra)
        name += f"+extra({len(extra)})"
    return DatabaseFamily(name, tuple(dbs))


def _view_key(db: GraphDb, v: ViewSpec) -> str:
    return serialize_graph(apply_view(db, v).graph)


def _answers(db: GraphDb, q: QuerySpec) -> FrozenSet[Tuple[str, str]]:
    return frozenset(rpq_eval(db, q))


def check_determinacy_bounded(
    q: QuerySpec, v: ViewSpec, max_nodes: int, settings: Optional[Settings] = None,
    extra: Sequence[GraphDb] = (),
) -> Verdict:
    """
    Look for ``D, D'`` with ``V(D) = V(D')`` and ``Q(D) ≠ Q(D')`` among the
    databases of :func:`database_family`, grouping by view image.
    """
    family = database_family(q.sigma, max_nodes, settings, extra)
    frame = pd.DataFrame(
        {
            "view": [_view_key(db, v) for db in family.databases],
            "answers": [
                ";".join(f"{x},{y}" for x, y in sorted(_answers(db, q)))
                for db in family.databases
            ],
        }
    )
    spread = frame.groupby("view", sort=False)["answers"].nunique()
    conflicting = spread[spread > 1]
    logger.info(
        "determinacy: %d databases, %d view images, %d conflicting",
        len(frame), len(spread), len(conflicting),
    )
    if conflicting.empty:
        return Verdict(VerdictStatus.NO_COUNTEREXAMPLE_UP_TO, bound=max_nodes, note=family.name)

    group = frame[frame["view"] == conflicting.index[0]]
    first = group.index[0]
    second = group[group["answers"] != group.loc[first, "answers"]].index[0]
    d1, d2 = family.databases[first], family.databases[second]
    if _view_key(d1, v) != _view_key(d2, v) or _answers(d1, q) == _answers(d2, q):
        raise CertificateFailure("determinacy counterexample does not re-verify")
    return Verdict(VerdictStatus.REFUTED, bound=max_nodes, evidence_pair=(d1, d2), note=family.name)


def check_monotone_pairs_bounded(
    q: QuerySpec, v: ViewSpec, max_nodes: int, settings: Optional[Settings] = None,
    extra: Sequence[GraphDb] = (),
) -> Verdict:
    """Look for ``V(D) ⊆ V(D')`` with ``Q(D) ⊄ Q(D')`` in the same families."""
    cfg = resolve(settings)
    family = database_family(q.sigma, max_nodes, cfg, extra)
    by_view: Dict[FrozenSet, Dict[FrozenSet, int]] = {}
    for idx, db in enumerate(family.databases):
        view = apply_view(db, v).graph.edges
        by_view.setdefault(view, {}).setdefault(_answers(db, q), idx)
    views = list(by_view)
    if len(views) ** 2 > cfg.max_enumerated_dbs * 10:
        raise BudgetExceeded(f"{len(views)} distinct view images are too many to compare pairwise")
    for small in views:
        for large in views:
            if not small <= large:
                continue
            for answers, i in by_view[small].items():
                for other, j in by_view[large].items():
                    if answers <= other:
                        continue
                    d1, d2 = family.databases[i], family.databases[j]
                    if not (apply_view(d1, v).graph.edges <= apply_view(d2, v).graph.edges
                            and not _answers(d1, q) <= _answers(d2, q)):
                        raise CertificateFailure("monotonicity counterexample does not re-verify")
                    return Verdict(
                        VerdictStatus.REFUTED, bound=max_nodes, evidence_pair=(d1, d2), note=family.name
                    )
    return Verdict(VerdictStatus.NO_COUNTEREXAMPLE_UP_TO, bound=max_nodes, note=family.name)


# ── Word characterization ────────────────────────────────────────────────────


def word_is_bad(word: Word, q: QuerySpec, v: ViewSpec, t: Template) -> bool:
    """Are the endpoints of ``P_w`` not certain on ``V(P_w)``?"""
    db = path_of_word(word, q.sigma)
    s = apply_view(db, v, keep_all_nodes=True)
    u, w = path_endpoints(word)
    verdict = cert(s, u, w, t)
    if not verdict.certain:
        materialize_counterexample(s, verdict.witness, t, q, v, pair=(u, w))
    return not verdict.certain


def check_monotone_words(
    q: QuerySpec, v: ViewSpec, t: Template, max_len: int
) -> Verdict:
    """
    Test every ``w ∈ L(Q)`` with ``|w| ≤ max_len``: the endpoints of ``P_w``
    must be certain on ``V(P_w)``. The first failing word refutes monotone
    determinacy; its counterexample database is materialized and checked.
    """
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    words = enumerate_words(q.dfa, max_len)
    for word in words:
        if word_is_bad(word, q, v, t):
            logger.info("monotone determinacy refuted by %s", format_word(word))
            return Verdict(VerdictStatus.REFUTED, bound=max_len, evidence_word=word)
    logger.info("checked %d words of L(Q) up to length %d", len(words), max_len)
    return Verdict(VerdictStatus.NO_COUNTEREXAMPLE_UP_TO, bound=max_len)


# ── Full decision ────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class BadWordsAutomatonState:
    """
    A state of the lazy automaton for words whose path view maps into the
    template with pinned endpoints.

    ``pairset`` holds, for every earlier path position ``j``, its template
    image ``t_j`` with the view-product state reached from position ``j``.
    """

    pairset: FrozenSet[Tuple[str, int]]
    last_choice: str
    q_state: int


class BadWordsExplorer:
    """Breadth-first emptiness check of ``L(Q) ∩ BadWords`` with subsumption pruning."""

    def __init__(
        self, q: QuerySpec, v: ViewSpec, t: Template, budget: int, prune: bool = True
    ):
        self.q = q
        self.v = v
        self.t = t
        self.budget = budget
        self.prune = prune
        self.product = v.product
        self.tnodes = t.graph.sorted_nodes()
        eps_views = [v.tau[i] for i in self.product.accepting_views(self.product.initial)]
        self.choosable = [
            n for n in self.tnodes if all(t.graph.has_edge(n, name, n) for name in eps_views)
        ]
        self.live_q = q.dfa.live_states
        self.explored = 0

    def initial_states(self) -> List[BadWordsAutomatonState]:
        q0 = self.q.dfa.initial
        if q0 not in self.live_q:
            return []
        return [
            BadWordsAutomatonState(frozenset({(n, self.product.initial)}), n, q0)
            for n in self.choosable
            if n in self.t.sources
        ]

    def accepting(self, state: BadWordsAutomatonState) -> bool:
        return state.last_choice in self.t.targets and state.q_state in self.q.dfa.finals

    def successors(self, state: BadWordsAutomatonState, label: str) -> List[BadWordsAutomatonState]:
        q_next = self.q.dfa.step(state.q_state, label)
        if q_next not in self.live_q:
            return []
        advanced = frozenset((n, self.product.step(p, label)) for n, p in state.pairset)
        options = set(self.choosable)
        for n, p in advanced:
            for vi in self.product.accepting_views(p):
                options &= self.t.graph.successors(n, self.v.tau[vi])
                if not options:
                    return []
        return [
            BadWordsAutomatonState(advanced | {(n, self.product.initial)}, n, q_next)
            for n in sorted(options)
        ]

    def shortest_bad_word(self) -> Optional[Word]:
        parent: Dict[BadWordsAutomatonState, Tuple[Optional[BadWordsAutomatonState], Optional[str]]] = {}
        seen: Dict[Tuple[str, int], List[FrozenSet[Tuple[str, int]]]] = {}
        queue: deque = deque()

        def visit(state, prev, label) -> bool:
            if state in parent:
                return False
            if self.prune:
                bucket = seen.setdefault((state.last_choice, state.q_state), [])
                if any(old <= state.pairset for old in bucket):
                    return False
                bucket.append(state.pairset)
            parent[state] = (prev, label)
            self.explored += 1
            if self.explored > self.budget:
                raise BudgetExceeded(f"more than {self.budget} automaton states explored")
            queue.append(state)
            return True

        for state in self.initial_states():
            visit(state, None, None)
        while queue:
            state = queue.popleft()
            if self.accepting(state):
                return self._word(parent, state)
            for label in self.q.dfa.alphabet:
                for nxt in self.successors(state, label):
                    visit(nxt, state, label)
        return None

    @staticmethod
    def _word(parent, state) -> Word:
        letters: List[str] = []
        while True:
            prev, label = parent[state]
            if prev is None:
                return tuple(reversed(letters))
            letters.append(label)
            state = prev


def decide_monotone_full(
    q: QuerySpec, v: ViewSpec, t: Template, budget: Optional[int] = None,
    settings: Optional[Settings] = None, prune: bool = True,
) -> Verdict:
    """
    Decide monotone determinacy: ``Holds`` iff no word of ``L(Q)`` is bad.

    A refuting word is the shortest one and is re-verified through
    :func:`word_is_bad`.
    """
    cfg = resolve(settings)
    explorer = BadWordsExplorer(q, v, t, budget or cfg.max_decision_states, prune)
    word = explorer.shortest_bad_word()
    if word is None:
        note = f"L(Q) and BadWords are disjoint ({explorer.explored} states explored)"
        logger.info(note)
        return Verdict(VerdictStatus.HOLDS, note=note)
    if not word_is_bad(word, q, v, t):
        raise CertificateFailure(f"automaton word {format_word(word)} is not bad")
    logger.info("monotone determinacy refuted by %s", format_word(word))
    return Verdict(VerdictStatus.REFUTED, evidence_word=word, note=f"{explorer.explored} states explored")
