"""
Existential (l, k)-pebble game against the template.

Player 1 wins on ``(S, u, v)`` exactly when the canonical Datalog program
``Q_{l,k}`` derives ``(u, v)``; with ``k = l + 1`` this is the Datalog
rewriting evaluated by :func:`rewrite_eval`.
"""

import logging
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

from .automata import Word, format_word
from .config import Settings, resolve
from .errors import BudgetExceeded, UnknownNode
from .graphs import GraphDb, find_hom
from .models import GameConfig, GameResult, Player, Position
from .rpq import Pair, QuerySpec, ViewInstance, ViewSpec, apply_view, path_endpoints, path_of_word, rpq_eval
from .template import Template

logger = logging.getLogger(__name__)


class PebbleGame:
    """
    Greatest-fixpoint solver for one instance/template pair.

    Positions are pairs ``(A, h)`` with ``|A| = min(k, |S|)`` and ``h`` a
    homomorphism from ``S[A]`` into the template respecting the pinning.
    Smaller positions are the restrictions of these and are derived when
    needed: ``(A, h)`` is deleted when some ``C ⊆ A`` with ``|C| ≤ l`` has a
    ``B ⊇ C`` of full size where no surviving ``h'`` agrees with ``h`` on
    ``C``.

    With ``all_sizes`` every domain ``|A| ≤ k`` is enumerated instead and
    ``(A, h)`` is deleted when some ``B`` with ``|A ∩ B| ≤ l`` has no
    survivor agreeing on the overlap. Both settings have the same winner.
    """

    def __init__(
        self,
        s: GraphDb,
        t: Template,
        allowed: Mapping[str, Iterable[str]],
        cfg: GameConfig,
        settings: Optional[Settings] = None,
        schedule: str = "lex",
        all_sizes: bool = False,
    ):
        self.s = s
        self.t = t
        self.cfg = cfg
        self.settings = resolve(settings)
        self.schedule = schedule
        self.all_sizes = all_sizes
        self.nodes = s.sorted_nodes()
        self.rank = {n: i for i, n in enumerate(self.nodes)}
        self.width = min(cfg.k, len(self.nodes))
        tnodes = t.graph.sorted_nodes()
        self.candidates: Dict[str, List[str]] = {}
        for n in self.nodes:
            pool = [m for m in tnodes if m in allowed[n]] if n in allowed else list(tnodes)
            loops = [a for a in s.alphabet if s.has_edge(n, a, n)]
            self.candidates[n] = [m for m in pool if all(t.graph.has_edge(m, a, m) for a in loops)]
        self.positions = 0

    # ── Position generation ─────────────────────────────────────────────────

    def domains(self) -> List[Tuple[str, ...]]:
        sizes = range(self.width + 1) if self.all_sizes else [self.width]
        out: List[Tuple[str, ...]] = []
        for size in sizes:
            out.extend(combinations(self.nodes, size))
        return out

    def supersets(self, kept: Tuple[str, ...]) -> Iterator[Tuple[str, ...]]:
        """Full-size domains containing ``kept``, as sorted tuples."""
        rest = [n for n in self.nodes if n not in kept]
        for extra in combinations(rest, self.width - len(kept)):
            yield tuple(sorted(kept + extra, key=self.rank.__getitem__))

    def partial_homs(self, domain: Sequence[str]) -> List[Tuple[str, ...]]:
        """Every homomorphism ``S[domain] → T`` as an image tuple, in sorted order."""
        found: List[Tuple[str, ...]] = []
        image: List[str] = []

        def extend(i: int) -> None:
            if i == len(domain):
                found.append(tuple(image))
                self.positions += 1
                if self.positions > self.settings.max_game_positions:
                    raise BudgetExceeded(
                        f"pebble game: more than {self.settings.max_game_positions} positions; "
                        "undecided by budget"
                    )
                return
            node = domain[i]
            for m in self.candidates[node]:
                ok = True
                for j in range(i):
                    other, img = domain[j], image[j]
                    for a in self.s.alphabet:
                        if self.s.has_edge(node, a, other) and not self.t.graph.has_edge(m, a, img):
                            ok = False
                            break
                        if self.s.has_edge(other, a, node) and not self.t.graph.has_edge(img, a, m):
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    image.append(m)
                    extend(i + 1)
                    image.pop()

        extend(0)
        return found

    # ── Fixpoint ────────────────────────────────────────────────────────────

    def solve(self) -> GameResult:
        domains = self.domains()
        alive: Dict[Tuple[str, ...], set] = {A: set(self.partial_homs(A)) for A in domains}
        order = list(domains) if self.schedule == "lex" else list(reversed(domains))
        refuted = self._refuted_by_overlap if self.all_sizes else self._refuted_by_kept_set
        rounds = 0
        changed = True
        while changed:
            changed = False
            rounds += 1
            # per-round cache; stale entries only over-approximate
            cache: Dict[tuple, FrozenSet[Tuple[str, ...]]] = {}
            for A in order:
                doomed = [h for h in sorted(alive[A]) if refuted(A, h, domains, alive, cache)]
                if doomed:
                    alive[A].difference_update(doomed)
                    changed = True
            logger.debug(
                "pebble round %d: %d positions alive", rounds, sum(len(x) for x in alive.values())
            )

        for A in domains:
            if not alive[A]:
                return GameResult(
                    Player.PLAYER1, blocking_set=A, positions_explored=self.positions
                )
        family: List[Position] = [
            (A, h) for A in domains if len(A) == self.width for h in sorted(alive[A])
        ]
        return GameResult(Player.PLAYER2, family=family, positions_explored=self.positions)

    def _support(self, kept, alive, cache) -> FrozenSet[Tuple[str, ...]]:
        """Images on ``kept`` that every full-size superset still extends."""
        if kept not in cache:
            common: Optional[set] = None
            for B in self.supersets(kept):
                idx = [B.index(n) for n in kept]
                projected = {tuple(g[i] for i in idx) for g in alive[B]}
                common = projected if common is None else common & projected
                if not common:
                    break
            cache[kept] = frozenset(common or ())
        return cache[kept]

    def _refuted_by_kept_set(self, A, h, domains, alive, cache) -> bool:
        for size in range(min(self.cfg.l, len(A)) + 1):
            for idx in combinations(range(len(A)), size):
                kept = tuple(A[i] for i in idx)
                if tuple(h[i] for i in idx) not in self._support(kept, alive, cache):
                    return True
        return False

    def _refuted_by_overlap(self, A, h, domains, alive, cache) -> bool:
        for B in domains:
            shared = tuple(n for n in A if n in B)
            if len(shared) > self.cfg.l:
                continue
            key = (B, shared)
            if key not in cache:
                idx = [B.index(n) for n in shared]
                cache[key] = frozenset(tuple(g[i] for i in idx) for g in alive[B])
            mine = tuple(h[A.index(n)] for n in shared)
            if mine not in cache[key]:
                return True
        return False


def pebble_solve(
    s: ViewInstance,
    t: Template,
    u: str,
    v: str,
    cfg: GameConfig,
    settings: Optional[Settings] = None,
    schedule: str = "lex",
    all_sizes: bool = False,
) -> GameResult:
    """
    Winner of the (l, k)-game on ``(s, u, v)`` against ``t``.

    When ``k`` covers the whole instance the game is the pinned homomorphism
    test and is decided by :func:`find_hom` directly. Either way a Player 2
    family holds the surviving positions of the largest domain size (here the
    full map); :meth:`GameResult.restrictions` closes it under restriction.
    """
    for node in (u, v):
        if node not in s.nodes:
            raise UnknownNode(f"{node!r} is not a node of the instance")
    allowed = t.allowed_for(u, v)
    if cfg.k >= len(s.nodes):
        h = find_hom(s.graph, t.graph, allowed=allowed)
        if h is None:
            return GameResult(Player.PLAYER1, blocking_set=tuple(s.graph.sorted_nodes()))
        domain = tuple(s.graph.sorted_nodes())
        return GameResult(Player.PLAYER2, family=[(domain, tuple(h[n] for n in domain))])
    return PebbleGame(s.graph, t, allowed, cfg, settings, schedule, all_sizes).solve()


def default_l(q: QuerySpec, v: ViewSpec, t: Template) -> int:
    """``|T| · N(V)``: an ``l`` for which the (l, l+1) rewriting is exact on path views."""
    return t.size * v.product.n_of_v


def rewrite_holds(
    s: ViewInstance, t: Template, l: int, u: str, v: str, settings: Optional[Settings] = None
) -> bool:
    """
    Whether Player 1 wins the (l, l+1)-game on ``(s, u, v)``.

    A full homomorphism is a Player 2 strategy, so the game is only played
    on pairs that are certain.
    """
    for node in (u, v):
        if node not in s.nodes:
            raise UnknownNode(f"{node!r} is not a node of the instance")
    cfg = GameConfig.for_rewriting(l)
    if find_hom(s.graph, t.graph, allowed=t.allowed_for(u, v)) is not None:
        return False
    if cfg.k >= len(s.nodes):
        return True
    return pebble_solve(s, t, u, v, cfg, settings).player1_wins


def rewrite_eval(
    s: ViewInstance, t: Template, l: int, settings: Optional[Settings] = None
) -> List[Pair]:
    """Pairs on which Player 1 wins the (l, l+1)-game, i.e. ``Q_{l,l+1}(S)``."""
    cfg = GameConfig.for_rewriting(l)
    if cfg.k >= len(s.nodes) and s.nodes:
        logger.warning(
            "l+1 = %d covers all %d instance nodes; the game is the homomorphism test",
            cfg.k, len(s.nodes),
        )
    nodes = s.graph.sorted_nodes()
    return [
        (x, y)
        for x in nodes
        for y in nodes
        if rewrite_holds(s, t, l, x, y, settings)
    ]


def minimal_l_for_word(
    word: Word, q: QuerySpec, v: ViewSpec, t: Template, max_l: int,
    settings: Optional[Settings] = None,
) -> Optional[int]:
    """
    Smallest ``l ≤ max_l`` for which ``Q_{l,l+1}`` returns every answer of
    ``Q(P_w)`` among the nodes of ``V(P_w)``; ``None`` if there is none.

    Extra answers cannot occur: a Player 1 win rules out every homomorphism,
    so the pair is certain and therefore an answer on a view image.
    """
    db = path_of_word(word, q.sigma)
    s = apply_view(db, v)
    expected = [p for p in rpq_eval(db, q) if p[0] in s.nodes and p[1] in s.nodes]
    for l in range(1, max_l + 1):
        cfg = GameConfig.for_rewriting(l)
        if all(pebble_solve(s, t, x, y, cfg, settings).player1_wins for x, y in expected):
            return l
    return None


def sweep_minimal_l(
    words: Iterable[Word], q: QuerySpec, v: ViewSpec, t: Template, max_l: int,
    settings: Optional[Settings] = None,
) -> pd.DataFrame:
    """
    One row per word: its length, whether the path endpoints are an answer,
    and the minimal sufficient ``l``. ``df["minimal_l"].max()`` is the
    smallest ``l`` exact on the whole corpus.
    """
    rows = []
    for word in words:
        db = path_of_word(word, q.sigma)
        rows.append({
            "word": format_word(word),
            "length": len(word),
            "endpoints_answer": path_endpoints(word) in set(rpq_eval(db, q)),
            "minimal_l": minimal_l_for_word(word, q, v, t, max_l, settings),
        })
    df = pd.DataFrame(rows, columns=["word", "length", "endpoints_answer", "minimal_l"])
    logger.info("minimal-l sweep over %d words", len(df))
    return df
