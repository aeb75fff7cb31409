"""
Core result models shared by the rewriting engines.
"""

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from .automata import Word, format_word
from .graphs import GraphDb, NodeMap, serialize_graph


class Player(Enum):
    """The two players of the existential pebble game."""

    PLAYER1 = "player1"  # spoiler: wins when no partial homomorphism survives
    PLAYER2 = "player2"  # duplicator: keeps a family of partial homomorphisms alive


class VerdictStatus(Enum):
    """Outcome of a (bounded) decision procedure."""

    REFUTED = "Refuted"  # counterexample found and re-verified
    NO_COUNTEREXAMPLE_UP_TO = "NoCounterexampleUpTo"  # bounded search came back empty
    HOLDS = "Holds"  # complete procedure proved the property


class PreimageStatus(Enum):
    """Outcome of a bounded preimage search."""

    FOUND = "Found"
    NOT_FOUND_WITHIN_BOUND = "NotFoundWithinBound"


@dataclass
class Verdict:
    """Result of a determinacy or monotone-determinacy check."""

    status: VerdictStatus
    bound: Optional[int] = None  # checked bound for NoCounterexampleUpTo
    evidence_word: Optional[Word] = None
    evidence_pair: Optional[Tuple[GraphDb, GraphDb]] = None
    note: str = ""  # proof note for Holds, search family otherwise

    @property
    def refuted(self) -> bool:
        return self.status == VerdictStatus.REFUTED

    def to_text(self) -> str:
        """Key/value rendering used by the CLI."""
        lines = [f"status {self.status.value}"]
        if self.evidence_word is not None:
            lines.append(f"evidence_word {format_word(self.evidence_word)}")
        if self.evidence_pair is not None:
            first, second = self.evidence_pair
            lines.append("evidence_pair")
            lines.append("--- D")
            lines.append(serialize_graph(first).rstrip("\n"))
            lines.append("--- D'")
            lines.append(serialize_graph(second).rstrip("\n"))
        if self.bound is not None:
            lines.append(f"checked_bound {self.bound}")
        if self.note:
            lines.append(f"note {self.note}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GameConfig:
    """Resources of the existential (l, k)-pebble game."""

    l: int  # pebbles carried over between rounds
    k: int  # largest set Player 1 may select

    def __post_init__(self) -> None:
        if not 1 <= self.l <= self.k:
            raise ValueError(f"game needs 1 <= l <= k, got l={self.l}, k={self.k}")

    @classmethod
    def for_rewriting(cls, l: int) -> "GameConfig":
        """The (l, l+1) game behind the Datalog rewriting."""
        return cls(l, l + 1)


Position = Tuple[Tuple[str, ...], Tuple[str, ...]]  # (sorted domain A, images h(A))


@dataclass
class GameResult:
    """Winner of a pebble game plus a certificate for that winner."""

    winner: Player
    family: List[Position] = field(default_factory=list)  # Player 2: surviving positions of the largest size
    blocking_set: Optional[Tuple[str, ...]] = None  # Player 1: a set with no survivor
    positions_explored: int = 0

    @property
    def player1_wins(self) -> bool:
        return self.winner == Player.PLAYER1

    def family_maps(self) -> List[NodeMap]:
        """Surviving positions as node maps."""
        return [dict(zip(domain, images)) for domain, images in self.family]

    def restrictions(self) -> List[Position]:
        """The family closed under restriction, sorted."""
        closed = set()
        for domain, images in self.family:
            for size in range(len(domain) + 1):
                for idx in combinations(range(len(domain)), size):
                    closed.add((tuple(domain[i] for i in idx), tuple(images[i] for i in idx)))
        return sorted(closed)


@dataclass
class CertVerdict:
    """Certain-answer decision for one pair; a witness homomorphism when not certain."""

    certain: bool
    witness: Optional[NodeMap] = None


@dataclass
class PreimageResult:
    """Outcome of a bounded search for ``D`` with ``V(D) = S``."""

    status: PreimageStatus
    database: Optional[GraphDb] = None
    bound: Optional[int] = None
    steps: int = 0

    @property
    def found(self) -> bool:
        return self.status == PreimageStatus.FOUND


@dataclass
class CeilingReport:
    """Size ceilings for preimages, as base-10 logarithms."""

    n_of_v: int
    instance_size: int
    log10_transition_functions: float  # N(V)^N(V)
    log10_path_bound: float  # |S|^2 * N(V)^N(V)
    log10_log10_ramsey_bound: float  # floor(e * c!) + 1 with c = N^N * 2^(N^N) colours

    def as_dict(self) -> Dict[str, float]:
        return {
            "n_of_v": self.n_of_v,
            "instance_size": self.instance_size,
            "log10_transition_functions": self.log10_transition_functions,
            "log10_path_bound": self.log10_path_bound,
            "log10_log10_ramsey_bound": self.log10_log10_ramsey_bound,
        }
