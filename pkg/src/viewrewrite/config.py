"""
Runtime budgets and limits.

Every search in the package is bounded. Defaults keep each acceptance
workload well inside its time limit; any field can be overridden through an
environment variable named ``VIEWREWRITE_<FIELD>`` (upper case).
"""

import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Optional

logger = logging.getLogger(__name__)

ENV_PREFIX = "VIEWREWRITE_"


@dataclass(frozen=True)
class Settings:
    """Budgets shared by all engines."""

    max_hom_maps: int = 2_000_000  # exhaustive map scan in brute_hom
    max_enumerated_dbs: int = 200_000  # enumerate_dbs stream length
    max_game_positions: int = 2_000_000  # (A, h) pairs in the pebble game
    max_datalog_predicates: int = 50_000  # IDB predicates in emitted programs
    max_datalog_rules: int = 500_000  # rule candidates considered during emission
    max_emission_l: int = 2
    max_decision_states: int = 200_000  # lazy BadWords product states
    max_preimage_steps: int = 2_000_000  # backtracking nodes in preimage search
    preimage_word_cap: int = 5  # longest word laid on one V-minimal path
    max_brute_paths: int = 2_000_000  # path enumeration in brute_rpq_eval
    full_subset_limit: int = 16  # |S_Q| above which the template is refused
    core_search_limit: int = 24  # templates at most this large get a full core search
    derivation_cap: int = 20  # longest witness extracted from a grammar
    threads: int = 1

    @classmethod
    def from_env(cls) -> "Settings":
        """Build settings from defaults overridden by environment variables."""
        overrides = {}
        for f in fields(cls):
            raw = os.getenv(ENV_PREFIX + f.name.upper())
            if raw is None:
                continue
            try:
                overrides[f.name] = int(raw)
            except ValueError:
                logger.warning("ignoring non-integer %s%s=%r", ENV_PREFIX, f.name.upper(), raw)
        return cls(**overrides)

    def with_overrides(self, **changes) -> "Settings":
        """Return a copy with the given fields replaced (``None`` values ignored)."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Process-wide settings, read from the environment on first use."""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings


def set_settings(settings: Settings) -> None:
    """Replace the process-wide settings (used by the CLI)."""
    global _settings
    _settings = settings


def resolve(settings: Optional[Settings]) -> Settings:
    return settings if settings is not None else get_settings()
