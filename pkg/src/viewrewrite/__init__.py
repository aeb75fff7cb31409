"""
Viewrewrite: answering regular path queries from regular path views.

This package evaluates RPQs over edge-labeled graph databases, materializes
view images, and rewrites a query over views: certain answers through a CSP
template, the (l, l+1) pebble game and its Datalog program, preimage search,
and context-free views regularized against the query. It also decides
monotone determinacy by word characterization.
"""

from .models import (
    CeilingReport,
    CertVerdict,
    GameConfig,
    GameResult,
    Player,
    PreimageResult,
    PreimageStatus,
    Verdict,
    VerdictStatus,
)
from .config import Settings, get_settings, set_settings
from .errors import BudgetExceeded, ParseError, ResourceLimit, ViewRewriteError
from .graphs import GraphDb, Path, find_hom, is_hom, parse_graph, serialize_graph
from .automata import Dfa, parse_regex, to_min_dfa
from .rpq import QuerySpec, ViewInstance, ViewSpec, apply_view, parse_spec, path_of_word, rpq_eval, sim_classes
from .template import Template, build_template, cert, cert_all, materialize_counterexample, template_core
from .pebble import default_l, pebble_solve, rewrite_eval, rewrite_holds, sweep_minimal_l
from .datalog import DatalogProgram, datalog_naive_eval, emit_datalog, parse_datalog
from .decision import (
    check_determinacy_bounded,
    check_monotone_pairs_bounded,
    check_monotone_words,
    decide_monotone_full,
)
from .preimage import find_preimage, gen_3col, preimage_size_ceiling, rewrite_via_preimage
from .cfpq import Cfg, cert_cfpq, cfg_regular_nonempty, parse_cfg, regularize_view

__version__ = "0.1.0"

__all__ = [
    "CeilingReport",
    "CertVerdict",
    "GameConfig",
    "GameResult",
    "Player",
    "PreimageResult",
    "PreimageStatus",
    "Verdict",
    "VerdictStatus",
    "Settings",
    "get_settings",
    "set_settings",
    "BudgetExceeded",
    "ParseError",
    "ResourceLimit",
    "ViewRewriteError",
    "GraphDb",
    "Path",
    "find_hom",
    "is_hom",
    "parse_graph",
    "serialize_graph",
    "Dfa",
    "parse_regex",
    "to_min_dfa",
    "QuerySpec",
    "ViewInstance",
    "ViewSpec",
    "apply_view",
    "parse_spec",
    "path_of_word",
    "rpq_eval",
    "sim_classes",
    "Template",
    "build_template",
    "cert",
    "cert_all",
    "materialize_counterexample",
    "template_core",
    "default_l",
    "pebble_solve",
    "rewrite_eval",
    "rewrite_holds",
    "sweep_minimal_l",
    "DatalogProgram",
    "datalog_naive_eval",
    "emit_datalog",
    "parse_datalog",
    "check_determinacy_bounded",
    "check_monotone_pairs_bounded",
    "check_monotone_words",
    "decide_monotone_full",
    "find_preimage",
    "gen_3col",
    "preimage_size_ceiling",
    "rewrite_via_preimage",
    "Cfg",
    "cert_cfpq",
    "cfg_regular_nonempty",
    "parse_cfg",
    "regularize_view",
]
