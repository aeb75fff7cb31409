"""
Command-line interface.

Every command reads a spec file (``--spec``) or a built-in fixture
(``--fixture`` or ``viewrewrite fixture <name> <command> ...``) and writes
canonical text to stdout; diagnostics go to stderr. Exit codes: 0 success,
1 negative verdict, 2 usage or parse error, 3 budget exceeded.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .automata import enumerate_words, regex_to_text
from .cfpq import cert_cfpq, regularize_views
from .config import Settings, get_settings, set_settings
from .datalog import datalog_naive_eval, emit_datalog, parse_datalog
from .decision import (
    check_determinacy_bounded,
    check_monotone_pairs_bounded,
    check_monotone_words,
    decide_monotone_full,
)
from .errors import NotAViewImage, ParseError, ResourceLimit, ViewRewriteError
from .fixtures import get_fixture, reference_rewriting
from .graphs import parse_graph, serialize_graph
from .models import GameConfig, PreimageStatus
from .pebble import default_l, rewrite_eval, sweep_minimal_l
from .preimage import (
    default_node_bound,
    find_preimage,
    gen_3col,
    parse_undirected,
    preimage_size_ceiling,
    rewrite_via_preimage,
)
from .rpq import QuerySpec, SpecFile, ViewInstance, ViewSpec, apply_view, format_pairs, parse_spec, rpq_eval
from .template import (
    build_template,
    cert,
    cert_all,
    dump_template,
    materialize_counterexample,
    template_core,
    validate_template,
)

logger = logging.getLogger("viewrewrite")

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"
LOG_LEVEL_ENV = "VIEWREWRITE_LOG_LEVEL"

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


# ── Input helpers ────────────────────────────────────────────────────────────


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_spec(args: argparse.Namespace) -> SpecFile:
    if getattr(args, "fixture", None):
        return get_fixture(args.fixture).spec()
    if not getattr(args, "spec", None):
        raise ParseError("one of --spec or --fixture is required")
    return parse_spec(_read(args.spec))


def _views(spec: SpecFile) -> ViewSpec:
    if spec.views is None:
        raise ParseError("spec declares no views")
    return spec.views


def _query(spec: SpecFile) -> QuerySpec:
    if spec.query is None:
        raise ParseError("spec declares no query")
    return spec.query


def _instance(args: argparse.Namespace, spec: Optional[SpecFile]) -> ViewInstance:
    """The view instance from ``--instance``, or ``V(D)`` for ``--db``."""
    if getattr(args, "instance", None):
        tau = spec.views.tau if spec is not None and spec.views is not None else None
        return ViewInstance(parse_graph(_read(args.instance), tau))
    if getattr(args, "db", None):
        if spec is None:
            raise ParseError("--db needs a spec to apply the views")
        v = _views(spec)
        return apply_view(parse_graph(_read(args.db), v.sigma), v)
    raise ParseError("one of --instance or --db is required")


def _spec_text(v: ViewSpec, q: Optional[QuerySpec] = None) -> str:
    lines = ["alphabet " + " ".join(sorted(v.sigma))]
    lines += [f"view {name} = {regex_to_text(v.definitions[name])}" for name in v.tau]
    if q is not None:
        lines.append(f"query Q = {regex_to_text(q.regex)}")
    return "\n".join(lines) + "\n"


# ── Commands ─────────────────────────────────────────────────────────────────


def cmd_eval(args, settings: Settings) -> int:
    spec = _load_spec(args)
    q = _query(spec)
    db = parse_graph(_read(args.db), q.sigma)
    sys.stdout.write(format_pairs(rpq_eval(db, q)))
    return EXIT_OK


def cmd_apply_view(args, settings: Settings) -> int:
    spec = _load_spec(args)
    v = _views(spec)
    db = parse_graph(_read(args.db), v.sigma)
    sys.stdout.write(serialize_graph(apply_view(db, v, keep_all_nodes=args.all_nodes).graph))
    return EXIT_OK


def cmd_template(args, settings: Settings) -> int:
    spec = _load_spec(args)
    v = _views(spec)
    t = build_template(_query(spec), v, settings)
    problems = validate_template(t, v)
    for problem in problems:
        logger.error("template check: %s", problem)
    if args.core:
        t = template_core(t, settings)
    sys.stdout.write(dump_template(t))
    return EXIT_OK if not problems else EXIT_NEGATIVE


def cmd_cert(args, settings: Settings) -> int:
    spec = _load_spec(args)
    q, v = _query(spec), _views(spec)
    s = _instance(args, spec)
    t = build_template(q, v, settings)
    if args.pair is None:
        sys.stdout.write(format_pairs(cert_all(s, t)))
        return EXIT_OK
    u, w = args.pair
    verdict = cert(s, u, w, t)
    if verdict.certain:
        sys.stdout.write("certain true\n")
        return EXIT_OK
    db = materialize_counterexample(s, verdict.witness, t, q, v, pair=(u, w))
    sys.stdout.write("certain false\n--- counterexample\n" + serialize_graph(db))
    return EXIT_NEGATIVE


def cmd_rewrite_eval(args, settings: Settings) -> int:
    spec = _load_spec(args)
    q, v = _query(spec), _views(spec)
    s = _instance(args, spec)
    t = build_template(q, v, settings)
    if not args.no_core:
        t = template_core(t, settings)
    if args.l == "auto":
        l = default_l(q, v, t)
        logger.info("l = %d from a %d-node %s template", l, t.size, "full" if args.no_core else "cored")
        if l + 1 >= len(s.nodes):
            logger.warning(
                "l = %d reaches the instance size %d; evaluating the homomorphism test",
                l, len(s.nodes),
            )
    else:
        try:
            l = int(args.l)
            GameConfig.for_rewriting(l)
        except ValueError as exc:
            raise ParseError(f"--l expects a positive integer or 'auto', got {args.l!r}") from exc
    sys.stdout.write(format_pairs(rewrite_eval(s, t, l, settings)))
    return EXIT_OK


def cmd_emit_datalog(args, settings: Settings) -> int:
    spec = _load_spec(args)
    t = template_core(build_template(_query(spec), _views(spec), settings), settings)
    program = emit_datalog(t, GameConfig.for_rewriting(args.l), settings)
    _write(args.out, program.to_text())
    return EXIT_OK


def cmd_datalog_eval(args, settings: Settings) -> int:
    program = parse_datalog(_read(args.program))
    spec = _load_spec(args) if (args.spec or args.fixture) else None
    s = _instance(args, spec)
    sys.stdout.write(format_pairs(datalog_naive_eval(program, s, semi_naive=args.semi_naive)))
    return EXIT_OK


def cmd_decide_mondet(args, settings: Settings) -> int:
    spec = _load_spec(args)
    q, v = _query(spec), _views(spec)
    t = build_template(q, v, settings)
    if args.full:
        verdict = decide_monotone_full(q, v, t, budget=args.budget, settings=settings)
    else:
        verdict = check_monotone_words(q, v, t, args.max_len)
    sys.stdout.write(verdict.to_text())
    return EXIT_NEGATIVE if verdict.refuted else EXIT_OK


def cmd_check_det(args, settings: Settings) -> int:
    spec = _load_spec(args)
    q, v = _query(spec), _views(spec)
    check = check_monotone_pairs_bounded if args.monotone else check_determinacy_bounded
    verdict = check(q, v, args.max_nodes, settings)
    sys.stdout.write(verdict.to_text())
    return EXIT_NEGATIVE if verdict.refuted else EXIT_OK


def cmd_preimage(args, settings: Settings) -> int:
    spec = _load_spec(args)
    v = _views(spec)
    s = _instance(args, spec)
    if args.ceiling:
        report = preimage_size_ceiling(s, v)
        sys.stdout.write("".join(f"{k} {val}\n" for k, val in report.as_dict().items()))
        return EXIT_OK
    bound = args.max_nodes if args.max_nodes is not None else default_node_bound(s, settings)
    result = find_preimage(s, v, bound, settings)
    sys.stdout.write(f"status {result.status.value}\nchecked_bound {bound}\n")
    if result.status == PreimageStatus.FOUND:
        sys.stdout.write("--- D\n" + serialize_graph(result.database))
        return EXIT_OK
    return EXIT_NEGATIVE


def cmd_rewrite_preimage(args, settings: Settings) -> int:
    spec = _load_spec(args)
    s = _instance(args, spec)
    pairs = rewrite_via_preimage(s, _query(spec), _views(spec), args.max_nodes, settings)
    sys.stdout.write(format_pairs(pairs))
    return EXIT_OK


def cmd_gen_3col(args, settings: Settings) -> int:
    v, s = gen_3col(parse_undirected(_read(args.graph)))
    if args.spec_out or args.instance_out:
        _write(args.spec_out, _spec_text(v))
        _write(args.instance_out, serialize_graph(s.graph))
    else:
        sys.stdout.write(_spec_text(v) + "--- instance\n" + serialize_graph(s.graph))
    return EXIT_OK


def cmd_regularize_cfg(args, settings: Settings) -> int:
    spec = _load_spec(args)
    q = _query(spec)
    if not spec.cfg_views:
        raise ParseError("spec declares no cfgview blocks")
    if args.instance:
        s = ViewInstance(parse_graph(_read(args.instance), tuple(spec.cfg_views)))
        sys.stdout.write(format_pairs(cert_cfpq(s, q, spec.cfg_views, settings)))
        return EXIT_OK
    sys.stdout.write(_spec_text(regularize_views(q, spec.cfg_views, settings), q))
    return EXIT_OK


def cmd_sweep_l(args, settings: Settings) -> int:
    spec = _load_spec(args)
    q, v = _query(spec), _views(spec)
    t = template_core(build_template(q, v, settings), settings)
    words = enumerate_words(q.dfa, args.max_len)
    df = sweep_minimal_l(words, q, v, t, args.max_l, settings)
    sys.stdout.write(df.to_csv(index=False))
    return EXIT_OK


def cmd_fixture_show(args, settings: Settings) -> int:
    sys.stdout.write(get_fixture(args.fixture).spec_text())
    return EXIT_OK


def cmd_fixture_reference(args, settings: Settings) -> int:
    fixture = get_fixture(args.fixture)
    s = _instance(args, fixture.spec())
    sys.stdout.write(format_pairs(reference_rewriting(fixture, s)))
    return EXIT_OK


# ── Parser ───────────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="spec file (alphabet, views, query, cfgviews)")
    common.add_argument("--fixture", help="use a built-in fixture instead of --spec")
    common.add_argument("--threads", type=int, default=None, help="worker threads")
    common.add_argument(
        "--log-level", default=None, help=f"logging level (default ${LOG_LEVEL_ENV} or WARNING)"
    )

    source = argparse.ArgumentParser(add_help=False)
    group = source.add_mutually_exclusive_group()
    group.add_argument("--instance", help="view instance file over the view names")
    group.add_argument("--db", help="database file; its view image is used")

    parser = argparse.ArgumentParser(
        prog="viewrewrite", description="View-based rewriting of regular path queries."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help, parents=(common,)):
        p = sub.add_parser(name, parents=list(parents), help=help)
        p.set_defaults(handler=handler)
        return p

    p = command("eval", cmd_eval, "evaluate the query on a database")
    p.add_argument("--db", required=True)

    p = command("apply-view", cmd_apply_view, "materialize V(D)")
    p.add_argument("--db", required=True)
    p.add_argument("--all-nodes", action="store_true", help="keep nodes outside every view tuple")

    p = command("template", cmd_template, "dump the certain-answer template")
    p.add_argument("--core", action="store_true", help="reduce to a core first")

    p = command("cert", cmd_cert, "certain answers", (common, source))
    p.add_argument("--pair", nargs=2, metavar=("U", "V"), help="decide a single pair")

    p = command("rewrite-eval", cmd_rewrite_eval, "evaluate the (l, l+1)-game rewriting", (common, source))
    p.add_argument("--l", default="auto", help="pebbles carried over, or 'auto'")
    p.add_argument("--no-core", action="store_true", help="play against the uncored template")

    p = command("emit-datalog", cmd_emit_datalog, "emit the Datalog rewriting")
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--out", help="output path (default stdout)")

    p = command("datalog-eval", cmd_datalog_eval, "evaluate a Datalog program", (common, source))
    p.add_argument("--program", required=True)
    p.add_argument("--semi-naive", action="store_true")

    p = command("decide-mondet", cmd_decide_mondet, "monotone determinacy")
    p.add_argument("--max-len", type=int, default=8, help="longest query word tested")
    p.add_argument("--full", action="store_true", help="run the complete decision procedure")
    p.add_argument("--budget", type=int, default=None, help="state budget for --full")

    p = command("check-det", cmd_check_det, "bounded determinacy search")
    p.add_argument("--max-nodes", type=int, required=True)
    p.add_argument("--monotone", action="store_true", help="look for V(D) ⊆ V(D') with Q(D) ⊄ Q(D')")

    p = command("preimage", cmd_preimage, "search D with V(D) = S", (common, source))
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--ceiling", action="store_true", help="report size ceilings instead")

    p = command("rewrite-preimage", cmd_rewrite_preimage, "answer through a preimage", (common, source))
    p.add_argument("--max-nodes", type=int, default=None)

    p = command("gen-3col", cmd_gen_3col, "encode 3-colourability as a preimage instance")
    p.add_argument("--graph", required=True, help="undirected graph: 'node n' / 'edge u v' lines")
    p.add_argument("--spec-out")
    p.add_argument("--instance-out")

    p = command("regularize-cfg", cmd_regularize_cfg, "regularize cfgview blocks")
    p.add_argument("--instance", help="compute certain answers on this instance")

    p = command("sweep-l", cmd_sweep_l, "minimal l per query word, as CSV")
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--max-l", type=int, default=3)

    command("fixture-show", cmd_fixture_show, "print a fixture's spec")
    command("fixture-reference", cmd_fixture_reference, "evaluate a fixture's rewriting", (common, source))
    return parser


def _expand_fixture(argv: List[str]) -> List[str]:
    """``fixture <name> [<command> args...]`` → ``<command> args... --fixture <name>``."""
    if len(argv) < 2:
        raise ParseError("usage: fixture <name> [<command> ...]")
    name, rest = argv[1], argv[2:]
    if not rest or rest[0] == "show":
        return ["fixture-show", "--fixture", name] + rest[1:]
    if rest[0] == "reference":
        return ["fixture-reference", "--fixture", name] + rest[1:]
    return rest + ["--fixture", name]


def _configure_logging(level: Optional[str]) -> None:
    name = (level or os.getenv(LOG_LEVEL_ENV) or "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.WARNING), format=LOG_FORMAT, stream=sys.stderr, force=True
    )


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv[:1] == ["fixture"]:
            argv = _expand_fixture(argv)
        args = build_parser().parse_args(argv)
    except ParseError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_OK if not exc.code else EXIT_USAGE

    _configure_logging(args.log_level)
    settings = get_settings().with_overrides(threads=args.threads)
    set_settings(settings)
    try:
        return args.handler(args, settings)
    except NotAViewImage as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_NEGATIVE
    except ResourceLimit as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_BUDGET
    except (ViewRewriteError, OSError, ValueError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
