"""
Command-line front end: `tgalaxy COMMAND [flags] FILE`.

Exit codes: 0 when the command succeeds and every check passes, 2 when a
theorem-level check fails, 3 when the input (file, flags or presentation) is
invalid. FILE may be `-` for stdin.
"""
import argparse
import json
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

from tgalaxy.core.audit import CheckAudit
from tgalaxy.core.config import settings
from tgalaxy.core.errors import (
    ArrowOmegaRank,
    BoundTooSmall,
    HypothesisViolated,
    InvalidPresentation,
    NotArmIndexed,
    RankMismatch,
    RankOrder,
    TGalaxyError,
    UnknownNode,
)
from tgalaxy.core.schemas import SchemaRegistry
from tgalaxy.core.utils import atomic_write_json, digest_text, get_logger, setup_logging
from tgalaxy.galaxy import (
    classify,
    containment_check,
    dichotomy_check,
    escape_check,
    hyperbranch_check,
    order_partition,
    refinement_check,
    single_galaxy_propagation,
    witness_chain,
)
from tgalaxy.hyper.context import EnlargementContext
from tgalaxy.hyper.presentations import Standard
from tgalaxy.metric.oracle import oracle_crosscheck, settled_oracle
from tgalaxy.metric.search import geodesic, wdistance
from tgalaxy.ordinal import ExtRank, format_ordinal, nat_mul, omega_pow, parse_rank
from tgalaxy.reports.tables import render_table
from tgalaxy.sections.engine import SectionEngine, escape_presentation
from tgalaxy.sections.model import SectionRef
from tgalaxy.wgraph.presentation import WGraphPresentation, load_presentation
from tgalaxy.wgraph.unroll import unroll
from tgalaxy.wgraph.validate import Violation, ensure_valid, validate

logger = get_logger("cli")

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_INVALID = 3

THEOREMS = ("containment", "escape", "chain", "order", "adjacency", "hyperbranch",
            "refinement", "propagation", "all")
# numeric theorem ids accepted by `check --theorem`
THEOREM_IDS = {"3.2": "containment", "4.3": "escape", "5.1": "chain", "5.2": "order"}

_GREEN, _RED, _YELLOW, _RESET = "\033[32m", "\033[31m", "\033[33m", "\033[0m"
_GOOD = {"Yes", "pass", "verified"}
_BAD = {"No", "FAIL", "FAILED"}

Outcome = Tuple[str, Dict[str, Any], int]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _rank(text: str) -> ExtRank:
    try:
        return parse_rank(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _natural(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


# ---------------------------------------------------------------- input and output

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def _load(text: str) -> WGraphPresentation:
    if not text.lstrip().startswith("{"):
        raise InvalidPresentation([Violation("SchemaViolation", "$", "presentation document must be a JSON object")])
    return load_presentation(text)


def _marker(stream) -> Callable[[str], str]:
    if settings.COLOR == "never" or not stream.isatty():
        return str

    def mark(word: str) -> str:
        colour = _GREEN if word in _GOOD else _RED if word in _BAD else _YELLOW
        return f"{colour}{word}{_RESET}"

    return mark


def _emit(args, name: str, report: Dict[str, Any]):
    doc = SchemaRegistry().validate_report(f"report.{name}", report)
    if args.output:
        atomic_write_json(args.output, doc)
    if args.format == "json":
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        print(render_table(name, doc, _marker(sys.stdout)))


def _context(g: WGraphPresentation, args) -> EnlargementContext:
    ctx = EnlargementContext.from_graph(g)
    for item in getattr(args, "hypernode", None) or []:
        name, sep, text = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"--hypernode expects NAME=PRESENTATION, got {item!r}")
        ctx.add(name.strip(), text.strip())
    return ctx


def _section(engine: SectionEngine, rho: ExtRank, sid: str) -> SectionRef:
    for s in engine.wsections(rho):
        if s.id == sid:
            return s
    raise UnknownNode(f"no rank-{rho} section with id {sid}")


# ---------------------------------------------------------------- commands

def cmd_validate(args, g: WGraphPresentation) -> Outcome:
    violations = validate(g)
    report = {"rank": g.rank.to_json(), "valid": not violations, "violations": [v.to_json() for v in violations]}
    return "validate", report, EXIT_OK if not violations else EXIT_INVALID


def cmd_unroll(args, g) -> Outcome:
    return "unroll", unroll(g, args.depth).to_json(), EXIT_OK


def cmd_distance(args, g) -> Outcome:
    d = wdistance(g, args.source, args.target)
    report: Dict[str, Any] = {
        "source": args.source,
        "target": args.target,
        "distance": format_ordinal(d),
        "walk": geodesic(g, args.source, args.target).to_json(),
    }
    if not args.oracle:
        return "distance", report, EXIT_OK
    tips = settings.ORACLE_MAX_TIPS if args.max_tips is None else args.max_tips
    steps = settings.ORACLE_MAX_STEPS if args.max_steps is None else args.max_steps
    expected = settled_oracle(g, args.source, args.target, d, tips, steps, escalations=2)
    if expected is None:
        raise BoundTooSmall(f"oracle found no walk from {args.source} to {args.target} "
                            f"within {tips} tip crossings and {steps} branches")
    report["oracle"] = format_ordinal(expected)
    report["oracle_agrees"] = expected == d
    if expected != d:
        logger.warning("oracle disagrees on d(%s,%s): search %s, oracle %s",
                       args.source, args.target, report["distance"], report["oracle"])
    return "distance", report, EXIT_OK if expected == d else EXIT_CHECK_FAILED


def cmd_sections(args, g) -> Outcome:
    engine = SectionEngine.of(g)
    rows = []
    for s in engine.wsections(args.rank):
        row = s.to_json()
        if args.rank.is_finite and args.rank.k > 0:
            row["boundary"] = [str(w) for w in engine.boundary_wnodes(s)]
            if not s.is_family:
                row["locally_finite"] = engine.locally_rho_finite(s)
        rows.append(row)
    return "sections", {"rank": args.rank.to_json(), "sections": rows}, EXIT_OK


def cmd_boundary(args, g) -> Outcome:
    engine = SectionEngine.of(g)
    if args.section:
        chosen = [_section(engine, args.rank, args.section)]
    else:
        chosen = sorted(engine.wsections(args.rank), key=lambda s: s.id)
    rows = [{"section": s.id,
             "boundary_wnodes": [str(w) for w in engine.boundary_wnodes(s, args.copy)],
             "infinite": engine.has_infinite_boundary(s)} for s in chosen]
    report = {"rank": args.rank.to_json(), "copy_index": args.copy, "sections": rows}
    return "boundary", report, EXIT_OK


def cmd_locally_finite(args, g) -> Outcome:
    engine = SectionEngine.of(g)
    flags = {s.id: engine.locally_rho_finite(s) for s in engine.wsections(args.rank) if not s.is_family}
    return "locally-finite", {"rank": args.rank.to_json(), "sections": flags}, EXIT_OK


def cmd_escape_walk(args, g) -> Outcome:
    engine = SectionEngine.of(g)
    rho = args.rank
    x0 = g.resolve(args.source)
    if args.section:
        s = _section(engine, rho, args.section)
    else:
        carrying = [s for s in engine.wsections(rho) if not s.is_family and engine.carries(x0, s)]
        if not carrying:
            raise HypothesisViolated(f"{x0} lies in no rank-{rho} section")
        s = carrying[0]
    picks = engine.escape_walk(s, x0, args.count)
    unit = omega_pow(rho)
    report: Dict[str, Any] = {
        "rank": rho.to_json(),
        "section": s.id,
        "start": str(x0),
        "picks": [{"step": k, "wnode": str(w), "distance": format_ordinal(d),
                   "bound": format_ordinal(nat_mul(unit, k))} for k, (w, d) in enumerate(picks, start=1)],
    }
    if len(picks) >= 2:
        p = escape_presentation(g, picks)
        ctx = EnlargementContext(g, {"escape": p, Standard(x0).format(): Standard(x0)})
        part = classify(ctx, rho, jobs=args.jobs)
        report["presentation"] = p.format()
        report["outside_principal"] = not part.class_of("escape").principal
    return "escape-walk", report, EXIT_OK


def cmd_classify(args, g) -> Outcome:
    part = classify(_context(g, args), args.rank, jobs=args.jobs)
    return "classify", part.to_json(), EXIT_OK


def cmd_order(args, g) -> Outcome:
    ctx = _context(g, args)
    part = classify(ctx, args.rank, jobs=args.jobs)
    report = order_partition(part.context, part, jobs=args.jobs)
    return "order", report.to_json(), EXIT_OK if report.ok else EXIT_CHECK_FAILED


def cmd_witness_chain(args, g) -> Outcome:
    chain = witness_chain(_context(g, args), args.around, args.depth, args.rank, jobs=args.jobs)
    return "witness-chain", chain.to_json(), EXIT_OK if chain.ok else EXIT_CHECK_FAILED


def _run_check(theorem: str, args, g, ctx: EnlargementContext) -> Dict[str, Any]:
    rho = args.rank
    if theorem == "containment":
        details = containment_check(ctx, jobs=args.jobs)
    elif theorem == "escape":
        details = escape_check(ctx, rho, args.count, jobs=args.jobs)
    elif theorem == "chain":
        if args.around:
            details = witness_chain(ctx, args.around, args.depth, rho, jobs=args.jobs).to_json()
        else:
            details = dichotomy_check(ctx, rho, args.depth, jobs=args.jobs)
    elif theorem == "order":
        part = classify(ctx, rho, jobs=args.jobs)
        rep = order_partition(part.context, part, jobs=args.jobs)
        details = {**rep.to_json(), "ok": rep.ok}
    elif theorem == "adjacency":
        details = SectionEngine.of(g).adjacency_check(rho)
    elif theorem == "hyperbranch":
        details = hyperbranch_check(ctx, rho)
    elif theorem == "refinement":
        lower = [a for a in g.ranks() if a < rho]
        held = {str(a): refinement_check(ctx, a, rho, jobs=args.jobs) for a in lower}
        details = {"refines": held, "ok": all(held.values())}
    elif theorem == "propagation":
        details = {"ok": single_galaxy_propagation(ctx, rho, jobs=args.jobs)}
    else:
        raise UsageError(f"unknown theorem {theorem}")
    return {"check": theorem, "rank": rho.to_json(), "ok": bool(details["ok"]), "details": details}


_SKIPPABLE = (HypothesisViolated, RankMismatch, ArrowOmegaRank, NotArmIndexed, RankOrder)


def cmd_check(args, g, digest: str) -> Outcome:
    ctx = _context(g, args)
    audit = CheckAudit()
    requested = THEOREM_IDS.get(args.theorem, args.theorem)
    theorems = [t for t in THEOREMS if t != "all"] if requested == "all" else [requested]
    results = []
    for theorem in theorems:
        try:
            result = _run_check(theorem, args, g, ctx)
        except _SKIPPABLE as exc:
            if requested != "all":
                raise
            logger.info("check %s skipped at rank %s: %s", theorem, args.rank, exc)
            result = {"check": theorem, "rank": args.rank.to_json(), "ok": True, "details": {"skipped": str(exc)}}
        audit.log_check("check", digest, theorem, result["rank"], result["ok"], result["details"])
        results.append(result)
    ok = all(r["ok"] for r in results)
    return "check", {"digest": digest, "checks": results, "ok": ok}, EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_oracle_check(args, g, digest: str) -> Outcome:
    report = oracle_crosscheck(g, args.depth, max_tips=args.max_tips, max_steps=args.max_steps, pairs=args.pairs)
    CheckAudit().log_check("oracle-check", digest, "oracle", g.rank.to_json(), report["ok"],
                           {"pairs_checked": report["pairs_checked"], "mismatches": len(report["mismatches"])})
    return "oracle-check", report, EXIT_OK if report["ok"] else EXIT_CHECK_FAILED


COMMANDS: Dict[str, Callable] = {
    "validate": cmd_validate,
    "unroll": cmd_unroll,
    "distance": cmd_distance,
    "sections": cmd_sections,
    "boundary": cmd_boundary,
    "locally-finite": cmd_locally_finite,
    "escape-walk": cmd_escape_walk,
    "classify": cmd_classify,
    "order": cmd_order,
    "witness-chain": cmd_witness_chain,
}
AUDITED: Dict[str, Callable] = {"check": cmd_check, "oracle-check": cmd_oracle_check}


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("table", "json"), default="table")
    common.add_argument("--jobs", type=_positive, default=None, help="workers for verdict matrices")
    common.add_argument("--seed", type=int, default=None, help="seed for sampled pairs (TG_SEED)")
    common.add_argument("--output", default=None, help="also write the JSON report to this path")
    common.add_argument("--ray-unit", dest="ray_unit", type=_positive, default=None,
                        help="ray truncation unit for explicit unrollings (TG_RAY_UNIT)")
    common.add_argument("input", help="presentation file, or - for stdin")

    ranked = _Parser(add_help=False)
    ranked.add_argument("--rank", type=_rank, required=True)

    hyper = _Parser(add_help=False)
    hyper.add_argument("--hypernode", action="append", metavar="NAME=PRESENTATION",
                       help="extra presentation added to the document's hypernodes")

    parser = _Parser(prog="tgalaxy", description="Galaxies of finitely presented transfinite wgraphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="structural checks")
    p = sub.add_parser("unroll", parents=[common], help="explicit finite unrolling")
    p.add_argument("--depth", type=_positive, required=True)
    p = sub.add_parser("distance", parents=[common], help="wdistance between two nodes")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--oracle", action="store_true", help="cross-check against the brute-force oracle")
    p.add_argument("--max-tips", dest="max_tips", type=_natural, default=None,
                   help="oracle tip crossings (TG_ORACLE_MAX_TIPS)")
    p.add_argument("--max-steps", dest="max_steps", type=_natural, default=None,
                   help="oracle branch steps (TG_ORACLE_MAX_STEPS)")
    sub.add_parser("sections", parents=[common, ranked], help="rho-wsections")
    p = sub.add_parser("boundary", parents=[common, ranked], help="boundary wnodes of a section")
    p.add_argument("--section", default=None, help="one section id (default: every section)")
    p.add_argument("--copy", type=_natural, default=None)
    sub.add_parser("locally-finite", parents=[common, ranked], help="local rho-finiteness per section")
    p = sub.add_parser("escape-walk", parents=[common, ranked], help="boundary wnodes escaping to infinity")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--count", type=_natural, default=10)
    p.add_argument("--section", default=None)
    sub.add_parser("classify", parents=[common, ranked, hyper], help="rho-galaxy partition")
    sub.add_parser("order", parents=[common, ranked, hyper], help="closeness order of the galaxies")
    p = sub.add_parser("witness-chain", parents=[common, ranked, hyper], help="chain of galaxies around one")
    p.add_argument("--around", required=True)
    p.add_argument("--depth", type=_natural, default=2)
    p = sub.add_parser("check", parents=[common, ranked, hyper], help="theorem-level checks")
    p.add_argument("--theorem", choices=THEOREMS + tuple(THEOREM_IDS), default="all")
    p.add_argument("--around", default=None)
    p.add_argument("--depth", type=_natural, default=2)
    p.add_argument("--count", type=_natural, default=10)
    p = sub.add_parser("oracle-check", parents=[common], help="least-first search against brute force")
    p.add_argument("--depth", type=_positive, default=2)
    p.add_argument("--max-tips", dest="max_tips", type=_natural, default=None)
    p.add_argument("--max-steps", dest="max_steps", type=_natural, default=None)
    p.add_argument("--pairs", type=_natural, default=0, help="sample this many pairs (0: all)")
    p = sub.add_parser("schema", help="JSON schema of the presentation or of a report")
    p.add_argument("name", nargs="?", default=None)
    return parser


def _apply_flags(args):
    if getattr(args, "ray_unit", None) is not None:
        settings.RAY_UNIT = args.ray_unit
    if getattr(args, "seed", None) is not None:
        settings.SEED = args.seed


def _schema(args) -> int:
    registry = SchemaRegistry()
    if args.name is None:
        print("\n".join(registry.get_available_entities()))
        return EXIT_OK
    print(json.dumps(registry.get_schema(args.name), sort_keys=True, indent=2))
    return EXIT_OK


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    setup_logging("cli")
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(str(exc), EXIT_INVALID)
    _apply_flags(args)
    try:
        if args.command == "schema":
            return _schema(args)
        text = _read(args.input)
        g = _load(text)
        if args.command == "validate":
            name, report, code = cmd_validate(args, g)
        else:
            ensure_valid(g)
            if args.command in AUDITED:
                name, report, code = AUDITED[args.command](args, g, digest_text(text))
            else:
                name, report, code = COMMANDS[args.command](args, g)
    except InvalidPresentation as exc:
        lines = [f"invalid presentation: {len(exc.violations)} violation(s)"] + [f"  {v}" for v in exc.violations]
        return _fail("\n".join(lines), EXIT_INVALID)
    except (TGalaxyError, UsageError, ValueError, OSError) as exc:
        logger.info("%s failed: %s", args.command, exc)
        return _fail(f"{type(exc).__name__}: {exc}", EXIT_INVALID)
    _emit(args, name, report)
    logger.info("%s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
