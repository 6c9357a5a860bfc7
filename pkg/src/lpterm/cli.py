"""Command-line front end.

    lpterm analyze PROGRAM.lp [--criterion both] [--format json] ...
    lpterm eval PROGRAM.lp FACTS.lp [budget flags]
    lpterm graph PROGRAM.lp OUT.dot

Exit codes for analyze: 0 some selected criterion proves boundedness, 1 every
selected criterion is definitively negative, 2 undecided (a cap was hit), 3
input error.  For eval: 0 fixpoint, 1 budget exceeded, 3 input error.
UNKNOWN is never folded into a negative verdict: the criteria are sufficient
conditions, so the tool must not claim non-termination.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import cycle_bounded as cb
from . import rule_bounded as rb
from .evaluator import EvalBudget, FactStore, fixpoint
from .graph import build_firing_graph, classify_bodies, scc_info
from .linsolve import c_ge, forall_reduction, group_by_variable, render_system
from .parser import ParseError, parse_ground_atoms, parse_program, render_atom
from .terms import Program

SCHEMA_VERSION = 1

EXIT_BOUNDED = 0
EXIT_NOT_BOUNDED = 1
EXIT_UNKNOWN = 2
EXIT_INPUT_ERROR = 3


def _alpha_json(alpha) -> dict[str, list[int]]:
    if alpha is None:
        return {}
    preds = sorted({v.pred for v in alpha})
    return {
        str(pred): [alpha[av] for av in sorted((a for a in alpha if a.pred == pred), key=lambda a: a.index)]
        for pred in preds
    }


def _fraction_json(value) -> str:
    return str(Fraction(value))


def _rule_bounded_json(result: rb.RuleBoundedResult) -> dict:
    sccs = []
    for v in result.sccs:
        entry: dict = {
            "component": v.component,
            "rules": [f"r{i}" for i in v.rules],
            "status": v.status,
        }
        if v.alpha is not None:
            entry["alpha"] = _alpha_json(v.alpha)
        if v.choice is not None:
            entry["choice"] = {f"r{rid}": pos for rid, pos in sorted(v.choice.items())}
        if v.reason:
            entry["reason"] = v.reason
        sccs.append(entry)
    return {"status": result.status, "sccs": sccs}


def _cycle_bounded_json(result: cb.CycleBoundedResult) -> dict:
    out: dict = {
        "status": result.status,
        "versions_checked": result.versions_checked,
        "paths_checked": result.paths_checked,
        "vacuous_paths": result.vacuous_paths,
    }
    if result.reason:
        out["reason"] = result.reason
    if result.diagnostics:
        out["diagnostics"] = list(result.diagnostics)
    if result.failure is not None:
        verdict = result.failure.verdict
        fail: dict = {
            "version_kept_atoms": [
                None if k is None else k for k in result.failure.version_kept
            ],
            "path": [list(e) for e in verdict.edges],
            "status": verdict.status,
            "w": [w.render() for w in verdict.w_exprs],
        }
        if verdict.fail_index is not None:
            fail["strict_component"] = verdict.fail_index
        if verdict.witness is not None:
            fail["witness"] = {
                str(k): _fraction_json(v) for k, v in sorted(verdict.witness.items(), key=lambda kv: str(kv[0]))
            }
            fail["witness_integral"] = verdict.witness_integral
        out["failure"] = fail
    return out


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        text = Path(args.program).read_text(encoding="utf-8")
        program = parse_program(text)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "program": args.program,
        "st_transform_applied": program.st_applied,
        "criteria": {},
    }
    timings: dict[str, float] = {}
    statuses: list[str] = []

    if args.criterion in ("rule", "both"):
        t0 = time.perf_counter()
        rule_result = rb.check_program_rule_bounded(program, max_choices=args.max_choices)
        timings["rule_bounded_ms"] = (time.perf_counter() - t0) * 1000
        report["criteria"]["rule_bounded"] = _rule_bounded_json(rule_result)
        statuses.append(rule_result.status)

    if args.criterion in ("cycle", "both"):
        t0 = time.perf_counter()
        cycle_result = cb.check_program_cycle_bounded(
            program,
            max_versions=args.max_linear_versions,
            max_paths=args.max_paths,
            vacuous_cycles=args.vacuous_cycles,
        )
        timings["cycle_bounded_ms"] = (time.perf_counter() - t0) * 1000
        report["criteria"]["cycle_bounded"] = _cycle_bounded_json(cycle_result)
        statuses.append(cycle_result.status)

    if not args.no_timings:
        report["timings_ms"] = {k: round(v, 3) for k, v in timings.items()}

    if args.dot:
        Path(args.dot).write_text(render_dot(program), encoding="utf-8")
    if args.dump_constraints:
        _dump_constraints(program, Path(args.dump_constraints))

    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        _print_text_report(report)

    proven = any(s in (rb.RULE_BOUNDED, cb.CYCLE_BOUNDED) for s in statuses)
    if proven:
        return EXIT_BOUNDED
    if any(s == "UNKNOWN" for s in statuses):
        return EXIT_UNKNOWN
    return EXIT_NOT_BOUNDED


def _print_text_report(report: dict) -> None:
    print(f"program: {report['program']}")
    print(f"st transform applied: {report['st_transform_applied']}")
    criteria = report["criteria"]
    if "rule_bounded" in criteria:
        entry = criteria["rule_bounded"]
        print(f"rule-bounded: {entry['status']}")
        for scc in entry["sccs"]:
            line = f"  scc {scc['component']} {{{', '.join(scc['rules'])}}}: {scc['status']}"
            if scc.get("alpha"):
                weights = "; ".join(f"{p} -> {v}" for p, v in scc["alpha"].items())
                line += f"  alpha: {weights}"
            if scc.get("reason"):
                line += f"  ({scc['reason']})"
            print(line)
    if "cycle_bounded" in criteria:
        entry = criteria["cycle_bounded"]
        print(
            f"cycle-bounded: {entry['status']}"
            f"  (versions: {entry['versions_checked']}, paths: {entry['paths_checked']})"
        )
        if entry.get("reason"):
            print(f"  reason: {entry['reason']}")
        if entry.get("failure"):
            fail = entry["failure"]
            print(f"  failing path: {fail['path']} [{fail['status']}]")
            print(f"  w = ({', '.join(fail['w'])})")
            if fail.get("witness"):
                pairs = ", ".join(f"{k}={v}" for k, v in fail["witness"].items())
                print(f"  witness: {pairs}")
        for diag in entry.get("diagnostics", []):
            print(f"  note: {diag}")
    if "timings_ms" in report:
        for k, v in report["timings_ms"].items():
            print(f"{k}: {v}")


def _dump_constraints(program: Program, directory: Path) -> None:
    """Write the per-SCC grouped systems and per-path systems as LP-like text."""
    directory.mkdir(parents=True, exist_ok=True)
    g = build_firing_graph(program)
    s = scc_info(g)
    classification = classify_bodies(program, g, s)
    for ci, comp in enumerate(s.components):
        if not s.nontrivial[ci]:
            continue
        relevant = [r for r in comp if classification[r].relevant]
        if any(not classification[r].srbody for r in relevant):
            continue
        choice = {r: min(classification[r].srbody) for r in relevant}
        system = rb.scc_constraint_system(program, classification, comp, choice)
        grouped = [group_by_variable(b) for b in system]
        lines = [g_.render() for g_ in grouped]
        reduction = [e for g_ in grouped for e in forall_reduction(g_)]
        text = (
            "% grouped inequalities (first srbody choice)\n"
            + "\n".join(lines)
            + "\n% alpha constraints\n"
            + render_system([c_ge(e) for e in reduction])
            + "\n"
        )
        (directory / f"rule_scc{ci}.txt").write_text(text, encoding="utf-8")

    result = cb.check_program_cycle_bounded(program)
    for i, (kept, verdict) in enumerate(result.bounded_paths):
        lines = [f"% path {list(verdict.edges)} (kept atoms {list(kept)})"]
        lines += [f"{x} = {e.render()}" for x, e in verdict.eq_pairs]
        lines += [f"% w{j + 1} = {w.render()}" for j, w in enumerate(verdict.w_exprs)]
        (directory / f"cycle_path{i}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def render_dot(program: Program) -> str:
    """DOT export of the firing graph with SCCs as clusters."""
    g = build_firing_graph(program)
    s = scc_info(g)
    lines = ["digraph firing_graph {", "  rankdir=LR;"]
    for ci, comp in enumerate(s.components):
        mark = "non-trivial" if s.nontrivial[ci] else "trivial"
        lines.append(f"  subgraph cluster_{ci} {{")
        lines.append(f'    label="scc {ci} ({mark})";')
        if s.nontrivial[ci]:
            lines.append("    style=bold;")
            lines.append('    color="red";')
        else:
            lines.append('    color="gray";')
        for rid in comp:
            head = program.rules[rid].head
            lines.append(f'    r{rid} [label="r{rid}: {head.sig}"];')
        lines.append("  }")
    for (src, dst) in sorted(g.edges):
        lines.append(f"  r{src} -> r{dst};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        program = parse_program(Path(args.program).read_text(encoding="utf-8"))
        facts = parse_ground_atoms(Path(args.facts).read_text(encoding="utf-8"))
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    budget = EvalBudget(
        max_iterations=args.max_iter,
        max_derived_atoms=args.max_atoms,
        max_ground_term_size=args.max_term_size,
        wall_clock_ms=args.timeout_ms,
    )
    outcome = fixpoint(program, FactStore(facts), budget)
    rendered = sorted(render_atom(a) for a in outcome.model)
    if args.format == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "status": outcome.status,
            "iterations": outcome.iterations,
            "atoms": len(outcome.model),
            "budget_hit": outcome.budget_hit,
            "model": rendered,
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        if outcome.reached_fixpoint:
            for line in rendered:
                print(line)
        else:
            print(
                f"budget exceeded ({outcome.budget_hit}) after {outcome.iterations}"
                f" iterations, {len(outcome.model)} atoms",
                file=sys.stderr,
            )
    return EXIT_BOUNDED if outcome.reached_fixpoint else EXIT_NOT_BOUNDED


def cmd_graph(args: argparse.Namespace) -> int:
    try:
        program = parse_program(Path(args.program).read_text(encoding="utf-8"))
        Path(args.out).write_text(render_dot(program), encoding="utf-8")
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpterm",
        description="Termination analysis for logic programs with function symbols",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run the boundedness criteria")
    analyze.add_argument("program")
    analyze.add_argument("--criterion", choices=("rule", "cycle", "both"), default="both")
    analyze.add_argument("--format", choices=("json", "text"), default="text")
    analyze.add_argument("--dump-constraints", metavar="DIR")
    analyze.add_argument("--dot", metavar="FILE")
    analyze.add_argument("--max-choices", type=int, default=rb.DEFAULT_MAX_CHOICES)
    analyze.add_argument("--max-paths", type=int, default=cb.DEFAULT_MAX_PATHS)
    analyze.add_argument("--max-linear-versions", type=int, default=cb.DEFAULT_MAX_VERSIONS)
    analyze.add_argument(
        "--vacuous-cycles", choices=(cb.VACUOUS_FAIL, cb.VACUOUS_BOUNDED), default=cb.VACUOUS_FAIL
    )
    analyze.add_argument("--no-timings", action="store_true")
    analyze.set_defaults(func=cmd_analyze)

    evaluate = sub.add_parser("eval", help="bottom-up evaluation to fixpoint")
    evaluate.add_argument("program")
    evaluate.add_argument("facts")
    evaluate.add_argument("--max-iter", type=int, default=10_000)
    evaluate.add_argument("--max-atoms", type=int, default=1_000_000)
    evaluate.add_argument("--max-term-size", type=int, default=10_000)
    evaluate.add_argument("--timeout-ms", type=int, default=30_000)
    evaluate.add_argument("--format", choices=("json", "text"), default="text")
    evaluate.set_defaults(func=cmd_eval)

    graph = sub.add_parser("graph", help="export the firing graph as DOT")
    graph.add_argument("program")
    graph.add_argument("out")
    graph.set_defaults(func=cmd_graph)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
