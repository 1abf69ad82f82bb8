"""Command-line front end.

Every command prints a short human summary followed by a JSON report; with
``--quiet`` only the JSON is printed.  Exit codes: 0 the property holds or
the analysis succeeded, 1 a violation was found, 2 bad input or a
structural error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from . import diagfile, fixtures, search
from .algcore import (
    DEFAULT_TERM_BUDGET,
    all_congruences,
    find_maltsev_term,
    load_algebra,
    permutability_class,
)
from .diagrams import (
    AlgebraBackend,
    CubeDiagram,
    CuboidDiagram,
    Fork,
    SetBackend,
    SquareDiagram,
    check_cuboid,
    comparison_to_pullback,
    cube_comparison,
    is_exact_fork,
    is_regular_pushout,
    regular_pushout_relational,
    shape_of,
)
from .relcore import Carrier, PermutexError, ResourceError
from .relexpr import Environment, check_derivation, load_derivation

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2


class UsageError(PermutexError):
    pass


@dataclass
class Outcome:
    code: int
    human: list[str]
    report: dict


def _json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1, ensure_ascii=False)


def _algebra(arg: str):
    try:
        return load_algebra(fixtures.resolve("algebras", arg))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{arg}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _diagram(arg: str):
    try:
        return diagfile.load(fixtures.resolve("diagrams", arg))
    except diagfile.DiagramFormatError as exc:
        raise UsageError(f"{arg}: {exc}") from None


# ------------------------------------------------------------------ commands

def cmd_classify(args) -> Outcome:
    a = _algebra(args.algebra)
    rep = permutability_class(a)
    term: dict = {"budget": args.budget}
    try:
        res = find_maltsev_term(a, args.budget)
        term.update(status="found" if res.found else "absent", closure_size=res.closure_size)
        term_text = "maltsev term found" if res.found else "no maltsev term"
    except ResourceError:
        term["status"] = "unknown"
        term_text = f"maltsev term unknown (closure exceeded budget {args.budget})"
    report = {
        "command": "classify",
        "algebra": a.name,
        "size": a.size,
        "class": rep.cls.value,
        "witness": [str(t) for t in rep.witness] if rep.witness else None,
        "separating_pair": list(rep.separating_pair) if rep.separating_pair else None,
        "scope": rep.scope,
        "maltsev_term": term,
    }
    human = [f"{a.name}: {rep.cls.value}; {term_text}"]
    if rep.witness:
        human.append(f"  witness {rep.witness[0]} , {rep.witness[1]}; separating pair {rep.separating_pair}")
    human.append(f"  ({rep.scope})")
    return Outcome(EXIT_OK, human, report)


def cmd_congruences(args) -> Outcome:
    a = _algebra(args.algebra)
    cons = all_congruences(a, args.strategy)
    report = {
        "command": "congruences",
        "algebra": a.name,
        "count": len(cons),
        "congruences": [str(t) for t in cons],
        "labels": [list(t.labels) for t in cons],
    }
    human = [f"{a.name}: {len(cons)} congruences"] + [f"  {t}" for t in cons]
    return Outcome(EXIT_OK, human, report)


def cmd_maltsev_term(args) -> Outcome:
    a = _algebra(args.algebra)
    report = {"command": "maltsev-term", "algebra": a.name, "budget": args.budget}
    try:
        res = find_maltsev_term(a, args.budget)
    except ResourceError as exc:
        report["status"] = "unknown"
        return Outcome(EXIT_ERROR, [f"{a.name}: {exc}"], report)
    report.update(status="found" if res.found else "absent", closure_size=res.closure_size,
                  table=list(res.table) if res.table else None)
    text = "maltsev term found" if res.found else "no maltsev term"
    return Outcome(EXIT_OK if res.found else EXIT_VIOLATION,
                   [f"{a.name}: {text} (closure of {res.closure_size} ternary operations)"], report)


PROPERTY_SHAPES = {
    "regular-pushout": SquareDiagram,
    "cube": CubeDiagram,
    "cuboid": CuboidDiagram,
    "exact-fork": Fork,
}
DEFAULT_PROPERTY = {"square": "regular-pushout", "cube": "cube", "cuboid": "cuboid", "fork": "exact-fork"}


def check_diagram(b, diagram, prop: str) -> tuple[bool, dict]:
    """Evaluate ``prop``; returns (holds, details)."""
    if not isinstance(diagram, PROPERTY_SHAPES[prop]):
        raise UsageError(f"property {prop} needs a {PROPERTY_SHAPES[prop].__name__}, got a {shape_of(diagram)}")
    if prop == "regular-pushout":
        pairing, (P, p_d, p_a) = comparison_to_pullback(b, diagram)
        surj = is_regular_pushout(b, diagram)
        rel = regular_pushout_relational(b, diagram)
        hit = set(pairing.table)
        missing = [[p_d(e), p_a(e)] for e in range(b.carrier(P).size) if e not in hit]
        return surj, {"regular_pushout": surj, "relational": rel,
                      "missing_pullback_elements": missing, "highlight": [] if surj else ["g", "c"]}
    if prop == "cube":
        v, epi = cube_comparison(b, diagram)
        return epi, {"v_surjective": epi, "v": list(v.table), "highlight": [] if epi else ["v"]}
    if prop == "cuboid":
        rep = check_cuboid(b, diagram)
        ok = rep.verdict == "conforms"
        return ok, {**rep.to_dict(), "highlight": [] if ok else ["v", "t1", "t2"]}
    ok = is_exact_fork(b, diagram)
    return ok, {"exact": ok, "f_surjective": diagram.f.is_surjective(), "highlight": [] if ok else ["r1", "r2"]}


def cmd_check(args) -> Outcome:
    b, diagram = _diagram(args.diagram)
    shape = shape_of(diagram)
    prop = args.property or DEFAULT_PROPERTY[shape]
    ok, details = check_diagram(b, diagram, prop)
    report = {"command": "check", "diagram": str(args.diagram), "shape": shape, "property": prop,
              **details, "verdict": "holds" if ok else "violated"}
    human = [f"{args.diagram}: {prop} {'holds' if ok else 'VIOLATED'}"]
    human += [f"  {k}: {v}" for k, v in details.items() if k not in ("highlight", "verdict")]
    return Outcome(EXIT_OK if ok else EXIT_VIOLATION, human, report)


def _backend(args):
    if args.backend == "set":
        if args.algebras:
            raise UsageError("--backend set takes no algebra files")
        return SetBackend()
    if not args.algebras:
        raise UsageError("--backend algebra needs at least one algebra file")
    return AlgebraBackend.from_fixtures([_algebra(x) for x in args.algebras])


def cmd_sweep(args) -> Outcome:
    b = _backend(args)
    max_carrier = args.max_carrier
    if max_carrier is None:
        max_carrier = 3 if isinstance(b, SetBackend) else max(a.size for a in b.pool)
    bounds = search.SearchBounds(
        max_carrier=max_carrier,
        max_cases=args.cases if args.cases is not None else (1000 if args.mode == "random" else 1_000_000),
        seed=args.seed,
        mode=args.mode,
        variant=args.variant,
    )
    if args.permutation:
        target = _algebra(args.algebras[0]) if args.algebras else Carrier(max_carrier)
        rep = search.verify_permutation(b, target, bounds)
    else:
        rep = search.sweep(b, args.shape, bounds, first_hit=args.first_hit,
                           max_violations=args.max_violations)
    report = {"command": "sweep", **rep.to_dict()}
    human = [
        f"{rep.shape} sweep over {b.describe()['kind']} backend: {rep.verdict}",
        f"  cases checked {rep.cases_checked}, violations {report['violation_count']}"
        + (", truncated" if rep.truncated else "")
        + f", {rep.elapsed:.2f}s",
    ]
    if rep.violations and "diagram" in rep.violations[0]:
        out = Path(args.out)
        out.write_text(diagfile.render_json(rep.violations[0]["diagram"]) + "\n", encoding="utf-8")
        report["counterexample_file"] = str(out)
        human.append(f"  first violation (case {rep.violations[0]['index']}) written to {out}")
    if args.report:
        Path(args.report).write_text(_json(report) + "\n", encoding="utf-8")
    return Outcome(EXIT_VIOLATION if rep.violation_total or rep.violations else EXIT_OK, human, report)


def environment_of(b, diagram) -> Environment:
    objs = {k: b.carrier(v) for k, v in diagfile.diagram_objects(diagram).items()}
    return Environment({k: m.fn for k, m in diagram.morphisms().items()}, objs)


def cmd_replay(args) -> Outcome:
    try:
        deriv = load_derivation(fixtures.resolve("derivations", args.derivation))
    except json.JSONDecodeError as exc:  # pragma: no cover - derivations are not JSON
        raise UsageError(str(exc)) from None
    b, diagram = _diagram(args.env)
    rep = check_derivation(deriv, environment_of(b, diagram))
    first = rep.first_failure
    report = {"command": "replay", "derivation": deriv.name, "environment": str(args.env),
              **rep.to_dict(), "first_failure": first.index if first else None}
    human = [f"{deriv.name} on {args.env}: {'all steps hold' if rep.verdict else f'fails at step {first.index}'}"]
    for s in rep.steps:
        mark = "ok" if s.equal else f"FAIL, first differing cell {s.first_difference}"
        human.append(f"  [{s.index}] {s.lhs}  =  {s.rhs}   {mark}" + (f"   ({s.note})" if s.note else ""))
    return Outcome(EXIT_OK if rep.verdict else EXIT_VIOLATION, human, report)


def _highlight_from(report: dict) -> set[str]:
    if "highlight" in report:
        return set(report["highlight"])
    for v in report.get("violations", [])[:1]:
        return set(v.get("details", {}).get("highlight", []))
    return set()


def cmd_emit_dot(args) -> Outcome:
    b, diagram = _diagram(args.diagram)
    highlight = set(args.highlight or [])
    if args.report:
        try:
            highlight |= _highlight_from(json.loads(Path(args.report).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.report}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    roles = type(diagram).ROLES
    unknown = highlight - set(roles)
    if unknown:
        raise UsageError(f"unknown roles to highlight: {sorted(unknown)}")
    sys.stdout.write(diagfile.to_dot(b, diagram, frozenset(highlight)))
    return Outcome(EXIT_OK, [], {})


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="permutex", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help: str):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--quiet", action="store_true", help="print the JSON report only")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("classify", cmd_classify, "permutability class and Mal'tsev term of an algebra")
    sp.add_argument("algebra", help="algebra file or shipped fixture name")
    sp.add_argument("--budget", type=int, default=DEFAULT_TERM_BUDGET)

    sp = add("congruences", cmd_congruences, "list the congruence lattice")
    sp.add_argument("algebra")
    sp.add_argument("--strategy", choices=("auto", "partitions", "joins"), default="auto")

    sp = add("maltsev-term", cmd_maltsev_term, "search for a Mal'tsev term")
    sp.add_argument("algebra")
    sp.add_argument("--budget", type=int, default=DEFAULT_TERM_BUDGET)

    sp = add("check", cmd_check, "check a property of a diagram file")
    sp.add_argument("diagram")
    sp.add_argument("--property", choices=sorted(PROPERTY_SHAPES), default=None,
                    help="defaults to the natural property of the diagram's shape")

    sp = add("sweep", cmd_sweep, "exhaustive or random sweep for violations")
    sp.add_argument("--backend", choices=("set", "algebra"), default="set")
    sp.add_argument("algebras", nargs="*", help="algebra files for --backend algebra")
    sp.add_argument("--shape", choices=("square", "cube", "cuboid"), default="square")
    sp.add_argument("--max-carrier", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cases", type=int, default=None)
    sp.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    sp.add_argument("--variant", choices=("split", "regular"), default="split")
    sp.add_argument("--first-hit", action="store_true", help="stop at the first violation")
    sp.add_argument("--max-violations", type=int, default=20, help="violations kept inline in the report")
    sp.add_argument("--permutation", action="store_true",
                    help="check R_f R_g = R_g R_f over kernels instead of a diagram sweep")
    sp.add_argument("--out", default="counterexample.diag", help="where the first violation is written")
    sp.add_argument("--report", default=None, help="also write the JSON report here")

    sp = add("replay", cmd_replay, "replay a derivation chain on a diagram")
    sp.add_argument("derivation")
    sp.add_argument("--env", required=True, help="diagram file supplying the arrows")

    sp = add("emit-dot", cmd_emit_dot, "DOT rendering of a diagram")
    sp.add_argument("diagram")
    sp.add_argument("--report", default=None, help="check or sweep report whose highlights to apply")
    sp.add_argument("--highlight", nargs="*", default=None, help="roles to draw in red")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        out = args.fn(args)
    except (PermutexError, FileNotFoundError, ValueError, KeyError) as exc:
        msg = f"error: {exc}" if not isinstance(exc, FileNotFoundError) else f"error: no such file {exc}"
        report = {"command": args.command, "error": str(exc), "error_type": type(exc).__name__}
        if args.quiet:
            print(_json(report))
        else:
            print(msg, file=sys.stderr)
            print(_json(report))
        return EXIT_ERROR
    if args.command == "emit-dot":
        return out.code
    if not args.quiet:
        print("\n".join(out.human))
    print(_json(out.report))
    return out.code


if __name__ == "__main__":
    sys.exit(main())
