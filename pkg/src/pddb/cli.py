"""Command-line interface.

Subcommands::

    pddb check   FILE                   validate a program
    pddb eval    FILE [flags]           run to fixpoint, print derived atoms
    pddb query   FILE PATTERN [flags]   evaluate and match a goal pattern
    pddb prove   FILE GOAL [flags]      evaluate and print a proof tree
    pddb import  CSV --pred NAME        turn CSV rows into fact statements
    pddb selftest [flags]               compare closed forms against oracles

Exit codes: 0 success, 1 validation or user error, 2 strict-mode refusal
or non-convergence under --strict, 3 I/O error.

JSON output (``--json``) serializes numbers at full double precision;
the human-readable text output rounds to 6 significant decimals.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
from typing import Optional

from . import confidence as conf_mod
from .confidence import ConfidenceLevel, format_confidence
from .engine import (
    FixpointOptions,
    FixpointResult,
    StrictModeError,
    ValidationError,
    evaluate,
    query as engine_query,
)
from .lang import (
    Atom,
    Const,
    PProgram,
    PRule,
    atom_key,
    constants_of,
    validate,
)
from .modes import Mode, ModeError
from .oracle import ignorance_oracle, independence_oracle
from .parser import (
    ParseError,
    parse_program,
    parse_query,
    render_atom,
    render_term,
)
from .proof import GoalNode, ProofError, prove

EXIT_OK = 0
EXIT_USER = 1
EXIT_STRICT = 2
EXIT_IO = 3

IGN_TOLERANCE = 1e-6


def _span_of(rule: Optional[PRule]):
    if rule is not None and rule.span is not None:
        return rule.span.line, rule.span.column
    return 0, 0


def _print_diags(diags, program: Optional[PProgram]) -> None:
    for d in diags:
        rule = None
        if program is not None and d.rule_index is not None:
            rule = program.rules[d.rule_index]
        line, col = _span_of(rule)
        print(f"{d.severity} {d.code} {line}:{col} {d.message}",
              file=sys.stderr)


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _parse_edb_spec(spec: str):
    if "=" not in spec:
        raise ValueError(f"--edb expects pred=path, got {spec!r}")
    pred, path = spec.split("=", 1)
    return pred, path


def _csv_facts(path: str, pred: str, disj: Mode) -> list:
    """Rows ``arg1,..,argN,alpha,beta,gamma,delta`` as fact rules."""
    facts = []
    with open(path, newline="", encoding="utf-8") as fh:
        width = None
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) < 4:
                raise ValueError(f"row {row_no}: expected at least 4 columns")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ValueError(
                    f"row {row_no}: expected {width} columns, got {len(row)}")
            args = []
            for raw in row[:-4]:
                raw = raw.strip()
                if raw.lstrip("-").isdigit():
                    args.append(Const(int(raw)))
                elif "'" in raw:
                    raise ValueError(
                        f"row {row_no}: constant {raw!r} contains a quote")
                else:
                    args.append(Const(raw))
            try:
                nums = [float(x) for x in row[-4:]]
            except ValueError:
                raise ValueError(f"row {row_no}: malformed probability")
            if any(not 0.0 <= x <= 1.0 for x in nums):
                raise ValueError(f"row {row_no}: probability outside [0, 1]")
            a, b, g, d = nums
            level = ConfidenceLevel(a, b, g, d)
            if not conf_mod.is_consistent(level):
                raise ValueError(
                    f"row {row_no}: inconsistent confidence {level}")
            level = conf_mod.reduce(level)
            facts.append(PRule(Atom(pred, tuple(args)), (), level,
                               disj_mode=disj))
    return facts


def _load_program(path: str, edb_specs) -> PProgram:
    program = parse_program(_read_text(path))
    rules = list(program.rules)
    for spec in edb_specs or ():
        pred, csv_path = _parse_edb_spec(spec)
        rules.extend(_csv_facts(csv_path, pred, Mode.POSITIVE_CORRELATION))
    return PProgram(tuple(rules))


def _term_json(t):
    if isinstance(t, Const):
        return t.value
    return t.name


def _atom_json(atom: Atom) -> dict:
    return {"pred": atom.pred, "args": [_term_json(t) for t in atom.args]}


def _conf_json(c: ConfidenceLevel) -> dict:
    return {"belief": [c.belief_lo, c.belief_hi],
            "doubt": [c.doubt_lo, c.doubt_hi]}


def _herbrand_atoms(program: PProgram):
    """Every ground atom over the program's own constants (for --all)."""
    consts = sorted(constants_of(program), key=lambda v: (isinstance(v, str), v))
    terms = [Const(v) for v in consts]
    for pred, arity in sorted(program.predicates().items()):
        if len(terms) ** arity > 100_000:
            continue
        for combo in itertools.product(terms, repeat=arity):
            yield Atom(pred, combo)


# ---- subcommands -----------------------------------------------------


def cmd_check(args) -> int:
    try:
        text = _read_text(args.file)
    except OSError as exc:
        print(f"error IO 0:0 {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        program = parse_program(text)
    except ParseError as exc:
        print(f"error SYNTAX {exc.span.line}:{exc.span.column} {exc.message}",
              file=sys.stderr)
        return EXIT_USER
    diags = validate(program)
    _print_diags(diags, program)
    return EXIT_USER if any(d.is_error() for d in diags) else EXIT_OK


def _evaluate_for_cli(args):
    """Shared load+validate+evaluate path; returns (program, result).

    Parse, I/O and validation failures are reported on stderr and
    signalled by raising :class:`SystemExit` with the proper exit code.
    """
    try:
        program = _load_program(args.file, getattr(args, "edb", None))
    except OSError as exc:
        print(f"error IO 0:0 {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO)
    except ParseError as exc:
        print(f"error SYNTAX {exc.span.line}:{exc.span.column} {exc.message}",
              file=sys.stderr)
        raise SystemExit(EXIT_USER)
    except ValueError as exc:
        print(f"error {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USER)
    opts = FixpointOptions(max_iters=args.max_iters, eps=args.eps,
                           strict=args.strict)
    try:
        result = evaluate(program, opts)
    except StrictModeError as exc:
        _print_diags(exc.diagnostics, program)
        raise SystemExit(EXIT_STRICT)
    except (ValidationError, ModeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            _print_diags(exc.diagnostics, program)
        else:
            print(f"error {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USER)
    return program, result


def cmd_eval(args) -> int:
    try:
        program, result = _evaluate_for_cli(args)
    except SystemExit as exc:
        return int(exc.code)

    items = result.valuation.sorted_items()
    if args.all:
        derived = set(result.valuation.atoms())
        extra = [a for a in _herbrand_atoms(program) if a not in derived]
        items = sorted(
            list(items) + [(a, conf_mod.bottom(conf_mod.Order.TRUTH))
                           for a in extra],
            key=lambda kv: atom_key(kv[0]),
        )
    if args.json:
        payload = {
            "atoms": [dict(_atom_json(a), **_conf_json(c)) for a, c in items],
            "iterations": result.iterations,
            "status": result.status,
            "residual": result.residual,
        }
        print(json.dumps(payload))
    else:
        for atom, conf in items:
            print(f"{render_atom(atom)} {format_confidence(conf)}")
        print(f"% iterations={result.iterations} status={result.status} "
              f"residual={conf_mod.format_probability(result.residual)}")
    if args.strict and not result.exact:
        return EXIT_STRICT
    return EXIT_OK


def cmd_query(args) -> int:
    try:
        pattern = parse_query(args.pattern)
    except ParseError as exc:
        print(f"error SYNTAX {exc.span.line}:{exc.span.column} {exc.message}",
              file=sys.stderr)
        return EXIT_USER
    try:
        program, result = _evaluate_for_cli(args)
    except SystemExit as exc:
        return int(exc.code)

    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        answers = engine_query(result, pattern)
    if args.json:
        payload = {
            "answers": [
                {
                    "bindings": {k: _term_json(v) for k, v in theta.items()},
                    **_conf_json(conf),
                }
                for theta, conf in answers
            ]
        }
        print(json.dumps(payload))
    else:
        from .lang import apply_subst

        for theta, conf in answers:
            ground = apply_subst(pattern, theta)
            print(f"{render_atom(ground)} {format_confidence(conf)}")
    return EXIT_OK


def _tree_json(node) -> dict:
    if isinstance(node, GoalNode):
        from .proof import dpt_confidence

        return {
            "kind": "goal",
            "atom": _atom_json(node.atom),
            "mode": node.disj_mode.value,
            "confidence": _conf_json(dpt_confidence(node)),
            "children": [_tree_json(c) for c in node.children],
        }
    from .proof import dpt_confidence

    return {
        "kind": "rule",
        "rule_index": node.rule_index,
        "subst": {k.split("~", 1)[0]: _term_json(v)
                  for k, v in node.subst.items()},
        "mode": node.conj_mode.value,
        "confidence": _conf_json(dpt_confidence(node)),
        "children": [_tree_json(c) for c in node.children],
    }


def _print_tree(node, indent: int = 0) -> None:
    from .proof import dpt_confidence

    pad = "  " * indent
    if isinstance(node, GoalNode):
        conf = format_confidence(dpt_confidence(node))
        tag = "" if node.children else "  (failure)"
        print(f"{pad}goal {render_atom(node.atom)} {conf} "
              f"disj={node.disj_mode.value}{tag}")
    else:
        conf = format_confidence(dpt_confidence(node))
        subst = ", ".join(
            f"{k.split('~', 1)[0]}={render_term(v)}"
            for k, v in sorted(node.subst.items())
        )
        print(f"{pad}rule #{node.rule_index} {{{subst}}} {conf} "
              f"conj={node.conj_mode.value}")
    for child in node.children:
        _print_tree(child, indent + 1)


def cmd_prove(args) -> int:
    try:
        goal = parse_query(args.goal)
    except ParseError as exc:
        print(f"error SYNTAX {exc.span.line}:{exc.span.column} {exc.message}",
              file=sys.stderr)
        return EXIT_USER
    try:
        program, result = _evaluate_for_cli(args)
    except SystemExit as exc:
        return int(exc.code)
    try:
        proof = prove(program, goal, depth=args.depth, _result=result)
    except (ProofError, ModeError, ValueError) as exc:
        print(f"error {exc}", file=sys.stderr)
        return EXIT_USER

    if args.json:
        payload = {
            "goal": _atom_json(goal),
            "confidence": _conf_json(proof.confidence),
            "exact": proof.exact,
            "depth": proof.depth,
            "tree": _tree_json(proof.tree),
        }
        print(json.dumps(payload))
    else:
        _print_tree(proof.tree)
        print(f"% confidence={format_confidence(proof.confidence)} "
              f"exact={'true' if proof.exact else 'false'} depth={proof.depth}")
    return EXIT_OK


def cmd_import(args) -> int:
    try:
        disj = Mode(args.disj)
    except ValueError:
        print(f"error unknown mode {args.disj!r}", file=sys.stderr)
        return EXIT_USER
    try:
        facts = _csv_facts(args.file, args.pred, disj)
    except OSError as exc:
        print(f"error IO 0:0 {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error {exc}", file=sys.stderr)
        return EXIT_USER
    from .parser import render_rule

    for fact in facts:
        print(render_rule(fact))
    return EXIT_OK


def _sample_reduced(rng) -> ConfidenceLevel:
    a, b = sorted(rng.uniform(0.0, 1.0, 2))
    g = rng.uniform(0.0, 1.0) * (1.0 - b)
    d = rng.uniform(0.0, 1.0) * (1.0 - a)
    g, d = min(g, d), max(g, d)
    return ConfidenceLevel(a, b, g, d)


def run_selftest(pairs: int, grid_step: float, seed: int) -> dict:
    """Max deviation of the closed forms from the oracles on random pairs."""
    import numpy as np

    from .modes import conjoin, disjoin

    rng = np.random.default_rng(seed)
    dev = {"ign": {"conj": 0.0, "disj": 0.0}, "ind": {"conj": 0.0, "disj": 0.0}}
    for _ in range(pairs):
        c1 = _sample_reduced(rng)
        c2 = _sample_reduced(rng)
        for op, fn in (("conj", conjoin), ("disj", disjoin)):
            closed = fn(Mode.IGNORANCE, c1, c2)
            oracle = ignorance_oracle(op, c1, c2)
            dev["ign"][op] = max(dev["ign"][op], max(
                abs(x - y) for x, y in
                zip(closed.components, oracle.components)))
            closed = fn(Mode.INDEPENDENCE, c1, c2)
            oracle = independence_oracle(op, c1, c2, grid_step)
            dev["ind"][op] = max(dev["ind"][op], max(
                abs(x - y) for x, y in
                zip(closed.components, oracle.components)))
    ind_tol = 2.0 * grid_step
    ok = (dev["ign"]["conj"] <= IGN_TOLERANCE
          and dev["ign"]["disj"] <= IGN_TOLERANCE
          and dev["ind"]["conj"] <= ind_tol
          and dev["ind"]["disj"] <= ind_tol)
    return {
        "pairs": pairs,
        "grid_step": grid_step,
        "seed": seed,
        "ignorance": {"conj": dev["ign"]["conj"], "disj": dev["ign"]["disj"],
                      "tolerance": IGN_TOLERANCE},
        "independence": {"conj": dev["ind"]["conj"], "disj": dev["ind"]["disj"],
                         "tolerance": ind_tol},
        "ok": ok,
    }


def cmd_selftest(args) -> int:
    report = run_selftest(args.pairs, args.grid_step, args.seed)
    if args.json:
        print(json.dumps(report))
    else:
        for mode in ("ignorance", "independence"):
            entry = report[mode]
            print(f"{mode}: conj max dev {entry['conj']:.3g}, "
                  f"disj max dev {entry['disj']:.3g} "
                  f"(tolerance {entry['tolerance']:.3g})")
        print("ok" if report["ok"] else "FAILED")
    return EXIT_OK if report["ok"] else EXIT_USER


# ---- argument parsing --------------------------------------------------


def _add_eval_flags(sub) -> None:
    sub.add_argument("--max-iters", type=int, default=10_000, dest="max_iters")
    sub.add_argument("--eps", type=float, default=0.0)
    sub.add_argument("--strict", action="store_true")
    sub.add_argument("--json", action="store_true")
    sub.add_argument("--edb", action="append", metavar="PRED=CSV",
                     help="load extra facts for PRED from a CSV file")


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pddb",
        description="Deductive database with belief/doubt confidence levels",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a program file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("eval", help="evaluate a program to fixpoint")
    p.add_argument("file")
    _add_eval_flags(p)
    p.add_argument("--all", action="store_true",
                   help="include atoms at the false level")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("query", help="evaluate and match a pattern")
    p.add_argument("file")
    p.add_argument("pattern")
    _add_eval_flags(p)
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("prove", help="evaluate and print a proof tree")
    p.add_argument("file")
    p.add_argument("goal")
    _add_eval_flags(p)
    p.add_argument("--depth", type=int, default=None,
                   help="tree depth when the fixpoint is not exact")
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("import", help="turn CSV rows into fact statements")
    p.add_argument("file")
    p.add_argument("--pred", required=True)
    p.add_argument("--disj", default="pc",
                   help="disjunctive mode for the facts (default pc)")
    p.set_defaults(fn=cmd_import)

    p = sub.add_parser("selftest",
                       help="compare closed forms against the oracles")
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--grid-step", type=float, default=0.01, dest="grid_step")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_selftest)

    return ap


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
