"""Command-line front end.

Exit codes: 0 decisive verdict, 2 unknown (budget), 3 precondition failure
or invalid certificate, 4 model error, 64 bad usage.
"""
from __future__ import annotations

import argparse
import json
import sys as _sys
import time
from pathlib import Path

from . import boundedness as bd
from .commutation import (Independence, decide_bounded_modulo, diamond_sufficient_check, fnf_word,
                          normalized_system, omega_empty_modulo)
from .core import Dfa, DRabin, ModelError, PreconditionError, ProductSystem, TraceboundError, UsageError
from .modelio import load_model
from .omega import LtlSyntaxError, format_ltl, is_coflat, ltl_to_dra, omega_language_empty, parse_ltl

SCHEMA = "tracebound.report/1"
EXIT_OK, EXIT_UNKNOWN, EXIT_PRECONDITION, EXIT_MODEL, EXIT_USAGE = 0, 2, 3, 4, 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(_sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((_jsonable(v) for v in x), key=repr)
    if isinstance(x, float):
        return "omega" if x == float("inf") else x
    return x


def emit_report(report: dict, fmt: str = "json") -> bytes:
    """Deterministic serialization: sorted keys, fixed indentation."""
    if fmt == "json":
        return (json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode()
    return (render_text(report) + "\n").encode()


def render_text(r: dict) -> str:
    lines = [f"{r['command']}: {r['verdict']}"]
    cert = r.get("certificate") or {}
    if "expression_text" in cert:
        lines.append(f"  expression: {cert['expression_text']}")
        tr = cert.get("transcript", {})
        lines.append(f"  inclusion: {'verified' if tr.get('included') else 'not verified'}"
                     f" ({tr.get('iterations', 0)} iterations, {tr.get('dfa_states', 0)} DFA states)")
    if "fork" in cert:
        f = cert["fork"]
        lines.append(f"  pivot: {f['pivot_text']}")
        lines.append(f"  stem: {bd.AcceleratedWord.from_json(f['stem'])}")
        lines.append(f"  a-branch: {bd.AcceleratedWord.from_json(f['a_branch'])}")
        lines.append(f"  b-branch: {' '.join(f['b_branch'])}")
        lines.append(f"  replay: {cert.get('replay')}")
    if "basis_text" in cert:
        lines.append(f"  cover basis ({'complete' if cert['complete'] else 'partial'}):")
        lines.extend(f"    {b}" for b in cert["basis_text"])
    if "fnf" in cert:
        lines.append("  " + " ".join(cert["fnf"]))
    if "failures" in cert:
        lines.extend(f"  ({a}, {b}): {why}" for a, b, why in cert["failures"])
    if "lasso" in cert:
        stem, loop = cert["lasso"]
        lines.append(f"  lasso: {' '.join(stem)} ({' '.join(loop)})^omega")
    if "reason" in cert:
        lines.append(f"  reason: {cert['reason']}")
    if "timings" in r:
        lines.append(f"  time: {r['timings']['seconds']:.3f}s")
    return "\n".join(lines)


# ---------------------------------------------------------------------------


def _load_independence(spec: str) -> Independence:
    if spec.startswith("fixture:"):
        name = spec[len("fixture:"):]
        if name != "abp":
            raise ModelError(f"unknown independence fixture {name!r}")
        from .fixtures import abp_independence

        return Independence(abp_independence())
    try:
        doc = json.loads(Path(spec).read_text())
    except OSError as exc:
        raise ModelError(f"cannot read independence {spec!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ModelError(f"{spec}: invalid JSON ({exc.msg})") from None
    pairs = doc.get("pairs") if isinstance(doc, dict) else doc
    if not isinstance(pairs, list) or not all(isinstance(p, list) and len(p) == 2 for p in pairs):
        raise ModelError("independence must be a list of letter pairs")
    return Independence(tuple(p) for p in pairs)


def _system(args):
    sys = load_model(args.model)
    if isinstance(sys, Dfa):
        raise ModelError("the model must be a counter system or an LCS, not an automaton")
    if getattr(args, "sync", None):
        dfa = load_model(args.sync)
        if not isinstance(dfa, Dfa):
            raise ModelError("--sync expects a DFA model")
        sys = ProductSystem(sys, dfa)
    return sys


def _fork_cert(sys, fork) -> dict:
    why = fork.check(sys)
    pumping = []
    for m in (1, 2, 3):
        counts = bd.find_concretization(sys, bd.pumping_word(fork, m))
        pumping.append({"m": m, "loop_counts": list(counts) if counts is not None else None})
    return {"fork": fork.to_json(sys), "replay": "ok" if why is None else why, "pumping": pumping}


def _verdict_cert(sys, v) -> tuple:
    if isinstance(v, bd.Bounded):
        return "bounded", {"expression": [list(w) for w in v.expr.words],
                           "expression_text": str(v.expr), "transcript": v.transcript}, EXIT_OK
    if isinstance(v, bd.Unbounded):
        return "unbounded", _fork_cert(sys, v.fork), EXIT_OK
    return "unknown", dict(v.report), EXIT_UNKNOWN


def cmd_bound(args, report):
    sys = _system(args)
    if args.independence:
        I = _load_independence(args.independence)
        v = decide_bounded_modulo(sys, I, node_budget=args.budget_nodes, expr_budget=args.budget_exprs)
        sys = normalized_system(sys, I)
    else:
        v = bd.decide_boundedness(sys, args.budget_nodes, args.budget_exprs)
    report["verdict"], report["certificate"], code = _verdict_cert(sys, v)
    return code


def cmd_cover(args, report):
    sys = _system(args)
    res = bd.clover(sys, args.budget_nodes)
    report["verdict"] = "partial" if res.partial else "complete"
    report["certificate"] = {"basis": [sys.config_to_json(c) for c in res.basis],
                             "basis_text": [sys.format_config(c) for c in res.basis],
                             "complete": not res.partial, "nodes": res.nodes}
    return EXIT_UNKNOWN if res.partial else EXIT_OK


def _emptiness(args, report, sys, dra):
    if args.independence:
        I = _load_independence(args.independence)
        r = omega_empty_modulo(sys, I, dra, args.closure_asserted, None, args.budget_nodes, args.budget_exprs,
                               detail=True)
    else:
        r = omega_language_empty(sys, dra, args.budget_nodes, args.budget_exprs, detail=True)
    if isinstance(r, bd.Unknown):
        return None, {"reason": r.report.get("reason", "budget exhausted"), "detail": r.report}
    if isinstance(r, tuple):
        r, stages = r
        cert = {"stages": [s for s in stages if s[0] != "lasso"]}
        for s in stages:
            if s[0] == "lasso":
                cert["lasso"] = [list(s[1][0]), list(s[1][1])]
        return r, cert
    return r, {}


def cmd_omega_empty(args, report):
    sys = _system(args)
    dra = load_model(args.rabin)
    if not isinstance(dra, DRabin):
        raise ModelError("--rabin expects a rabin model")
    empty, cert = _emptiness(args, report, sys, dra)
    report["certificate"] = cert
    if empty is None:
        report["verdict"] = "unknown"
        return EXIT_UNKNOWN
    report["verdict"] = "empty" if empty else "nonempty"
    return EXIT_OK


def cmd_ltl(args, report):
    sys = _system(args)
    phi = parse_ltl(args.formula)
    report["formula"] = format_ltl(phi)
    report["coflat_negation"] = is_coflat(("not", phi))
    dra = ltl_to_dra(("not", phi), sys.alphabet)
    holds, cert = _emptiness(args, report, sys, dra)
    cert["rabin_states"] = len(dra.states)
    report["certificate"] = cert
    if holds is None:
        report["verdict"] = "unknown"
        return EXIT_UNKNOWN
    report["verdict"] = "holds" if holds else "violated"
    return EXIT_OK


def cmd_fnf(args, report):
    I = _load_independence(args.independence)
    word = args.word.split()
    order = args.order.split() if args.order else sorted(set(word) | I.letters())
    missing = set(word) - set(order)
    if missing:
        raise UsageError(f"letters {sorted(missing)} missing from --order")
    report["verdict"] = "normalized"
    report["certificate"] = {"word": word, "fnf": list(fnf_word(word, I, order))}
    return EXIT_OK


def cmd_check_diamond(args, report):
    sys = _system(args)
    I = _load_independence(args.independence)
    ok, failures = diamond_sufficient_check(sys, I, detail=True)
    report["verdict"] = "diamond" if ok else "not-established"
    report["certificate"] = {"failures": [list(f) for f in failures]}
    return EXIT_OK if ok else EXIT_PRECONDITION


def cmd_verify(args, report):
    sys = _system(args)
    if args.independence:
        sys = normalized_system(sys, _load_independence(args.independence))
    try:
        doc = json.loads(Path(args.report).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read report {args.report!r}: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise ModelError(f"not a {SCHEMA} document")
    cert = doc.get("certificate") or {}
    kind = doc.get("verdict")
    report["checked"] = kind
    try:
        if kind == "unbounded":
            fork = bd.ForkWitness.from_json(sys, cert["fork"])
            why = fork.check(sys)
        elif kind == "bounded":
            expr = bd.BoundedExpression(tuple(tuple(w) for w in cert["expression"]))
            res = bd.check_trace_inclusion(sys, expr, detail=True)
            why = None if res.included else "a trace escapes the expression"
        else:
            raise UsageError(f"no certificate to verify for verdict {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        why = f"malformed certificate ({type(exc).__name__}: {exc})"
    report["verdict"] = "valid" if why is None else "invalid"
    report["certificate"] = {} if why is None else {"reason": why}
    return EXIT_OK if why is None else EXIT_PRECONDITION


COMMANDS = {
    "bound": cmd_bound,
    "cover": cmd_cover,
    "omega-empty": cmd_omega_empty,
    "ltl": cmd_ltl,
    "fnf": cmd_fnf,
    "check-diamond": cmd_check_diamond,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tracebound", description="Trace boundedness of well-structured systems.")
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the report as JSON")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings")
    common.add_argument("--budget-nodes", type=int, default=bd.DEFAULT_NODE_BUDGET)
    common.add_argument("--budget-exprs", type=int, default=bd.DEFAULT_EXPR_BUDGET)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model(sp, sync=True):
        sp.add_argument("--model", required=True, help="FILE or fixture:NAME[:k=v,...]")
        if sync:
            sp.add_argument("--sync", help="DFA model synchronized with the system")

    sp = sub.add_parser("bound", parents=[common], help="decide trace boundedness")
    model(sp)
    sp.add_argument("--independence", help="pairs file or fixture:abp; decides modulo I")
    sp = sub.add_parser("cover", parents=[common], help="compute the cover basis")
    model(sp)
    for name, extra in (("omega-empty", "--rabin"), ("ltl", "--formula")):
        sp = sub.add_parser(name, parents=[common])
        model(sp)
        sp.add_argument(extra, required=True)
        sp.add_argument("--independence")
        sp.add_argument("--closure-asserted", action="store_true",
                        help="the property is known closed under the independence relation")
    sp = sub.add_parser("fnf", parents=[common], help="Foata normal form of a word")
    sp.add_argument("--independence", required=True)
    sp.add_argument("--word", required=True, help="space separated letters")
    sp.add_argument("--order", help="space separated letter order")
    sp = sub.add_parser("check-diamond", parents=[common])
    model(sp)
    sp.add_argument("--independence", required=True)
    sp = sub.add_parser("verify", parents=[common], help="replay a report certificate")
    model(sp)
    sp.add_argument("--independence")
    sp.add_argument("--report", required=True)
    return p


def run_command(argv=None, out=None) -> int:
    out = out if out is not None else _sys.stdout
    args = build_parser().parse_args(argv)
    report = {"schema": SCHEMA, "command": args.command,
              "budgets": {"nodes": args.budget_nodes, "expressions": args.budget_exprs}}
    for key in ("model", "sync", "independence"):
        if getattr(args, key, None):
            report[key] = getattr(args, key)
    t0 = time.perf_counter()
    try:
        code = COMMANDS[args.command](args, report)
    except LtlSyntaxError as exc:
        print(f"tracebound: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        report["verdict"] = "precondition-failed"
        witness = exc.witness
        if isinstance(witness, bd.ForkWitness):
            witness = {"fork_pivot": str(witness.s), "stem": str(witness.stem)}
        report["certificate"] = {"reason": str(exc), "witness": _jsonable(witness)}
        code = EXIT_PRECONDITION
    except ModelError as exc:
        print(f"tracebound: model error: {exc}", file=_sys.stderr)
        return EXIT_MODEL
    except UsageError as exc:
        print(f"tracebound: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except TraceboundError as exc:
        print(f"tracebound: {exc}", file=_sys.stderr)
        return EXIT_MODEL
    if args.timings:
        report["timings"] = {"seconds": time.perf_counter() - t0}
    data = emit_report(report, "json" if args.json else "text")
    out.write(data.decode())
    out.flush()
    return code


def main(argv=None) -> int:
    return run_command(argv)
