"""Batch command-line interface.

Subcommands:

* ``check FILE``               — parse and typecheck; print ``name : type``
* ``run FILE NAME``            — evaluate a definition; superoperators take
                                 an input density (``--input`` ket or
                                 ``--density`` JSON file)
* ``normalize FILE TARGET``    — rewrite to normal form, print the trace
* ``prove FILE LHS RHS``       — decide equality of two definitions/terms
* ``emit FILE NAME``           — print the combinator pipeline of a
                                 definition (optionally its inverse)

Exit codes: 0 success; 1 the task failed (type error, unequal, translation
restriction); 2 bad input (missing file, parse error, wrong dimension);
3 indeterminate (fuel exhausted, unknown verdict).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from .classic import inverse_translate, sexpr, translate_term, TranslationError
from .evaluator import (BoolV, ClosureV, EvalError, eval_program, eval_term,
                        PairV, run_super, SuperV, VecV)
from .linalg import (dens_from_json, dens_to_json, dim, pure_density,
                     render_density, render_vector, vec_to_json)
from .parser import parse_program, parse_term, ParseError
from .rewriter import (NotEqual, ProvedByNormalization, ProvedSemantically,
                       prove_equal, render_trace, Rewriter, RewriteError,
                       trace_to_json, Unknown)
from .stdlib import load_prelude
from .syntax import ArrowAbs, pretty, Program, type_str
from .typecheck import elaborate_program, elaborate_term, TypeCheckError

OK, FAIL, BADINPUT, UNDECIDED = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        self.message = message
        self.code = code
        super().__init__(message)


# --------------------------------------------------------------------------
# Ket expressions: |010>, +, -, /sqrt2, parentheses


def parse_ket(s: str) -> np.ndarray:
    text = s.replace(" ", "")
    pos = 0

    def peek() -> str:
        return text[pos] if pos < len(text) else ""

    def fail(msg: str):
        raise CliError(f"bad ket expression: {msg}", BADINPUT)

    def atom() -> np.ndarray:
        nonlocal pos
        if peek() == "(":
            pos += 1
            v = expr()
            if peek() != ")":
                fail("missing ')'")
            pos += 1
            return v
        if peek() == "|":
            pos += 1
            start = pos
            while peek() and peek() in "01":
                pos += 1
            bits = text[start:pos]
            if not bits or peek() != ">":
                fail("expected |bits> with bits drawn from 0/1")
            pos += 1
            amp = np.zeros(2 ** len(bits), dtype=complex)
            amp[int(bits, 2)] = 1.0
            return amp
        fail(f"unexpected {peek()!r}" if peek() else "unexpected end")

    def term() -> np.ndarray:
        nonlocal pos
        v = atom()
        while peek() == "/":
            if text[pos:pos + 6] != "/sqrt2":
                fail("only /sqrt2 scaling is supported")
            pos += 6
            v = v / np.sqrt(2.0)
        return v

    def expr() -> np.ndarray:
        nonlocal pos
        neg = False
        if peek() == "-":
            pos += 1
            neg = True
        v = term()
        if neg:
            v = -v
        while peek() and peek() in "+-":
            op = text[pos]
            pos += 1
            w = term()
            if v.shape != w.shape:
                fail("mixed numbers of qubits")
            v = v + w if op == "+" else v - w
        return v

    v = expr()
    if pos != len(text):
        fail(f"trailing input {text[pos:]!r}")
    return v


# --------------------------------------------------------------------------
# Shared loading


def load_file(path: str, use_prelude: bool):
    if use_prelude:
        pre = load_prelude()
        gamma, env = dict(pre.types), dict(pre.env)
        defs = {d.name: d.term for d in pre.program.defs}
    else:
        gamma, env, defs = {}, {}, {}
    if path == "-":
        src = sys.stdin.read()
        name = "<stdin>"
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                src = fh.read()
        except OSError as e:
            raise CliError(f"cannot read {path}: {e.strerror}", BADINPUT)
        name = path
    try:
        prog = parse_program(src, name)
    except ParseError as e:
        raise CliError(str(e), BADINPUT)
    try:
        types, elaborated = elaborate_program(prog, gamma)
    except TypeCheckError as e:
        raise CliError(e.render(name), FAIL)
    gamma.update(types)
    env = eval_program(elaborated, env)
    defs.update({d.name: d.term for d in elaborated.defs})
    return elaborated, types, gamma, env, defs


def resolve_target(target: str, gamma: dict, defs: dict):
    """A target is a definition name or an inline term."""
    if target in defs:
        return defs[target]
    try:
        term = parse_term(target, "<arg>")
    except ParseError as e:
        raise CliError(str(e), BADINPUT)
    return term


# --------------------------------------------------------------------------
# Subcommands


def cmd_check(args) -> int:
    _, types, _, _, _ = load_file(args.file, not args.no_prelude)
    if args.json:
        out = {"defs": [{"name": n, "type": type_str(t)}
                        for n, t in types.items()]}
        print(json.dumps(out, sort_keys=True))
    else:
        for n, t in types.items():
            print(f"{n} : {type_str(t)}")
    return OK


def cmd_run(args) -> int:
    _, types, gamma, env, defs = load_file(args.file, not args.no_prelude)
    if args.name not in env:
        raise CliError(f"no definition named {args.name!r}", BADINPUT)
    value = env[args.name]

    if isinstance(value, SuperV):
        if args.input is not None:
            rho = pure_density(parse_ket(args.input))
        elif args.density is not None:
            try:
                with open(args.density, "r", encoding="utf-8") as fh:
                    rho = dens_from_json(json.load(fh))
            except (OSError, ValueError, KeyError) as e:
                raise CliError(f"cannot read density: {e}", BADINPUT)
        else:
            raise CliError("a superoperator needs --input KET or "
                           "--density FILE", BADINPUT)
        d = dim(value.val.in_type)
        if rho.shape != (d, d):
            raise CliError(
                f"input has dimension {rho.shape[0]}, but {args.name} "
                f"expects {d}", BADINPUT)
        out = run_super(value, rho)
        if args.json:
            print(json.dumps({"def": args.name,
                              "type": type_str(types.get(args.name)
                                               or gamma[args.name]),
                              "output": dens_to_json(out, value.val.out_type)},
                             sort_keys=True))
        else:
            print(render_density(out))
        return OK

    if args.input is not None or args.density is not None:
        raise CliError(f"{args.name} is not a superoperator; it takes no "
                       f"input", BADINPUT)
    if isinstance(value, VecV):
        if args.json:
            print(json.dumps({"def": args.name,
                              "value": vec_to_json(value.amp, value.elem_type)},
                             sort_keys=True))
        else:
            print(render_vector(value.amp))
        return OK
    if isinstance(value, (BoolV, PairV)):
        rendered = _value_str(value)
        if args.json:
            print(json.dumps({"def": args.name, "value": rendered},
                             sort_keys=True))
        else:
            print(rendered)
        return OK
    raise CliError(f"{args.name} evaluates to a function; apply it to "
                   f"arguments inside a program instead", BADINPUT)


def _value_str(v) -> str:
    if isinstance(v, BoolV):
        return "True" if v.value else "False"
    if isinstance(v, PairV):
        return f"({_value_str(v.left)}, {_value_str(v.right)})"
    return repr(v)


def cmd_normalize(args) -> int:
    _, _, gamma, env, defs = load_file(args.file, not args.no_prelude)
    term = resolve_target(args.target, gamma, defs)
    try:
        _, term = elaborate_term(gamma, term)
    except TypeCheckError as e:
        raise CliError(e.render(args.file), FAIL)
    rw = Rewriter(defs, args.fuel)
    trace = rw.normalize(term)
    if args.json:
        print(json.dumps(trace_to_json(trace), sort_keys=True))
    else:
        print(render_trace(trace))
    return OK if trace.complete else UNDECIDED


def cmd_prove(args) -> int:
    _, _, gamma, env, defs = load_file(args.file, not args.no_prelude)
    lhs = resolve_target(args.lhs, gamma, defs)
    rhs = resolve_target(args.rhs, gamma, defs)
    verdict = prove_equal(lhs, rhs, types=gamma, env=env, defs=defs,
                          fuel=args.fuel, tol=args.tolerance)
    if args.json:
        out = {"kind": verdict.kind, "detail": verdict.describe()}
        if isinstance(verdict, (ProvedByNormalization, ProvedSemantically)):
            out["left_trace"] = trace_to_json(verdict.left_trace)
            out["right_trace"] = trace_to_json(verdict.right_trace)
        if isinstance(verdict, NotEqual) and verdict.witness is not None:
            out["witness"] = dens_to_json(verdict.witness)
        print(json.dumps(out, sort_keys=True))
    else:
        print(verdict.describe())
        if isinstance(verdict, NotEqual) and verdict.witness is not None:
            print("witness density:")
            print(render_density(verdict.witness))
    if isinstance(verdict, (ProvedByNormalization, ProvedSemantically)):
        return OK
    if isinstance(verdict, NotEqual):
        return FAIL
    return UNDECIDED


def cmd_emit(args) -> int:
    _, _, gamma, env, defs = load_file(args.file, not args.no_prelude)
    term = resolve_target(args.name, gamma, defs)
    try:
        _, term = elaborate_term(gamma, term)
    except TypeCheckError as e:
        raise CliError(e.render(args.file), FAIL)
    if not isinstance(term, ArrowAbs):
        raise CliError(f"{args.name} is not an arrow abstraction", BADINPUT)
    try:
        pipe = translate_term(term)
    except TranslationError as e:
        raise CliError(f"translation failed: {e.message}", FAIL)
    inv = inverse_translate(pipe) if args.invert else None
    if args.json:
        out = {"pipeline": sexpr(pipe),
               "in_type": type_str(pipe.in_type),
               "out_type": type_str(pipe.out_type)}
        if inv is not None:
            out["inverse"] = pretty(inv)
        print(json.dumps(out, sort_keys=True))
    else:
        print(sexpr(pipe))
        if inv is not None:
            print(pretty(inv))
    return OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qarrow",
        description="Typed arrow-calculus language for quantum programs")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--no-prelude", action="store_true",
                       help="do not load the standard prelude")
        p.add_argument("--json", action="store_true",
                       help="machine-readable output")

    p = sub.add_parser("check", help="parse and typecheck a program")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("run", help="evaluate a definition")
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("--input", help="pure input state, e.g. "
                                   "'(|00>+|11>)/sqrt2'")
    p.add_argument("--density", help="JSON density file")
    common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("normalize", help="rewrite to normal form")
    p.add_argument("file")
    p.add_argument("target", help="definition name or inline term")
    p.add_argument("--fuel", type=int, default=10000)
    common(p)
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("prove", help="decide equality of two terms")
    p.add_argument("file")
    p.add_argument("lhs", help="definition name or inline term")
    p.add_argument("rhs", help="definition name or inline term")
    p.add_argument("--fuel", type=int, default=10000)
    p.add_argument("--tolerance", type=float, default=1e-9)
    common(p)
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("emit", help="print the combinator pipeline")
    p.add_argument("file")
    p.add_argument("name", help="definition name or inline term")
    p.add_argument("--invert", action="store_true",
                   help="also print the inverse translation")
    common(p)
    p.set_defaults(fn=cmd_emit)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as e:
        print(e.message, file=sys.stderr)
        return e.code
    except (ParseError, TypeCheckError) as e:
        print(str(e), file=sys.stderr)
        return FAIL
    except (EvalError, TranslationError, RewriteError) as e:
        print(str(e), file=sys.stderr)
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
