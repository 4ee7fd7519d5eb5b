"""Point-free combinator form and translation to/from arrow abstractions.

An arrow abstraction elaborates into a pipeline built from:

* ``Arr``      — lift a pure function on basis values,
* ``LiftLin``  — lift a vector-valued (amplitude-producing) function,
* ``Compose``  — sequential composition (left runs first),
* ``First``    — run a pipeline on the left half of a pair,
* ``Second`` / ``FanoutC`` — derived rewiring combinators,
* ``MeasC``    — computational-basis measurement,
* ``TrLC``     — partial trace of the left half,
* ``NamedSuper`` — a reference to a variable holding a superoperator.

Translation tracks the *binding context*: the ordered list of patterns
(with their types) bound so far by the abstraction head and command lets.
The context is passed along the pipeline as a left-nested tuple, so a
command let extends it with ``(context, new)`` — exactly the shape
``FanoutC`` produces, which keeps the clauses repacking-free.  Context
entries that the remainder of a command never mentions are dropped at
each let (pure rewiring, so the denotation is unchanged); without this
the context for a chain of n lets has dimension exponential in n.

``inverse_translate`` maps a pipeline back to an arrow abstraction; the
round trip is the identity up to the equational laws (and is checked
denotationally in the tests).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional

from .syntax import (App, ArrowAbs, CApp, CLet, Command, CUnit, free_vars,
                     Fst, Lam, Meas, Pair, Pattern, pattern_names,
                     pattern_term, PPair, Pos, ProdT, PVar, Snd, SuperT, Term,
                     TrL, TypeExpr, Var, pretty, pretty_pattern)

DeltaEntry = tuple[Pattern, TypeExpr]


class TranslationError(Exception):
    def __init__(self, message: str, pos: Optional[Pos] = None):
        self.message = message
        self.pos = pos
        super().__init__(message)


@dataclass(frozen=True)
class PureFun:
    """A function of the binding context: patterns plus a classical body."""
    delta: tuple[DeltaEntry, ...]
    body: Term

    def tuple_pattern(self) -> Pattern:
        pats = [p for p, _ in self.delta]
        return reduce(PPair, pats)

    def tuple_type(self) -> TypeExpr:
        return delta_tuple_type(self.delta)

    def as_lambda(self) -> Lam:
        return Lam(self.tuple_pattern(), self.body)


def delta_tuple_type(delta: tuple[DeltaEntry, ...]) -> TypeExpr:
    types = [t for _, t in delta]
    return reduce(ProdT, types)


def delta_tuple_term(delta: tuple[DeltaEntry, ...]) -> Term:
    terms = [pattern_term(p) for p, _ in delta]
    return reduce(Pair, terms)


@dataclass(frozen=True)
class ClassicExpr:
    in_type: TypeExpr = field(kw_only=True)
    out_type: TypeExpr = field(kw_only=True)


@dataclass(frozen=True)
class Arr(ClassicExpr):
    fn: PureFun


@dataclass(frozen=True)
class LiftLin(ClassicExpr):
    fn: PureFun


@dataclass(frozen=True)
class Compose(ClassicExpr):
    first_: ClassicExpr
    then_: ClassicExpr


@dataclass(frozen=True)
class First(ClassicExpr):
    inner: ClassicExpr
    passive: TypeExpr


@dataclass(frozen=True)
class Second(ClassicExpr):
    inner: ClassicExpr
    passive: TypeExpr


@dataclass(frozen=True)
class FanoutC(ClassicExpr):
    left_: ClassicExpr
    right_: ClassicExpr


@dataclass(frozen=True)
class MeasC(ClassicExpr):
    pass


@dataclass(frozen=True)
class TrLC(ClassicExpr):
    pass


@dataclass(frozen=True)
class NamedSuper(ClassicExpr):
    name: str


# --------------------------------------------------------------------------
# Translation (elaborated input required: type annotations must be present)


def translate_term(t: ArrowAbs) -> ClassicExpr:
    if t.type_ is None or not isinstance(t.type_, SuperT):
        raise TranslationError("arrow abstraction lacks its type; "
                               "typecheck before translating", t.pos)
    delta: tuple[DeltaEntry, ...] = ((t.pat, t.type_.arg),)
    return translate_command(delta, t.cmd)


def _arr_of(delta: tuple[DeltaEntry, ...], body: Term,
            out_type: TypeExpr) -> Arr:
    return Arr(PureFun(delta, body), in_type=delta_tuple_type(delta),
               out_type=out_type)


def _identity_arr(delta: tuple[DeltaEntry, ...]) -> Arr:
    dtt = delta_tuple_type(delta)
    return Arr(PureFun(delta, delta_tuple_term(delta)),
               in_type=dtt, out_type=dtt)


def _lift_fn_position(fn: Term) -> "tuple[str, Optional[ClassicExpr]]":
    """The function position of an arrow application must be a variable or
    an arrow abstraction literal."""
    if isinstance(fn, Var):
        return fn.name, None
    if isinstance(fn, ArrowAbs):
        return "", translate_term(fn)
    raise TranslationError(
        "the function of an arrow application must be a variable or an "
        "arrow abstraction", fn.pos)


def translate_command(delta: tuple[DeltaEntry, ...], cmd: Command) -> ClassicExpr:
    dtt = delta_tuple_type(delta)

    if isinstance(cmd, CUnit):
        if cmd.mode is None or cmd.content_type is None:
            raise TranslationError("command unit lacks elaboration data", cmd.pos)
        fn = PureFun(delta, cmd.content)
        if cmd.mode == "classical":
            return Arr(fn, in_type=dtt, out_type=cmd.content_type)
        return LiftLin(fn, in_type=dtt, out_type=cmd.content_type)

    if isinstance(cmd, Meas):
        if cmd.arg_type is None:
            raise TranslationError("measurement lacks elaboration data", cmd.pos)
        prep = _arr_of(delta, cmd.arg, cmd.arg_type)
        out_t = ProdT(cmd.arg_type, cmd.arg_type)
        step = MeasC(in_type=cmd.arg_type, out_type=out_t)
        return Compose(prep, step, in_type=dtt, out_type=out_t)

    if isinstance(cmd, TrL):
        if cmd.arg_type is None or not isinstance(cmd.arg_type, ProdT):
            raise TranslationError("left trace lacks elaboration data", cmd.pos)
        prep = _arr_of(delta, cmd.arg, cmd.arg_type)
        out_t = cmd.arg_type.right
        step = TrLC(in_type=cmd.arg_type, out_type=out_t)
        return Compose(prep, step, in_type=dtt, out_type=out_t)

    if isinstance(cmd, CApp):
        if cmd.fn_type is None or not isinstance(cmd.fn_type, SuperT):
            raise TranslationError("arrow application lacks elaboration data",
                                   cmd.pos)
        a, b = cmd.fn_type.arg, cmd.fn_type.res
        prep = _arr_of(delta, cmd.arg, a)
        name, lit = _lift_fn_position(cmd.fn)
        step = lit if lit is not None else NamedSuper(name, in_type=a, out_type=b)
        return Compose(prep, step, in_type=dtt, out_type=b)

    if isinstance(cmd, CLet):
        if cmd.bound_type is None:
            raise TranslationError("command let lacks elaboration data", cmd.pos)
        bound = translate_command(delta, cmd.bound)
        live = free_vars(cmd.body) - set(pattern_names(cmd.pat))
        kept = tuple(entry for entry in delta
                     if set(pattern_names(entry[0])) & live)
        if not kept:
            # nothing from the old context survives: plain sequencing
            body = translate_command(((cmd.pat, cmd.bound_type),), cmd.body)
            return Compose(bound, body, in_type=dtt, out_type=body.out_type)
        delta2 = kept + ((cmd.pat, cmd.bound_type),)
        body = translate_command(delta2, cmd.body)
        if kept == delta:
            keep: Arr = _identity_arr(delta)
        else:
            keep = _arr_of(delta, delta_tuple_term(kept), delta_tuple_type(kept))
        fan = FanoutC(keep, bound, in_type=dtt,
                      out_type=ProdT(keep.out_type, cmd.bound_type))
        return Compose(fan, body, in_type=dtt, out_type=body.out_type)

    raise TranslationError(f"cannot translate command {cmd!r}", cmd.pos)


# --------------------------------------------------------------------------
# Inverse translation: pipeline -> arrow abstraction


def inverse_translate(e: ClassicExpr) -> ArrowAbs:
    counter = itertools.count(1)

    def fresh(base: str) -> str:
        n = next(counter)
        return base if n == 1 else f"{base}{n}"

    def go(e: ClassicExpr) -> ArrowAbs:
        ty = SuperT(e.in_type, e.out_type)

        if isinstance(e, (Arr, LiftLin)):
            x = fresh("x")
            call = App(e.fn.as_lambda(), Var(x))
            return ArrowAbs(PVar(x), CUnit(call), type_=ty)

        if isinstance(e, Compose):
            x, w = fresh("x"), fresh("w")
            f, g = go(e.first_), go(e.then_)
            cmd = CLet(PVar(w), CApp(f, Var(x), fn_type=f.type_),
                       CApp(g, Var(w), fn_type=g.type_),
                       bound_type=e.first_.out_type)
            return ArrowAbs(PVar(x), cmd, type_=ty)

        if isinstance(e, First):
            z, x = fresh("z"), fresh("x")
            f = go(e.inner)
            cmd = CLet(PVar(x), CApp(f, Fst(Var(z)), fn_type=f.type_),
                       CUnit(Pair(Var(x), Snd(Var(z)))),
                       bound_type=e.inner.out_type)
            return ArrowAbs(PVar(z), cmd, type_=ty)

        if isinstance(e, Second):
            z, y = fresh("z"), fresh("y")
            f = go(e.inner)
            cmd = CLet(PVar(y), CApp(f, Snd(Var(z)), fn_type=f.type_),
                       CUnit(Pair(Fst(Var(z)), Var(y))),
                       bound_type=e.inner.out_type)
            return ArrowAbs(PVar(z), cmd, type_=ty)

        if isinstance(e, FanoutC):
            z, y = fresh("z"), fresh("y")
            if isinstance(e.left_, Arr):
                # pure left leg: compute it inside the unit instead of a
                # second binding, which keeps the re-translated context
                # one entry narrower
                g = go(e.right_)
                keep = App(e.left_.fn.as_lambda(), Var(z))
                cmd = CLet(PVar(y), CApp(g, Var(z), fn_type=g.type_),
                           CUnit(Pair(keep, Var(y))),
                           bound_type=e.right_.out_type)
                return ArrowAbs(PVar(z), cmd, type_=ty)
            x = fresh("x")
            f, g = go(e.left_), go(e.right_)
            cmd = CLet(PVar(x), CApp(f, Var(z), fn_type=f.type_),
                       CLet(PVar(y), CApp(g, Var(z), fn_type=g.type_),
                            CUnit(Pair(Var(x), Var(y))),
                            bound_type=e.right_.out_type),
                       bound_type=e.left_.out_type)
            return ArrowAbs(PVar(z), cmd, type_=ty)

        if isinstance(e, MeasC):
            z = fresh("z")
            return ArrowAbs(PVar(z), Meas(Var(z), arg_type=e.in_type), type_=ty)

        if isinstance(e, TrLC):
            z = fresh("z")
            assert isinstance(e.in_type, ProdT)
            return ArrowAbs(PVar(z), TrL(Var(z), arg_type=e.in_type), type_=ty)

        if isinstance(e, NamedSuper):
            x = fresh("x")
            return ArrowAbs(PVar(x), CApp(Var(e.name), Var(x), fn_type=ty),
                            type_=ty)

        raise TranslationError(f"cannot invert {e!r}")

    return go(e)


# --------------------------------------------------------------------------
# Rendering


def sexpr(e: ClassicExpr) -> str:
    if isinstance(e, Arr):
        return f"(arr {_fn_str(e.fn)})"
    if isinstance(e, LiftLin):
        return f"(lift {_fn_str(e.fn)})"
    if isinstance(e, Compose):
        return f"(>>> {sexpr(e.first_)} {sexpr(e.then_)})"
    if isinstance(e, First):
        return f"(first {sexpr(e.inner)})"
    if isinstance(e, Second):
        return f"(second {sexpr(e.inner)})"
    if isinstance(e, FanoutC):
        return f"(&&& {sexpr(e.left_)} {sexpr(e.right_)})"
    if isinstance(e, MeasC):
        return "meas"
    if isinstance(e, TrLC):
        return "trL"
    if isinstance(e, NamedSuper):
        return e.name
    raise TranslationError(f"cannot render {e!r}")


def _fn_str(fn: PureFun) -> str:
    return f"(\\{pretty_pattern(fn.tuple_pattern())}. {pretty(fn.body)})"


def classic_children(e: ClassicExpr) -> tuple[ClassicExpr, ...]:
    if isinstance(e, Compose):
        return (e.first_, e.then_)
    if isinstance(e, (First, Second)):
        return (e.inner,)
    if isinstance(e, FanoutC):
        return (e.left_, e.right_)
    return ()
