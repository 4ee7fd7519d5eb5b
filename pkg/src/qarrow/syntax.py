"""Abstract syntax for the arrow language.

The language has two syntactic sorts.  *Terms* are ordinary functional
expressions (booleans, pairs, lambdas, vector expressions).  *Commands* are
the effectful layer: applying a superoperator to an argument, embedding a
term, binding the result of a command, measurement, and partial trace.
Commands only occur underneath an arrow abstraction ``\\@x. <command>``.

This module defines the node types plus the purely syntactic operations on
them: free variables, capture-avoiding substitution, alpha equivalence and
pretty printing.  Every node carries an optional source position which is
ignored by equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional


class Pos(NamedTuple):
    line: int
    col: int


@dataclass(frozen=True)
class Node:
    pos: Optional[Pos] = field(default=None, kw_only=True, compare=False, repr=False)


# --------------------------------------------------------------------------
# Types


class TypeExpr(Node):
    """Base class for type expressions."""


@dataclass(frozen=True)
class BoolT(TypeExpr):
    pass


@dataclass(frozen=True)
class ProdT(TypeExpr):
    left: TypeExpr
    right: TypeExpr


@dataclass(frozen=True)
class FunT(TypeExpr):
    arg: TypeExpr
    res: TypeExpr


@dataclass(frozen=True)
class VecT(TypeExpr):
    elem: TypeExpr


@dataclass(frozen=True)
class DensT(TypeExpr):
    elem: TypeExpr


@dataclass(frozen=True)
class SuperT(TypeExpr):
    arg: TypeExpr
    res: TypeExpr


def lin_type(a: TypeExpr, b: TypeExpr) -> FunT:
    """A linear operator type is by definition a function into vectors."""
    return FunT(a, VecT(b))


def is_classical(t: TypeExpr) -> bool:
    """Classical types (finite index sets for bases): Bool and products of them."""
    if isinstance(t, BoolT):
        return True
    if isinstance(t, ProdT):
        return is_classical(t.left) and is_classical(t.right)
    return False


def type_str(t: TypeExpr) -> str:
    if isinstance(t, BoolT):
        return "Bool"
    if isinstance(t, ProdT):
        return f"({type_str(t.left)},{type_str(t.right)})"
    if isinstance(t, FunT):
        arg = type_str(t.arg)
        if isinstance(t.arg, (FunT, SuperT)):
            arg = f"({arg})"
        return f"{arg} -> {type_str(t.res)}"
    if isinstance(t, VecT):
        return f"Vec {_type_atom(t.elem)}"
    if isinstance(t, DensT):
        return f"Dens {_type_atom(t.elem)}"
    if isinstance(t, SuperT):
        return f"Super {_type_atom(t.arg)} {_type_atom(t.res)}"
    raise TypeError(f"not a printable type: {t!r}")


def _type_atom(t: TypeExpr) -> str:
    s = type_str(t)
    if isinstance(t, (BoolT, ProdT)):
        return s
    return f"({s})"


# --------------------------------------------------------------------------
# Patterns


class Pattern(Node):
    """A binder: a variable or a nested tuple of distinct variables."""


@dataclass(frozen=True)
class PVar(Pattern):
    name: str


@dataclass(frozen=True)
class PPair(Pattern):
    left: Pattern
    right: Pattern


def pattern_names(p: Pattern) -> tuple[str, ...]:
    if isinstance(p, PVar):
        return (p.name,)
    if isinstance(p, PPair):
        return pattern_names(p.left) + pattern_names(p.right)
    raise TypeError(f"not a pattern: {p!r}")


def pattern_term(p: Pattern) -> "Term":
    """The term spelled by a pattern: x or (x,y)."""
    if isinstance(p, PVar):
        return Var(p.name)
    return Pair(pattern_term(p.left), pattern_term(p.right))


# --------------------------------------------------------------------------
# Terms


class Term(Node):
    """Base class for terms."""


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class BoolLit(Term):
    value: bool


@dataclass(frozen=True)
class Pair(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Fst(Term):
    arg: Term


@dataclass(frozen=True)
class Snd(Term):
    arg: Term


@dataclass(frozen=True)
class Eq(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Lam(Term):
    pat: Pattern
    body: Term


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Let(Term):
    """Ordinary (sharing) let.  The checker rewrites vector-level binds
    into VecLet, so after elaboration a Let is always classical."""

    pat: Pattern
    bound: Term
    body: Term


@dataclass(frozen=True)
class If(Term):
    cond: Term
    then: Term
    orelse: Term


@dataclass(frozen=True)
class VecUnit(Term):
    """[M] at the term level: the singleton vector at a classical value."""

    content: Term


@dataclass(frozen=True)
class VecLet(Term):
    """Monadic bind at vector type; produced by the checker from Let."""

    pat: Pattern
    bound: Term
    body: Term
    type_: Optional[TypeExpr] = field(default=None, kw_only=True, compare=False, repr=False)


@dataclass(frozen=True)
class VecAdd(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class VecSub(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class VecScale(Term):
    scalar: complex
    arg: Term


@dataclass(frozen=True)
class MZero(Term):
    type_: Optional[TypeExpr] = field(default=None, kw_only=True, compare=False, repr=False)


@dataclass(frozen=True)
class ArrowAbs(Term):
    """\\@x. Q - abstraction of a command over its input."""

    pat: Pattern
    cmd: "Command"
    type_: Optional[TypeExpr] = field(default=None, kw_only=True, compare=False, repr=False)


# --------------------------------------------------------------------------
# Commands


class Command(Node):
    """Base class for commands."""


@dataclass(frozen=True)
class CApp(Command):
    """L @ M - apply a superoperator-valued term to an argument term."""

    fn: Term
    arg: Term
    fn_type: Optional[TypeExpr] = field(default=None, kw_only=True, compare=False, repr=False)


@dataclass(frozen=True)
class CUnit(Command):
    """[M] as a command.  ``mode`` records how the checker read it:
    'classical' embeds a classical value, 'vec' lifts a vector-valued term."""

    content: Term
    mode: Optional[str] = field(default=None, kw_only=True, compare=False, repr=False)
    content_type: Optional[TypeExpr] = field(default=None, kw_only=True, compare=False, repr=False)


@dataclass(frozen=True)
class CLet(Command):
    pat: Pattern
    bound: Command
    body: Command
    bound_type: Optional[TypeExpr] = field(default=None, kw_only=True, compare=False, repr=False)


@dataclass(frozen=True)
class Meas(Command):
    arg: Term
    arg_type: Optional[TypeExpr] = field(default=None, kw_only=True, compare=False, repr=False)


@dataclass(frozen=True)
class TrL(Command):
    arg: Term
    arg_type: Optional[TypeExpr] = field(default=None, kw_only=True, compare=False, repr=False)


# --------------------------------------------------------------------------
# Programs


@dataclass(frozen=True)
class Def(Node):
    name: str
    annot: Optional[TypeExpr]
    term: Term


@dataclass(frozen=True)
class Program(Node):
    defs: tuple[Def, ...]
    source_name: str = field(default="<input>", kw_only=True, compare=False)

    def lookup(self, name: str) -> Optional[Def]:
        for d in self.defs:
            if d.name == name:
                return d
        return None


# --------------------------------------------------------------------------
# Free variables

def free_vars(node) -> frozenset[str]:
    """Free variables of a term or command."""
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, (BoolLit, MZero)):
        return frozenset()
    if isinstance(node, (Lam, ArrowAbs)):
        body = node.body if isinstance(node, Lam) else node.cmd
        return free_vars(body) - set(pattern_names(node.pat))
    if isinstance(node, (Let, VecLet, CLet)):
        bound_fv = free_vars(node.bound)
        body_fv = free_vars(node.body) - set(pattern_names(node.pat))
        return bound_fv | body_fv
    if isinstance(node, Pair):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, (Eq, VecAdd, VecSub)):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, (Fst, Snd)):
        return free_vars(node.arg)
    if isinstance(node, App):
        return free_vars(node.fn) | free_vars(node.arg)
    if isinstance(node, If):
        return free_vars(node.cond) | free_vars(node.then) | free_vars(node.orelse)
    if isinstance(node, (VecUnit, CUnit)):
        return free_vars(node.content)
    if isinstance(node, VecScale):
        return free_vars(node.arg)
    if isinstance(node, CApp):
        return free_vars(node.fn) | free_vars(node.arg)
    if isinstance(node, (Meas, TrL)):
        return free_vars(node.arg)
    raise TypeError(f"free_vars: unexpected node {node!r}")


# --------------------------------------------------------------------------
# Substitution

def fresh_name(base: str, avoid) -> str:
    name = base
    while name in avoid:
        name = name + "'"
    return name


def _freshen_pattern(p: Pattern, avoid) -> tuple[Pattern, dict[str, "Term"]]:
    """Rename every variable of a pattern away from `avoid`; returns the new
    pattern and the renaming as a substitution map."""
    taken = set(avoid)
    mapping: dict[str, Term] = {}

    def go(q: Pattern) -> Pattern:
        if isinstance(q, PVar):
            new = fresh_name(q.name, taken)
            taken.add(new)
            if new != q.name:
                mapping[q.name] = Var(new)
            return PVar(new, pos=q.pos)
        return PPair(go(q.left), go(q.right), pos=q.pos)

    return go(p), mapping


def _subst_binder(pat, parts, sub):
    """Substitute under a binder, freshening the pattern if it would capture.

    `parts` is a tuple of subnodes in the binder's scope; returns
    (new_pattern, new_parts).
    """
    bound = set(pattern_names(pat))
    live = {k: v for k, v in sub.items() if k not in bound}
    live = {k: v for k, v in live.items()
            if any(k in free_vars(part) for part in parts)}
    if not live:
        return pat, parts
    captured = bound & set().union(*[free_vars(v) for v in live.values()])
    if captured:
        avoid = (bound | set(live) |
                 set().union(*[free_vars(v) for v in live.values()]) |
                 set().union(*[free_vars(part) for part in parts]))
        pat, renaming = _freshen_pattern(pat, avoid)
        parts = tuple(subst_map(part, renaming) for part in parts)
    return pat, tuple(subst_map(part, live) for part in parts)


def subst_map(node, sub: dict[str, Term]):
    """Capture-avoiding simultaneous substitution on a term or command."""
    if not sub:
        return node
    if isinstance(node, Var):
        return sub.get(node.name, node)
    if isinstance(node, (BoolLit, MZero)):
        return node
    if isinstance(node, Pair):
        return Pair(subst_map(node.left, sub), subst_map(node.right, sub), pos=node.pos)
    if isinstance(node, Fst):
        return Fst(subst_map(node.arg, sub), pos=node.pos)
    if isinstance(node, Snd):
        return Snd(subst_map(node.arg, sub), pos=node.pos)
    if isinstance(node, Eq):
        return Eq(subst_map(node.left, sub), subst_map(node.right, sub), pos=node.pos)
    if isinstance(node, Lam):
        pat, (body,) = _subst_binder(node.pat, (node.body,), sub)
        return Lam(pat, body, pos=node.pos)
    if isinstance(node, App):
        return App(subst_map(node.fn, sub), subst_map(node.arg, sub), pos=node.pos)
    if isinstance(node, Let):
        bound = subst_map(node.bound, sub)
        pat, (body,) = _subst_binder(node.pat, (node.body,), sub)
        return Let(pat, bound, body, pos=node.pos)
    if isinstance(node, If):
        return If(subst_map(node.cond, sub), subst_map(node.then, sub),
                  subst_map(node.orelse, sub), pos=node.pos)
    if isinstance(node, VecUnit):
        return VecUnit(subst_map(node.content, sub), pos=node.pos)
    if isinstance(node, VecLet):
        bound = subst_map(node.bound, sub)
        pat, (body,) = _subst_binder(node.pat, (node.body,), sub)
        return VecLet(pat, bound, body, pos=node.pos, type_=node.type_)
    if isinstance(node, VecAdd):
        return VecAdd(subst_map(node.left, sub), subst_map(node.right, sub), pos=node.pos)
    if isinstance(node, VecSub):
        return VecSub(subst_map(node.left, sub), subst_map(node.right, sub), pos=node.pos)
    if isinstance(node, VecScale):
        return VecScale(node.scalar, subst_map(node.arg, sub), pos=node.pos)
    if isinstance(node, ArrowAbs):
        pat, (cmd,) = _subst_binder(node.pat, (node.cmd,), sub)
        return ArrowAbs(pat, cmd, pos=node.pos, type_=node.type_)
    if isinstance(node, CApp):
        return CApp(subst_map(node.fn, sub), subst_map(node.arg, sub),
                    pos=node.pos, fn_type=node.fn_type)
    if isinstance(node, CUnit):
        return CUnit(subst_map(node.content, sub), pos=node.pos,
                     mode=node.mode, content_type=node.content_type)
    if isinstance(node, CLet):
        bound = subst_map(node.bound, sub)
        pat, (body,) = _subst_binder(node.pat, (node.body,), sub)
        return CLet(pat, bound, body, pos=node.pos, bound_type=node.bound_type)
    if isinstance(node, Meas):
        return Meas(subst_map(node.arg, sub), pos=node.pos, arg_type=node.arg_type)
    if isinstance(node, TrL):
        return TrL(subst_map(node.arg, sub), pos=node.pos, arg_type=node.arg_type)
    raise TypeError(f"subst: unexpected node {node!r}")


def subst_term(m: Term, x: str, n: Term) -> Term:
    return subst_map(m, {x: n})


def subst_command(q: Command, x: str, n: Term) -> Command:
    return subst_map(q, {x: n})


def pattern_subst(pat: Pattern, value: Term) -> dict[str, Term]:
    """Bind each pattern variable to the matching projection of `value`."""
    if isinstance(pat, PVar):
        return {pat.name: value}
    out = pattern_subst(pat.left, Fst(value))
    out.update(pattern_subst(pat.right, Snd(value)))
    return out


# --------------------------------------------------------------------------
# Alpha equivalence

def alpha_eq(a, b) -> bool:
    return _alpha(a, b, {}, {}, [0])


def _alpha_pattern(p, q, env_a, env_b, counter) -> bool:
    if isinstance(p, PVar) and isinstance(q, PVar):
        idx = counter[0]
        counter[0] += 1
        env_a[p.name] = idx
        env_b[q.name] = idx
        return True
    if isinstance(p, PPair) and isinstance(q, PPair):
        return (_alpha_pattern(p.left, q.left, env_a, env_b, counter)
                and _alpha_pattern(p.right, q.right, env_a, env_b, counter))
    return False


def _alpha(a, b, env_a, env_b, counter) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        ra, rb = env_a.get(a.name, a.name), env_b.get(b.name, b.name)
        return ra == rb
    if isinstance(a, BoolLit):
        return a.value == b.value
    if isinstance(a, MZero):
        return True
    if isinstance(a, (Pair, Eq, VecAdd, VecSub)):
        return (_alpha(a.left, b.left, env_a, env_b, counter)
                and _alpha(a.right, b.right, env_a, env_b, counter))
    if isinstance(a, (Fst, Snd, Meas, TrL)):
        return _alpha(a.arg, b.arg, env_a, env_b, counter)
    if isinstance(a, VecScale):
        return a.scalar == b.scalar and _alpha(a.arg, b.arg, env_a, env_b, counter)
    if isinstance(a, (VecUnit, CUnit)):
        return _alpha(a.content, b.content, env_a, env_b, counter)
    if isinstance(a, App):
        return (_alpha(a.fn, b.fn, env_a, env_b, counter)
                and _alpha(a.arg, b.arg, env_a, env_b, counter))
    if isinstance(a, CApp):
        return (_alpha(a.fn, b.fn, env_a, env_b, counter)
                and _alpha(a.arg, b.arg, env_a, env_b, counter))
    if isinstance(a, If):
        return (_alpha(a.cond, b.cond, env_a, env_b, counter)
                and _alpha(a.then, b.then, env_a, env_b, counter)
                and _alpha(a.orelse, b.orelse, env_a, env_b, counter))
    if isinstance(a, (Lam, ArrowAbs)):
        env_a, env_b = dict(env_a), dict(env_b)
        if not _alpha_pattern(a.pat, b.pat, env_a, env_b, counter):
            return False
        pa = a.body if isinstance(a, Lam) else a.cmd
        pb = b.body if isinstance(b, Lam) else b.cmd
        return _alpha(pa, pb, env_a, env_b, counter)
    if isinstance(a, (Let, VecLet, CLet)):
        if not _alpha(a.bound, b.bound, env_a, env_b, counter):
            return False
        env_a, env_b = dict(env_a), dict(env_b)
        if not _alpha_pattern(a.pat, b.pat, env_a, env_b, counter):
            return False
        return _alpha(a.body, b.body, env_a, env_b, counter)
    raise TypeError(f"alpha_eq: unexpected node {a!r}")


# --------------------------------------------------------------------------
# Pretty printing
#
# Precedence levels mirror the parser's descent:
#   0 term (lam / arrow-lam / let / if)   1 add/sub   2 scalar *   3 ==
#   4 application   5 atom

_TERM, _ADD, _SCALE, _EQ, _APP, _ATOM = range(6)


def pretty_pattern(p: Pattern) -> str:
    if isinstance(p, PVar):
        return p.name
    parts = []
    q = p
    while isinstance(q, PPair):
        parts.append(q.left)
        q = q.right
    parts.append(q)
    return "(" + ",".join(pretty_pattern(x) for x in parts) + ")"


def _scalar_str(c: complex) -> str:
    re, im = c.real, c.imag
    if im == 0:
        return repr(re)
    if re == 0:
        if im >= 0:
            return f"{im!r}i"
        return f"0.0-{abs(im)!r}i"
    sign = "+" if im >= 0 else "-"
    return f"{re!r}{sign}{abs(im)!r}i"


def _wrap(s: str, level: int, need: int) -> str:
    return f"({s})" if level < need else s


def pretty(node, prec: int = _TERM) -> str:
    """Render a term or command back to concrete syntax."""
    if isinstance(node, Var):
        return node.name
    if isinstance(node, BoolLit):
        return "True" if node.value else "False"
    if isinstance(node, MZero):
        return "mzero"
    if isinstance(node, Pair):
        parts = []
        q = node
        while isinstance(q, Pair):
            parts.append(q.left)
            q = q.right
        parts.append(q)
        return "(" + ", ".join(pretty(x, _TERM) for x in parts) + ")"
    if isinstance(node, Fst):
        return _wrap(f"fst {pretty(node.arg, _ATOM)}", _APP, prec)
    if isinstance(node, Snd):
        return _wrap(f"snd {pretty(node.arg, _ATOM)}", _APP, prec)
    if isinstance(node, Eq):
        s = f"{pretty(node.left, _APP)} == {pretty(node.right, _APP)}"
        return _wrap(s, _EQ, prec)
    if isinstance(node, Lam):
        s = f"\\{pretty_pattern(node.pat)}. {pretty(node.body, _TERM)}"
        return _wrap(s, _TERM, prec)
    if isinstance(node, ArrowAbs):
        s = f"\\@{pretty_pattern(node.pat)}. {pretty(node.cmd, _TERM)}"
        return _wrap(s, _TERM, prec)
    if isinstance(node, App):
        s = f"{pretty(node.fn, _APP)} {pretty(node.arg, _ATOM)}"
        return _wrap(s, _APP, prec)
    if isinstance(node, (Let, VecLet)):
        s = (f"let {pretty_pattern(node.pat)} = {pretty(node.bound, _TERM)} "
             f"in {pretty(node.body, _TERM)}")
        return _wrap(s, _TERM, prec)
    if isinstance(node, If):
        s = (f"if {pretty(node.cond, _TERM)} then {pretty(node.then, _TERM)} "
             f"else {pretty(node.orelse, _TERM)}")
        return _wrap(s, _TERM, prec)
    if isinstance(node, (VecUnit, CUnit)):
        return f"[{pretty(node.content, _TERM)}]"
    if isinstance(node, VecAdd):
        s = f"{pretty(node.left, _ADD)} + {pretty(node.right, _SCALE)}"
        return _wrap(s, _ADD, prec)
    if isinstance(node, VecSub):
        s = f"{pretty(node.left, _ADD)} - {pretty(node.right, _SCALE)}"
        return _wrap(s, _ADD, prec)
    if isinstance(node, VecScale):
        s = f"{_scalar_str(node.scalar)} * {pretty(node.arg, _EQ)}"
        return _wrap(s, _SCALE, prec)
    if isinstance(node, CApp):
        s = f"{pretty(node.fn, _APP)} @ {pretty(node.arg, _ATOM)}"
        return _wrap(s, _ADD, prec)
    if isinstance(node, CLet):
        s = (f"let {pretty_pattern(node.pat)} = {pretty(node.bound, _TERM)} "
             f"in {pretty(node.body, _TERM)}")
        return _wrap(s, _TERM, prec)
    if isinstance(node, Meas):
        return _wrap(f"meas {pretty(node.arg, _ATOM)}", _APP, prec)
    if isinstance(node, TrL):
        return _wrap(f"trL {pretty(node.arg, _ATOM)}", _APP, prec)
    if isinstance(node, TypeExpr):
        return type_str(node)
    raise TypeError(f"pretty: unexpected node {node!r}")


def pretty_program(p: Program) -> str:
    lines = []
    for d in p.defs:
        if d.annot is not None:
            lines.append(f"{d.name} : {type_str(d.annot)} = {pretty(d.term)}")
        else:
            lines.append(f"{d.name} = {pretty(d.term)}")
    return "\n".join(lines) + "\n"
