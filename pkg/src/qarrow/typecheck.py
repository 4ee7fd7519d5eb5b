"""Typechecker and elaborator.

Judgments use an environment pair: ``gamma`` holds ordinary (function-level)
bindings, ``delta`` holds variables bound by arrow abstractions and command
lets.  The two have disjoint domains.  Terms see the merged environment;
the *function position* of an arrow application is checked under ``gamma``
alone, so a ``delta`` variable there is reported as ``delta-misuse``.

Checking is monomorphic inference: unknown types are unification variables
solved on the fly, so unannotated lambdas still typecheck whenever their
use determines the type.  Where a type cannot be determined, an annotation
is required.

Besides types, checking produces an *elaborated* copy of the tree:

* sharing ``let`` whose bound term is vector-typed and whose body is
  vector-typed becomes a monadic ``VecLet``;
* command units record whether they embed a classical value or lift a
  vector-valued term;
* arrow abstractions, command applications, lets, ``meas``/``trL`` record
  the types the translator needs.

Error kinds: ``mismatch``, ``unbound``, ``delta-misuse``,
``non-classical-basis``, ``pattern-arity``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .syntax import (App, ArrowAbs, BoolLit, BoolT, CApp, CLet, CUnit, Command,
                     Def, DensT, Eq, Fst, FunT, If, is_classical, Lam, Let,
                     Meas, MZero, Pair, Pattern, pattern_names, PPair, Pos,
                     ProdT, Program, PVar, Snd, SuperT, Term, TrL, type_str,
                     TypeExpr, Var, VecAdd, VecLet, VecScale, VecSub, VecT,
                     VecUnit)


@dataclass(frozen=True)
class TVar(TypeExpr):
    """Internal unification variable; never escapes into reported types."""
    uid: int


def _show(t: Optional[TypeExpr]) -> str:
    if t is None:
        return "?"
    if isinstance(t, TVar):
        return "?"
    if isinstance(t, ProdT):
        return f"({_show(t.left)},{_show(t.right)})"
    if isinstance(t, FunT):
        arg = _show(t.arg)
        if isinstance(t.arg, (FunT, SuperT)):
            arg = f"({arg})"
        return f"{arg} -> {_show(t.res)}"
    if isinstance(t, VecT):
        return f"Vec {_paren(t.elem)}"
    if isinstance(t, DensT):
        return f"Dens {_paren(t.elem)}"
    if isinstance(t, SuperT):
        return f"Super {_paren(t.arg)} {_paren(t.res)}"
    return type_str(t)


def _paren(t: TypeExpr) -> str:
    s = _show(t)
    return s if isinstance(t, (BoolT, ProdT, TVar)) else f"({s})"


class TypeCheckError(Exception):
    def __init__(self, kind: str, pos: Optional[Pos], expected=None,
                 found=None, detail: str = ""):
        self.kind = kind
        self.pos = pos
        self.expected = expected
        self.found = found
        self.detail = detail
        super().__init__(self.render())

    def render(self, filename: str = "<input>") -> str:
        line, col = self.pos if self.pos is not None else (0, 0)
        if self.expected is not None or self.found is not None:
            core = f"expected {_show(self.expected)}, found {_show(self.found)}"
            if self.detail:
                core += f" ({self.detail})"
        else:
            core = self.detail
        return f"{filename}:{line}:{col}: {self.kind}: {core}"


class Unifier:
    def __init__(self) -> None:
        self.subst: dict[int, TypeExpr] = {}
        self._next = 0

    def fresh(self) -> TVar:
        self._next += 1
        return TVar(self._next)

    def snapshot(self) -> dict[int, TypeExpr]:
        return dict(self.subst)

    def restore(self, snap: dict[int, TypeExpr]) -> None:
        self.subst = snap

    def head(self, t: TypeExpr) -> TypeExpr:
        while isinstance(t, TVar) and t.uid in self.subst:
            t = self.subst[t.uid]
        return t

    def _occurs(self, uid: int, t: TypeExpr) -> bool:
        t = self.head(t)
        if isinstance(t, TVar):
            return t.uid == uid
        if isinstance(t, ProdT):
            return self._occurs(uid, t.left) or self._occurs(uid, t.right)
        if isinstance(t, (FunT, SuperT)):
            return self._occurs(uid, t.arg) or self._occurs(uid, t.res)
        if isinstance(t, (VecT, DensT)):
            return self._occurs(uid, t.elem)
        return False

    def unify(self, expected: TypeExpr, found: TypeExpr, pos: Optional[Pos],
              detail: str = "") -> None:
        a, b = self.head(expected), self.head(found)
        if isinstance(a, TVar):
            if isinstance(b, TVar) and b.uid == a.uid:
                return
            if self._occurs(a.uid, b):
                raise TypeCheckError("mismatch", pos, expected=self.resolve(a),
                                     found=self.resolve(b), detail="cyclic type")
            self.subst[a.uid] = b
            return
        if isinstance(b, TVar):
            self.unify(b, a, pos, detail)
            return
        if isinstance(a, BoolT) and isinstance(b, BoolT):
            return
        if type(a) is type(b):
            if isinstance(a, ProdT):
                self.unify(a.left, b.left, pos, detail)
                self.unify(a.right, b.right, pos, detail)
                return
            if isinstance(a, (FunT, SuperT)):
                self.unify(a.arg, b.arg, pos, detail)
                self.unify(a.res, b.res, pos, detail)
                return
            if isinstance(a, (VecT, DensT)):
                self.unify(a.elem, b.elem, pos, detail)
                return
        raise TypeCheckError("mismatch", pos, expected=self.resolve(expected),
                             found=self.resolve(found), detail=detail)

    def resolve(self, t: TypeExpr) -> TypeExpr:
        """Substitute solved variables; unsolved TVars remain."""
        t = self.head(t)
        if isinstance(t, TVar):
            return t
        if isinstance(t, ProdT):
            return ProdT(self.resolve(t.left), self.resolve(t.right), pos=t.pos)
        if isinstance(t, FunT):
            return FunT(self.resolve(t.arg), self.resolve(t.res), pos=t.pos)
        if isinstance(t, SuperT):
            return SuperT(self.resolve(t.arg), self.resolve(t.res), pos=t.pos)
        if isinstance(t, VecT):
            return VecT(self.resolve(t.elem), pos=t.pos)
        if isinstance(t, DensT):
            return DensT(self.resolve(t.elem), pos=t.pos)
        return t

    def resolve_full(self, t: TypeExpr, pos: Optional[Pos]) -> TypeExpr:
        r = self.resolve(t)
        if _has_tvar(r):
            raise TypeCheckError(
                "mismatch", pos,
                detail="ambiguous type; an annotation is required")
        return r


def _has_tvar(t: TypeExpr) -> bool:
    if isinstance(t, TVar):
        return True
    if isinstance(t, ProdT):
        return _has_tvar(t.left) or _has_tvar(t.right)
    if isinstance(t, (FunT, SuperT)):
        return _has_tvar(t.arg) or _has_tvar(t.res)
    if isinstance(t, (VecT, DensT)):
        return _has_tvar(t.elem)
    return False


def validate_type(t: TypeExpr, pos: Optional[Pos] = None) -> None:
    """Reject types whose Vec/Dens/Super arguments are not classical."""
    where = t.pos or pos
    if isinstance(t, (VecT, DensT)):
        if not is_classical(t.elem):
            raise TypeCheckError("non-classical-basis", where,
                                 detail=f"{_show(t)} needs a classical index type")
        return
    if isinstance(t, SuperT):
        for part in (t.arg, t.res):
            if not is_classical(part):
                raise TypeCheckError("non-classical-basis", where,
                                     detail=f"{_show(t)} needs classical index types")
        return
    if isinstance(t, ProdT):
        validate_type(t.left, where)
        validate_type(t.right, where)
        return
    if isinstance(t, FunT):
        validate_type(t.arg, where)
        validate_type(t.res, where)
        return


class EnvPair:
    """gamma: function-level bindings; delta: command-level bindings;
    hidden: delta names currently out of scope (for precise errors)."""

    def __init__(self, gamma=None, delta=None, hidden=frozenset()):
        self.gamma: dict[str, TypeExpr] = dict(gamma or {})
        self.delta: dict[str, TypeExpr] = dict(delta or {})
        self.hidden: frozenset[str] = frozenset(hidden)

    def lookup(self, name: str) -> Optional[TypeExpr]:
        if name in self.delta:
            return self.delta[name]
        return self.gamma.get(name)

    def bind_gamma(self, pairs) -> "EnvPair":
        gamma = dict(self.gamma)
        delta = dict(self.delta)
        hidden = set(self.hidden)
        for name, ty in pairs:
            gamma[name] = ty
            delta.pop(name, None)
            hidden.discard(name)
        return EnvPair(gamma, delta, frozenset(hidden))

    def bind_delta(self, pairs) -> "EnvPair":
        gamma = dict(self.gamma)
        delta = dict(self.delta)
        hidden = set(self.hidden)
        for name, ty in pairs:
            delta[name] = ty
            gamma.pop(name, None)
            hidden.discard(name)
        return EnvPair(gamma, delta, frozenset(hidden))

    def hide_delta(self) -> "EnvPair":
        return EnvPair(self.gamma, {}, self.hidden | set(self.delta))

    def enter_command(self) -> "EnvPair":
        """All currently visible bindings become gamma for a nested arrow body."""
        merged = dict(self.gamma)
        merged.update(self.delta)
        return EnvPair(merged, {}, self.hidden)

    @classmethod
    def empty(cls) -> "EnvPair":
        return cls()


class Checker:
    def __init__(self) -> None:
        self.uni = Unifier()
        self.obligations: list[tuple[TypeExpr, Optional[Pos]]] = []

    # -- helpers

    def _classical(self, t: TypeExpr, pos: Optional[Pos]) -> None:
        self.obligations.append((t, pos))

    def check_obligations(self) -> None:
        for t, pos in self.obligations:
            r = self.uni.resolve(t)
            if _has_tvar(r):
                raise TypeCheckError("mismatch", pos,
                                     detail="ambiguous type; an annotation is required")
            if not is_classical(r):
                raise TypeCheckError("non-classical-basis", pos,
                                     detail=f"expected a classical type, found {_show(r)}")

    def bind_pattern(self, pat: Pattern, ty: TypeExpr) -> list[tuple[str, TypeExpr]]:
        names = pattern_names(pat)
        if len(set(names)) != len(names):
            raise TypeCheckError("pattern-arity", pat.pos,
                                 detail="pattern variables must be distinct")
        out: list[tuple[str, TypeExpr]] = []

        def go(p: Pattern, t: TypeExpr) -> None:
            if isinstance(p, PVar):
                out.append((p.name, t))
                return
            h = self.uni.head(t)
            if isinstance(h, TVar):
                l, r = self.uni.fresh(), self.uni.fresh()
                self.uni.unify(h, ProdT(l, r), p.pos)
                go(p.left, l)
                go(p.right, r)
                return
            if isinstance(h, ProdT):
                go(p.left, h.left)
                go(p.right, h.right)
                return
            raise TypeCheckError("pattern-arity", p.pos,
                                 detail=f"tuple pattern against {_show(self.uni.resolve(h))}")

        go(pat, ty)
        return out

    # -- terms

    def elaborate_term(self, env: EnvPair, t: Term,
                       expected: Optional[TypeExpr] = None) -> tuple[TypeExpr, Term]:
        ty, t2 = self._elab_term(env, t, expected)
        if expected is not None:
            self.uni.unify(expected, ty, t.pos)
        return ty, t2

    def _hint(self, expected: Optional[TypeExpr], cls) -> Optional[TypeExpr]:
        if expected is None:
            return None
        h = self.uni.head(expected)
        return h if isinstance(h, cls) else None

    def _elab_term(self, env: EnvPair, t: Term,
                   expected: Optional[TypeExpr]) -> tuple[TypeExpr, Term]:
        if isinstance(t, Var):
            ty = env.lookup(t.name)
            if ty is None:
                if t.name in env.hidden:
                    raise TypeCheckError(
                        "delta-misuse", t.pos,
                        detail=f"{t.name} is bound in the command environment "
                               f"and cannot be used here")
                raise TypeCheckError("unbound", t.pos, detail=t.name)
            return ty, t

        if isinstance(t, BoolLit):
            return BoolT(), t

        if isinstance(t, Pair):
            hint = self._hint(expected, ProdT)
            lt, l2 = self.elaborate_term(env, t.left, hint.left if hint else None)
            rt, r2 = self.elaborate_term(env, t.right, hint.right if hint else None)
            return ProdT(lt, rt), Pair(l2, r2, pos=t.pos)

        if isinstance(t, Fst):
            at, a2 = self.elaborate_term(env, t.arg)
            l, r = self.uni.fresh(), self.uni.fresh()
            self.uni.unify(ProdT(l, r), at, t.pos, detail="fst needs a pair")
            return l, Fst(a2, pos=t.pos)

        if isinstance(t, Snd):
            at, a2 = self.elaborate_term(env, t.arg)
            l, r = self.uni.fresh(), self.uni.fresh()
            self.uni.unify(ProdT(l, r), at, t.pos, detail="snd needs a pair")
            return r, Snd(a2, pos=t.pos)

        if isinstance(t, Eq):
            lt, l2 = self.elaborate_term(env, t.left)
            rt, r2 = self.elaborate_term(env, t.right)
            self.uni.unify(lt, rt, t.pos, detail="== compares equal types")
            self._classical(lt, t.pos)
            return BoolT(), Eq(l2, r2, pos=t.pos)

        if isinstance(t, Lam):
            hint = self._hint(expected, FunT)
            arg_t: TypeExpr = hint.arg if hint else self.uni.fresh()
            env2 = env.bind_gamma(self.bind_pattern(t.pat, arg_t))
            body_t, body2 = self.elaborate_term(env2, t.body,
                                                hint.res if hint else None)
            return FunT(arg_t, body_t), Lam(t.pat, body2, pos=t.pos)

        if isinstance(t, App):
            ft, f2 = self.elaborate_term(env, t.fn)
            fh = self.uni.head(ft)
            if isinstance(fh, FunT):
                at, a2 = self.elaborate_term(env, t.arg, fh.arg)
                return fh.res, App(f2, a2, pos=t.pos)
            at, a2 = self.elaborate_term(env, t.arg)
            res = self.uni.fresh()
            self.uni.unify(FunT(at, res), ft, t.pos,
                           detail="application needs a function")
            return res, App(f2, a2, pos=t.pos)

        if isinstance(t, Let):
            bt, b2 = self.elaborate_term(env, t.bound)
            bh = self.uni.head(bt)
            if isinstance(bh, VecT):
                snap = self.uni.snapshot()
                n_obl = len(self.obligations)
                try:
                    env2 = env.bind_gamma(self.bind_pattern(t.pat, bh.elem))
                    nt, n2 = self.elaborate_term(env2, t.body, expected)
                    nh = self.uni.head(nt)
                    if isinstance(nh, VecT):
                        self._classical(bh.elem, t.pos)
                        return nt, VecLet(t.pat, b2, n2, pos=t.pos, type_=nt)
                    self.uni.restore(snap)
                    del self.obligations[n_obl:]
                except TypeCheckError:
                    self.uni.restore(snap)
                    del self.obligations[n_obl:]
            env2 = env.bind_gamma(self.bind_pattern(t.pat, bt))
            nt, n2 = self.elaborate_term(env2, t.body, expected)
            return nt, Let(t.pat, b2, n2, pos=t.pos)

        if isinstance(t, VecLet):
            # Already elaborated input (e.g. re-checking a rewritten tree).
            bt, b2 = self.elaborate_term(env, t.bound)
            elem = self.uni.fresh()
            self.uni.unify(VecT(elem), bt, t.pos, detail="vector bind")
            env2 = env.bind_gamma(self.bind_pattern(t.pat, elem))
            nt, n2 = self.elaborate_term(env2, t.body, expected)
            res = self.uni.fresh()
            self.uni.unify(VecT(res), nt, t.pos, detail="vector bind body")
            if t.type_ is not None:
                self.uni.unify(t.type_, nt, t.pos)
            self._classical(elem, t.pos)
            return nt, VecLet(t.pat, b2, n2, pos=t.pos, type_=nt)

        if isinstance(t, If):
            ct, c2 = self.elaborate_term(env, t.cond, BoolT())
            tt, t2 = self.elaborate_term(env, t.then, expected)
            et, e2 = self.elaborate_term(env, t.orelse, expected)
            self.uni.unify(tt, et, t.pos, detail="if branches must agree")
            return tt, If(c2, t2, e2, pos=t.pos)

        if isinstance(t, VecUnit):
            hint = self._hint(expected, VecT)
            ct, c2 = self.elaborate_term(env, t.content,
                                         hint.elem if hint else None)
            self._classical(ct, t.pos)
            return VecT(ct), VecUnit(c2, pos=t.pos)

        if isinstance(t, (VecAdd, VecSub)):
            lt, l2 = self.elaborate_term(env, t.left, expected)
            rt, r2 = self.elaborate_term(env, t.right, expected)
            self.uni.unify(lt, rt, t.pos, detail="vector sum of equal types")
            elem = self.uni.fresh()
            self.uni.unify(VecT(elem), lt, t.pos,
                           detail="+/- applies to vector-typed terms")
            cls = VecAdd if isinstance(t, VecAdd) else VecSub
            return lt, cls(l2, r2, pos=t.pos)

        if isinstance(t, VecScale):
            at, a2 = self.elaborate_term(env, t.arg, expected)
            elem = self.uni.fresh()
            self.uni.unify(VecT(elem), at, t.pos,
                           detail="scaling applies to vector-typed terms")
            return at, VecScale(t.scalar, a2, pos=t.pos)

        if isinstance(t, MZero):
            if t.type_ is not None:
                validate_type(t.type_, t.pos)
                self.uni.unify(t.type_, t.type_, t.pos)
                ty: TypeExpr = t.type_
            else:
                ty = VecT(self.uni.fresh())
            elem = self.uni.fresh()
            self.uni.unify(VecT(elem), ty, t.pos, detail="mzero is vector-typed")
            self._classical(elem, t.pos)
            return ty, MZero(pos=t.pos, type_=ty)

        if isinstance(t, ArrowAbs):
            hint = self._hint(expected, SuperT)
            if hint is None and isinstance(t.type_, SuperT):
                hint = t.type_  # keep annotations from a previous elaboration
            arg_t: TypeExpr = hint.arg if hint else self.uni.fresh()
            inner = env.enter_command()
            inner = inner.bind_delta(self.bind_pattern(t.pat, arg_t))
            res_t, cmd2 = self.elaborate_command(inner, t.cmd)
            self._classical(arg_t, t.pos)
            self._classical(res_t, t.pos)
            ty = SuperT(arg_t, res_t)
            if t.type_ is not None:
                self.uni.unify(t.type_, ty, t.pos)
            return ty, ArrowAbs(t.pat, cmd2, pos=t.pos, type_=ty)

        raise TypeCheckError("mismatch", t.pos, detail=f"unexpected term {t!r}")

    # -- commands

    def elaborate_command(self, env: EnvPair, c: Command) -> tuple[TypeExpr, Command]:
        if isinstance(c, CApp):
            ft, f2 = self.elaborate_term(env.hide_delta(), c.fn)
            fh = self.uni.head(ft)
            if isinstance(fh, TVar):
                a, b = self.uni.fresh(), self.uni.fresh()
                self.uni.unify(SuperT(a, b), ft, c.pos,
                               detail="arrow application needs a superoperator")
                fh = self.uni.head(ft)
            if not isinstance(fh, SuperT):
                raise TypeCheckError(
                    "mismatch", c.fn.pos or c.pos,
                    expected=SuperT(self.uni.fresh(), self.uni.fresh()),
                    found=self.uni.resolve(ft),
                    detail="arrow application needs a superoperator")
            if c.fn_type is not None:
                self.uni.unify(c.fn_type, fh, c.pos)
            at, a2 = self.elaborate_term(env, c.arg, fh.arg)
            return fh.res, CApp(f2, a2, pos=c.pos, fn_type=fh)

        if isinstance(c, CUnit):
            ct, c2 = self.elaborate_term(env, c.content)
            if c.content_type is not None and c.mode == "classical":
                self.uni.unify(c.content_type, ct, c.pos)
            ch = self.uni.head(ct)
            if isinstance(ch, VecT):
                if c.content_type is not None and c.mode == "vec":
                    self.uni.unify(c.content_type, ch.elem, c.pos)
                self._classical(ch.elem, c.pos)
                return ch.elem, CUnit(c2, pos=c.pos, mode="vec",
                                      content_type=ch.elem)
            if isinstance(ch, (FunT, SuperT, DensT)):
                raise TypeCheckError(
                    "non-classical-basis", c.pos,
                    detail=f"a command unit needs a classical or vector-typed "
                           f"content, found {_show(self.uni.resolve(ch))}")
            self._classical(ct, c.pos)
            return ct, CUnit(c2, pos=c.pos, mode="classical", content_type=ct)

        if isinstance(c, CLet):
            bt, b2 = self.elaborate_command(env, c.bound)
            if c.bound_type is not None:
                self.uni.unify(c.bound_type, bt, c.pos)
            env2 = env.bind_delta(self.bind_pattern(c.pat, bt))
            nt, n2 = self.elaborate_command(env2, c.body)
            return nt, CLet(c.pat, b2, n2, pos=c.pos, bound_type=bt)

        if isinstance(c, Meas):
            at, a2 = self.elaborate_term(env, c.arg)
            if c.arg_type is not None:
                self.uni.unify(c.arg_type, at, c.pos)
            self._classical(at, c.pos)
            return ProdT(at, at), Meas(a2, pos=c.pos, arg_type=at)

        if isinstance(c, TrL):
            at, a2 = self.elaborate_term(env, c.arg)
            if c.arg_type is not None:
                self.uni.unify(c.arg_type, at, c.pos)
            l, r = self.uni.fresh(), self.uni.fresh()
            self.uni.unify(ProdT(l, r), at, c.pos, detail="trL needs a pair")
            self._classical(at, c.pos)
            return r, TrL(a2, pos=c.pos, arg_type=ProdT(l, r))

        raise TypeCheckError("mismatch", c.pos, detail=f"unexpected command {c!r}")

    # -- finalization: resolve every recorded annotation

    def finalize(self, node):
        uni = self.uni

        def res(t):
            return None if t is None else uni.resolve_full(t, getattr(node, "pos", None))

        if isinstance(node, (Var, BoolLit)):
            return node
        if isinstance(node, Pair):
            return Pair(self.finalize(node.left), self.finalize(node.right), pos=node.pos)
        if isinstance(node, Fst):
            return Fst(self.finalize(node.arg), pos=node.pos)
        if isinstance(node, Snd):
            return Snd(self.finalize(node.arg), pos=node.pos)
        if isinstance(node, Eq):
            return Eq(self.finalize(node.left), self.finalize(node.right), pos=node.pos)
        if isinstance(node, Lam):
            return Lam(node.pat, self.finalize(node.body), pos=node.pos)
        if isinstance(node, App):
            return App(self.finalize(node.fn), self.finalize(node.arg), pos=node.pos)
        if isinstance(node, Let):
            return Let(node.pat, self.finalize(node.bound),
                       self.finalize(node.body), pos=node.pos)
        if isinstance(node, VecLet):
            return VecLet(node.pat, self.finalize(node.bound),
                          self.finalize(node.body), pos=node.pos,
                          type_=res(node.type_))
        if isinstance(node, If):
            return If(self.finalize(node.cond), self.finalize(node.then),
                      self.finalize(node.orelse), pos=node.pos)
        if isinstance(node, VecUnit):
            return VecUnit(self.finalize(node.content), pos=node.pos)
        if isinstance(node, VecAdd):
            return VecAdd(self.finalize(node.left), self.finalize(node.right), pos=node.pos)
        if isinstance(node, VecSub):
            return VecSub(self.finalize(node.left), self.finalize(node.right), pos=node.pos)
        if isinstance(node, VecScale):
            return VecScale(node.scalar, self.finalize(node.arg), pos=node.pos)
        if isinstance(node, MZero):
            return MZero(pos=node.pos, type_=res(node.type_))
        if isinstance(node, ArrowAbs):
            return ArrowAbs(node.pat, self.finalize(node.cmd), pos=node.pos,
                            type_=res(node.type_))
        if isinstance(node, CApp):
            return CApp(self.finalize(node.fn), self.finalize(node.arg),
                        pos=node.pos, fn_type=res(node.fn_type))
        if isinstance(node, CUnit):
            return CUnit(self.finalize(node.content), pos=node.pos,
                         mode=node.mode, content_type=res(node.content_type))
        if isinstance(node, CLet):
            return CLet(node.pat, self.finalize(node.bound),
                        self.finalize(node.body), pos=node.pos,
                        bound_type=res(node.bound_type))
        if isinstance(node, Meas):
            return Meas(self.finalize(node.arg), pos=node.pos,
                        arg_type=res(node.arg_type))
        if isinstance(node, TrL):
            return TrL(self.finalize(node.arg), pos=node.pos,
                       arg_type=res(node.arg_type))
        raise TypeCheckError("mismatch", getattr(node, "pos", None),
                             detail=f"unexpected node {node!r}")


# --------------------------------------------------------------------------
# Public entry points


def _elaborate_closed(gamma: dict[str, TypeExpr], term: Term,
                      expected: Optional[TypeExpr]) -> tuple[TypeExpr, Term]:
    checker = Checker()
    env = EnvPair(gamma)
    ty, t2 = checker.elaborate_term(env, term, expected)
    resolved = checker.uni.resolve_full(ty, term.pos)
    checker.check_obligations()
    validate_type(resolved, term.pos)
    return resolved, checker.finalize(t2)


def elaborate_term(env, term: Term,
                   expected: Optional[TypeExpr] = None) -> tuple[TypeExpr, Term]:
    """Infer (and elaborate) a term under an environment.

    `env` may be an EnvPair or a plain mapping treated as gamma.  Two passes
    are used when no expected type is given, so that mode decisions (unit
    lifting, monadic lets) are made with fully known types.
    """
    gamma = dict(env.gamma) if isinstance(env, EnvPair) else dict(env or {})
    delta = dict(env.delta) if isinstance(env, EnvPair) else {}
    if delta:
        # delta-typed contexts: single pass under the merged environment
        checker = Checker()
        ty, t2 = checker.elaborate_term(EnvPair(gamma, delta), term, expected)
        resolved = checker.uni.resolve_full(ty, term.pos)
        checker.check_obligations()
        validate_type(resolved, term.pos)
        return resolved, checker.finalize(t2)
    if expected is None:
        expected, _ = _elaborate_closed(gamma, term, None)
    return _elaborate_closed(gamma, term, expected)


def infer_term(env, term: Term) -> TypeExpr:
    ty, _ = elaborate_term(env, term)
    return ty


def check_command(env: EnvPair, cmd: Command) -> TypeExpr:
    ty, _ = elaborate_command_env(env, cmd)
    return ty


def elaborate_command_env(env: EnvPair, cmd: Command) -> tuple[TypeExpr, Command]:
    checker = Checker()
    ty, c2 = checker.elaborate_command(env, cmd)
    resolved = checker.uni.resolve_full(ty, cmd.pos)
    checker.check_obligations()
    return resolved, checker.finalize(c2)


def elaborate_def(gamma: dict[str, TypeExpr], d: Def) -> tuple[TypeExpr, Def]:
    if d.annot is not None:
        validate_type(d.annot, d.pos)
        ty, t2 = _elaborate_closed(gamma, d.term, d.annot)
        return ty, Def(d.name, d.annot, t2, pos=d.pos)
    ty, t2 = elaborate_term(gamma, d.term)
    return ty, Def(d.name, None, t2, pos=d.pos)


def elaborate_program(program: Program,
                      gamma: Optional[dict[str, TypeExpr]] = None
                      ) -> tuple[dict[str, TypeExpr], Program]:
    env = dict(gamma or {})
    types: dict[str, TypeExpr] = {}
    new_defs = []
    for d in program.defs:
        ty, d2 = elaborate_def(env, d)
        env[d.name] = ty
        types[d.name] = ty
        new_defs.append(d2)
    return types, Program(tuple(new_defs), source_name=program.source_name)


def check_program(program: Program,
                  gamma: Optional[dict[str, TypeExpr]] = None) -> dict[str, TypeExpr]:
    types, _ = elaborate_program(program, gamma)
    return types
