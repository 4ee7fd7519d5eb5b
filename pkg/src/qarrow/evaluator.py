"""Call-by-value evaluator.

Ordinary terms evaluate to booleans, pairs, closures or amplitude vectors.
An arrow abstraction evaluates to a *superoperator value*: it is translated
to the combinator pipeline and the pipeline is materialized into its matrix
by pushing a batch of vectorized densities through it column-blocked, with
each combinator implemented by index arithmetic on the batch (scatter for
pure functions, axis reshuffles for ``first``/``second``, einsum
contractions for lifted linear maps) rather than by building the large
intermediate superoperator matrices.

``reference_super`` provides a second, deliberately naive semantics for
arrow abstractions — structural recursion over the command, using the dense
superoperator combinators from ``linalg`` exactly as written, with no
context narrowing and no batching.  It is exponential in the number of
command lets and exists purely as an independent cross-check for tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import classic as C
from .classic import (Arr, ClassicExpr, Compose, delta_tuple_type, FanoutC,
                      First, LiftLin, MeasC, NamedSuper, PureFun, Second,
                      translate_term, TranslationError, TrLC)
from .linalg import (apply_super, basis, dim, elem_index, fun2lin,
                     super_arr, super_compose, super_fanout, super_from_lin,
                     super_identity, super_meas, super_trL, SuperVal,
                     vec_return, vec_zero)
from .syntax import (App, ArrowAbs, BoolLit, BoolT, CApp, CLet, Command,
                     CUnit, Eq, Fst, If, Lam, Let, Meas, MZero, Pair,
                     Pattern, PPair, ProdT, Program, PVar, Snd, SuperT, Term,
                     TrL, TypeExpr, Var, VecAdd, VecLet, VecScale, VecSub,
                     VecT, VecUnit)

# memory budget (complex cells) for one column block during materialization
_BUDGET = 4_000_000


class EvalError(Exception):
    pass


# --------------------------------------------------------------------------
# Values


@dataclass(frozen=True)
class BoolV:
    value: bool


@dataclass(frozen=True)
class PairV:
    left: "Value"
    right: "Value"


@dataclass(frozen=True)
class ClosureV:
    pat: Pattern
    body: Term
    env: dict

    def __repr__(self):
        return "<closure>"


@dataclass(frozen=True)
class VecV:
    elem_type: TypeExpr
    amp: np.ndarray

    def __repr__(self):
        return f"<vec dim {self.amp.shape[0]}>"


@dataclass(frozen=True)
class SuperV:
    val: SuperVal

    def __repr__(self):
        return (f"<super {dim(self.val.in_type)}x{dim(self.val.in_type)}"
                f" -> {dim(self.val.out_type)}x{dim(self.val.out_type)}>")


Value = object


def value_to_elem(v: Value):
    if isinstance(v, BoolV):
        return v.value
    if isinstance(v, PairV):
        return (value_to_elem(v.left), value_to_elem(v.right))
    raise EvalError(f"not a basis value: {v!r}")


def elem_to_value(e) -> Value:
    if isinstance(e, bool):
        return BoolV(e)
    return PairV(elem_to_value(e[0]), elem_to_value(e[1]))


def elem_type_of_value(v: Value) -> TypeExpr:
    if isinstance(v, BoolV):
        return BoolT()
    if isinstance(v, PairV):
        return ProdT(elem_type_of_value(v.left), elem_type_of_value(v.right))
    raise EvalError(f"not a basis value: {v!r}")


def bind_pattern_value(pat: Pattern, v: Value, env: dict) -> None:
    if isinstance(pat, PVar):
        env[pat.name] = v
        return
    if isinstance(pat, PPair):
        if not isinstance(v, PairV):
            raise EvalError(f"pattern expects a pair, got {v!r}")
        bind_pattern_value(pat.left, v.left, env)
        bind_pattern_value(pat.right, v.right, env)
        return
    raise EvalError(f"unknown pattern {pat!r}")


def apply_closure(f: Value, arg: Value) -> Value:
    if not isinstance(f, ClosureV):
        raise EvalError(f"cannot apply non-function {f!r}")
    env = dict(f.env)
    bind_pattern_value(f.pat, arg, env)
    return eval_term(f.body, env)


# --------------------------------------------------------------------------
# Term evaluation


def eval_term(t: Term, env: dict) -> Value:
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise EvalError(f"unbound variable {t.name}") from None

    if isinstance(t, BoolLit):
        return BoolV(t.value)

    if isinstance(t, Pair):
        return PairV(eval_term(t.left, env), eval_term(t.right, env))

    if isinstance(t, Fst):
        v = eval_term(t.arg, env)
        if not isinstance(v, PairV):
            raise EvalError("fst of a non-pair")
        return v.left

    if isinstance(t, Snd):
        v = eval_term(t.arg, env)
        if not isinstance(v, PairV):
            raise EvalError("snd of a non-pair")
        return v.right

    if isinstance(t, Eq):
        a = value_to_elem(eval_term(t.left, env))
        b = value_to_elem(eval_term(t.right, env))
        return BoolV(a == b)

    if isinstance(t, Lam):
        return ClosureV(t.pat, t.body, env)

    if isinstance(t, App):
        return apply_closure(eval_term(t.fn, env), eval_term(t.arg, env))

    if isinstance(t, Let):
        env2 = dict(env)
        bind_pattern_value(t.pat, eval_term(t.bound, env), env2)
        return eval_term(t.body, env2)

    if isinstance(t, VecLet):
        bound = eval_term(t.bound, env)
        if not isinstance(bound, VecV):
            raise EvalError("vector bind of a non-vector")
        if t.type_ is None or not isinstance(t.type_, VecT):
            raise EvalError("vector bind lacks its result type; "
                            "typecheck before evaluating")
        out_t = t.type_.elem
        out = vec_zero(out_t)
        for i, e in enumerate(basis(bound.elem_type)):
            a = bound.amp[i]
            if a == 0:
                continue
            env2 = dict(env)
            bind_pattern_value(t.pat, elem_to_value(e), env2)
            piece = eval_term(t.body, env2)
            if not isinstance(piece, VecV):
                raise EvalError("vector bind body must produce a vector")
            out += a * piece.amp
        return VecV(out_t, out)

    if isinstance(t, If):
        c = eval_term(t.cond, env)
        if not isinstance(c, BoolV):
            raise EvalError("if condition must be a boolean")
        return eval_term(t.then if c.value else t.orelse, env)

    if isinstance(t, VecUnit):
        v = eval_term(t.content, env)
        et = elem_type_of_value(v)
        return VecV(et, vec_return(et, value_to_elem(v)))

    if isinstance(t, (VecAdd, VecSub)):
        a = eval_term(t.left, env)
        b = eval_term(t.right, env)
        if not (isinstance(a, VecV) and isinstance(b, VecV)):
            raise EvalError("vector sum of non-vectors")
        if a.amp.shape != b.amp.shape:
            raise EvalError("vector sum dimension mismatch")
        amp = a.amp + b.amp if isinstance(t, VecAdd) else a.amp - b.amp
        return VecV(a.elem_type, amp)

    if isinstance(t, VecScale):
        a = eval_term(t.arg, env)
        if not isinstance(a, VecV):
            raise EvalError("scaling a non-vector")
        return VecV(a.elem_type, t.scalar * a.amp)

    if isinstance(t, MZero):
        if t.type_ is None or not isinstance(t.type_, VecT):
            raise EvalError("mzero lacks its type; typecheck before evaluating")
        return VecV(t.type_.elem, vec_zero(t.type_.elem))

    if isinstance(t, ArrowAbs):
        return eval_arrow_abs(t, env)

    raise EvalError(f"cannot evaluate {t!r}")


# --------------------------------------------------------------------------
# Pipeline materialization (batched column evaluation)


def _split_delta_elem(delta, elem) -> list:
    parts: list = [None] * len(delta)
    for i in range(len(delta) - 1, 0, -1):
        elem, parts[i] = elem
    parts[0] = elem
    return parts


def _bind_pattern_elem(pat: Pattern, elem, env: dict) -> None:
    bind_pattern_value(pat, elem_to_value(elem), env)


def _fn_env(fn: PureFun, elem, env: dict) -> dict:
    env2 = dict(env)
    for (pat, _), part in zip(fn.delta, _split_delta_elem(fn.delta, elem)):
        _bind_pattern_elem(pat, part, env2)
    return env2


def _arr_index_map(e: Arr, env: dict) -> np.ndarray:
    m = np.empty(dim(e.in_type), dtype=np.int64)
    for i, elem in enumerate(basis(e.in_type)):
        v = eval_term(e.fn.body, _fn_env(e.fn, elem, env))
        m[i] = elem_index(e.out_type, value_to_elem(v))
    return m


def _lift_matrix(e: LiftLin, env: dict) -> np.ndarray:
    do, di = dim(e.out_type), dim(e.in_type)
    mat = np.zeros((do, di), dtype=complex)
    for i, elem in enumerate(basis(e.in_type)):
        v = eval_term(e.fn.body, _fn_env(e.fn, elem, env))
        if not isinstance(v, VecV):
            raise EvalError("lifted function must produce a vector")
        if v.amp.shape[0] != do:
            raise EvalError("lifted function dimension mismatch")
        mat[:, i] = v.amp
    return mat


def apply_batch(e: ClassicExpr, V: np.ndarray, env: dict) -> np.ndarray:
    """Push a batch of vectorized densities (shape (din², k)) through a
    pipeline, returning shape (dout², k)."""
    di, do = dim(e.in_type), dim(e.out_type)
    k = V.shape[1]

    if isinstance(e, Arr):
        m = _arr_index_map(e, env)
        rows = (m[:, None] * do + m[None, :]).reshape(-1)
        out = np.zeros((do * do, k), dtype=complex)
        np.add.at(out, rows, V)
        return out

    if isinstance(e, LiftLin):
        F = _lift_matrix(e, env)
        V3 = V.reshape(di, di, k)
        return np.einsum("ai,ijk,bj->abk", F, V3, F.conj(),
                         optimize=True).reshape(do * do, k)

    if isinstance(e, NamedSuper):
        s = env.get(e.name)
        if not isinstance(s, SuperV):
            raise EvalError(f"{e.name} is not a superoperator")
        return s.val.action @ V

    if isinstance(e, MeasC):
        V3 = V.reshape(di, di, k)
        diag = V3[np.arange(di), np.arange(di)]          # (di, k)
        out = np.zeros(((di * di) ** 2, k), dtype=complex)
        pair = np.arange(di) * di + np.arange(di)        # index of (a,a)
        out[pair * (di * di) + pair] = diag
        return out

    if isinstance(e, TrLC):
        pt = e.in_type
        assert isinstance(pt, ProdT)
        da, db = dim(pt.left), dim(pt.right)
        V5 = V.reshape(da, db, da, db, k)
        return np.einsum("abadk->bdk", V5).reshape(db * db, k)

    if isinstance(e, Compose):
        return apply_batch(e.then_, apply_batch(e.first_, V, env), env)

    if isinstance(e, First):
        assert isinstance(e.in_type, ProdT)
        da, dc = dim(e.inner.in_type), dim(e.passive)
        db = dim(e.inner.out_type)
        W = (V.reshape(da, dc, da, dc, k).transpose(0, 2, 1, 3, 4)
             .reshape(da * da, dc * dc * k))
        W2 = apply_batch(e.inner, W, env)
        return (W2.reshape(db, db, dc, dc, k).transpose(0, 2, 1, 3, 4)
                .reshape((db * dc) ** 2, k))

    if isinstance(e, Second):
        assert isinstance(e.in_type, ProdT)
        da, dc = dim(e.inner.in_type), dim(e.passive)
        db = dim(e.inner.out_type)
        W = (V.reshape(dc, da, dc, da, k).transpose(1, 3, 0, 2, 4)
             .reshape(da * da, dc * dc * k))
        W2 = apply_batch(e.inner, W, env)
        return (W2.reshape(db, db, dc, dc, k).transpose(2, 0, 3, 1, 4)
                .reshape((dc * db) ** 2, k))

    if isinstance(e, FanoutC):
        if isinstance(e.left_, Arr):
            # out[(j,c),(j',c')] = Σ_{a,a': m[a]=j, m[a']=j'} G[(c,c'),(a,a')] V[(a,a')]
            m = _arr_index_map(e.left_, env)
            G = materialize_super(e.right_, env).action
            dj, dg = dim(e.left_.out_type), dim(e.right_.out_type)
            G4 = G.reshape(dg, dg, di, di)
            T = np.einsum("cdab,abk->abcdk", G4, V.reshape(di, di, k),
                          optimize=True)
            cg = np.arange(dg)
            rows = ((m[:, None, None, None] * dg + cg[None, None, :, None])
                    * (dj * dg)
                    + m[None, :, None, None] * dg + cg[None, None, None, :])
            out = np.zeros(((dj * dg) ** 2, k), dtype=complex)
            np.add.at(out, rows.reshape(-1), T.reshape(di * di * dg * dg, k))
            return out
        # general: duplicate, then first, then second
        rows = ((np.arange(di) * di + np.arange(di))[:, None] * (di * di)
                + (np.arange(di) * di + np.arange(di))[None, :]).reshape(-1)
        W = np.zeros(((di * di) ** 2, k), dtype=complex)
        W[rows] = V
        aa = ProdT(e.in_type, e.in_type)
        step1 = First(e.left_, e.in_type, in_type=aa,
                      out_type=ProdT(e.left_.out_type, e.in_type))
        step2 = Second(e.right_, e.left_.out_type,
                       in_type=step1.out_type, out_type=e.out_type)
        return apply_batch(step2, apply_batch(step1, W, env), env)

    raise EvalError(f"cannot apply pipeline node {e!r}")


def est_cells(e: ClassicExpr) -> int:
    """Rough per-column memory estimate (complex cells) for apply_batch."""
    base = max(dim(e.in_type) ** 2, dim(e.out_type) ** 2)
    if isinstance(e, Compose):
        return max(base, est_cells(e.first_), est_cells(e.then_))
    if isinstance(e, (First, Second)):
        return max(base, est_cells(e.inner) * dim(e.passive) ** 2)
    if isinstance(e, FanoutC):
        di = dim(e.in_type)
        if isinstance(e.left_, Arr):
            return max(base, di * di * dim(e.right_.out_type) ** 2)
        return max(base, di ** 4,
                   est_cells(e.left_) * di ** 2,
                   est_cells(e.right_) * dim(e.left_.out_type) ** 2)
    return base


def materialize_super(e: ClassicExpr, env: dict) -> SuperVal:
    n = dim(e.in_type) ** 2
    block = max(1, min(n, _BUDGET // max(est_cells(e), 1)))
    eye = np.eye(n, dtype=complex)
    parts = [apply_batch(e, eye[:, s:s + block], env)
             for s in range(0, n, block)]
    return SuperVal(e.in_type, e.out_type, np.concatenate(parts, axis=1))


def eval_arrow_abs(t: ArrowAbs, env: dict) -> SuperV:
    pipe = translate_term(t)
    return SuperV(materialize_super(pipe, env))


# --------------------------------------------------------------------------
# Reference semantics (dense, clause-by-clause; for cross-checking)


def reference_super(t: ArrowAbs, env: dict) -> SuperVal:
    if t.type_ is None or not isinstance(t.type_, SuperT):
        raise EvalError("typecheck before evaluating")
    return _ref_command(((t.pat, t.type_.arg),), t.cmd, env)


def _ref_pure(delta, body: Term, in_t: TypeExpr, out_t: TypeExpr,
              env: dict) -> SuperVal:
    fn = PureFun(delta, body)

    def f(elem):
        return value_to_elem(eval_term(body, _fn_env(fn, elem, env)))

    return super_arr(f, in_t, out_t)


def _ref_command(delta, cmd: Command, env: dict) -> SuperVal:
    dtt = delta_tuple_type(delta)

    if isinstance(cmd, CUnit):
        if cmd.mode == "classical":
            return _ref_pure(delta, cmd.content, dtt, cmd.content_type, env)
        fn = PureFun(delta, cmd.content)

        def f(elem):
            v = eval_term(cmd.content, _fn_env(fn, elem, env))
            assert isinstance(v, VecV)
            return v.amp

        return super_from_lin(fun2lin(f, dtt, cmd.content_type),
                              dtt, cmd.content_type)

    if isinstance(cmd, Meas):
        prep = _ref_pure(delta, cmd.arg, dtt, cmd.arg_type, env)
        return super_compose(prep, super_meas(cmd.arg_type))

    if isinstance(cmd, TrL):
        prep = _ref_pure(delta, cmd.arg, dtt, cmd.arg_type, env)
        return super_compose(prep, super_trL(cmd.arg_type))

    if isinstance(cmd, CApp):
        assert isinstance(cmd.fn_type, SuperT)
        prep = _ref_pure(delta, cmd.arg, dtt, cmd.fn_type.arg, env)
        if isinstance(cmd.fn, ArrowAbs):
            fnv = reference_super(cmd.fn, env)
        else:
            v = eval_term(cmd.fn, env)
            if not isinstance(v, SuperV):
                raise EvalError("arrow application of a non-superoperator")
            fnv = v.val
        return super_compose(prep, fnv)

    if isinstance(cmd, CLet):
        bound = _ref_command(delta, cmd.bound, env)
        fan = super_fanout(super_identity(dtt), bound)
        body = _ref_command(delta + ((cmd.pat, cmd.bound_type),), cmd.body, env)
        return super_compose(fan, body)

    raise EvalError(f"cannot evaluate command {cmd!r}")


# --------------------------------------------------------------------------
# Programs


def run_super(s, rho: np.ndarray) -> np.ndarray:
    val = s.val if isinstance(s, SuperV) else s
    return apply_super(val, rho)


def eval_program(prog: Program, base_env: Optional[dict] = None) -> dict:
    env = dict(base_env or {})
    for d in prog.defs:
        env[d.name] = eval_term(d.term, env)
    return env


def materialize_lin(f: Value, in_t: TypeExpr, out_t: TypeExpr) -> np.ndarray:
    """Matrix of a Vec-valued function value (column a = f a)."""
    mat = np.zeros((dim(out_t), dim(in_t)), dtype=complex)
    for i, elem in enumerate(basis(in_t)):
        v = apply_closure(f, elem_to_value(elem))
        if not isinstance(v, VecV):
            raise EvalError("expected a vector-valued function")
        mat[:, i] = v.amp
    return mat
