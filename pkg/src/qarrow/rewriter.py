"""Equational rewriting: single-step law application, normalization with
replayable traces, and an equality prover.

Laws operate on *elaborated* trees (so unit modes and vector types are
known).  Each law has a canonical left-to-right direction, which is the
reducing one; the reverse direction is supported only where it is
deterministic and needs no type information.

Positions are paths: tuples of child indices, with the child order fixed
per node class (see ``node_children``).  ``normalize`` repeatedly applies
the first law (in a fixed priority order) at the leftmost-outermost
applicable position, recording one step per rewrite; the recorded trace
replays exactly via ``apply_law_at``.

Definition unfolding (``delta``) is restricted to definitions that are not
arrow abstractions; programs are non-recursive, so unfolding terminates.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .evaluator import (apply_closure, BoolV, ClosureV, elem_to_value,
                        eval_term, PairV, run_super, SuperV, VecV)
from .linalg import basis, dim, pure_density
from .syntax import (alpha_eq, App, ArrowAbs, BoolLit, BoolT, CApp, CLet,
                     CUnit, Eq, free_vars, Fst, FunT, If, is_classical, Lam,
                     Let, Meas, MZero, Node, Pair, pattern_names,
                     pattern_subst, pattern_term, pretty, ProdT, PVar, Snd,
                     subst_map, SuperT, Term, TrL, type_str, TypeExpr, Var,
                     VecAdd, VecLet, VecScale, VecSub, VecT, VecUnit)
from .typecheck import elaborate_term, TypeCheckError


class RewriteError(Exception):
    pass


class Law(Enum):
    BETA_ARROW = "beta~>"
    ETA_ARROW = "eta~>"
    LEFT_UNIT = "left"
    RIGHT_UNIT = "right"
    ASSOC = "assoc"
    BETA_FUN = "beta"
    ETA_FUN = "eta"
    BETA_PAIR1 = "beta.1"
    BETA_PAIR2 = "beta.2"
    ETA_PAIR = "eta.x"
    LET_SUBST = "let"
    IF_TRUE = "if.true"
    IF_FALSE = "if.false"
    EQ_LIT = "eq.lit"
    EQ_TRUE = "eq.true"
    IF_DISTRIB = "if.distrib"
    IF_ETA = "if.eta"
    BIND_LEFT = "bind.left"
    BIND_RIGHT = "bind.right"
    BIND_ASSOC = "bind.assoc"
    ZERO_BIND = "zero.bind"
    BIND_ZERO = "bind.zero"
    ZERO_PLUS = "zero.plus"
    PLUS_ZERO = "plus.zero"
    PLUS_ASSOC = "plus.assoc"
    BIND_PLUS = "bind.plus"
    DELTA = "delta"

    @property
    def display(self) -> str:
        return self.value


def law_by_name(name: str) -> Law:
    for law in Law:
        if law.value == name or law.name.lower() == name.lower():
            return law
    raise RewriteError(f"unknown law {name!r}")


# --------------------------------------------------------------------------
# Paths

_CHILD_FIELDS: dict[type, tuple[str, ...]] = {
    Var: (), BoolLit: (), MZero: (),
    Pair: ("left", "right"), Fst: ("arg",), Snd: ("arg",),
    Eq: ("left", "right"), Lam: ("body",), App: ("fn", "arg"),
    Let: ("bound", "body"), VecLet: ("bound", "body"),
    If: ("cond", "then", "orelse"), VecUnit: ("content",),
    VecAdd: ("left", "right"), VecSub: ("left", "right"),
    VecScale: ("arg",), ArrowAbs: ("cmd",),
    CApp: ("fn", "arg"), CUnit: ("content",), CLet: ("bound", "body"),
    Meas: ("arg",), TrL: ("arg",),
}


def node_children(node: Node) -> tuple[Node, ...]:
    fields = _CHILD_FIELDS[type(node)]
    return tuple(getattr(node, f) for f in fields)


def get_at(node: Node, path: tuple[int, ...]) -> Node:
    for i in path:
        fields = _CHILD_FIELDS[type(node)]
        if i >= len(fields):
            raise RewriteError(f"path {path} leaves the tree")
        node = getattr(node, fields[i])
    return node


def replace_at(node: Node, path: tuple[int, ...], new: Node) -> Node:
    if not path:
        return new
    fields = _CHILD_FIELDS[type(node)]
    i = path[0]
    if i >= len(fields):
        raise RewriteError(f"path {path} leaves the tree")
    child = replace_at(getattr(node, fields[i]), path[1:], new)
    return dataclasses.replace(node, **{fields[i]: child})


# --------------------------------------------------------------------------
# Law matchers: node -> rewritten node, or None if not applicable


def _beta_arrow(rw, n):
    if isinstance(n, CApp) and isinstance(n.fn, ArrowAbs):
        return subst_map(n.fn.cmd, pattern_subst(n.fn.pat, n.arg))
    return None


def _eta_arrow(rw, n):
    if (isinstance(n, ArrowAbs) and isinstance(n.pat, PVar)
            and isinstance(n.cmd, CApp) and isinstance(n.cmd.arg, Var)
            and n.cmd.arg.name == n.pat.name
            and n.pat.name not in free_vars(n.cmd.fn)):
        return n.cmd.fn
    return None


def _left_unit(rw, n):
    if (isinstance(n, CLet) and isinstance(n.bound, CUnit)
            and n.bound.mode == "classical"):
        return subst_map(n.body, pattern_subst(n.pat, n.bound.content))
    return None


def _right_unit(rw, n):
    if (isinstance(n, CLet) and isinstance(n.body, CUnit)
            and n.body.mode == "classical"
            and alpha_eq(n.body.content, pattern_term(n.pat))):
        return n.bound
    return None


def _assoc(rw, n):
    # let y <= (let x <= P in Q) in R  ==>  let x <= P in let y <= Q in R
    if (isinstance(n, CLet) and isinstance(n.bound, CLet)
            and not set(pattern_names(n.bound.pat)) & free_vars(n.body)
            and not set(pattern_names(n.bound.pat)) & set(pattern_names(n.pat))):
        inner = CLet(n.pat, n.bound.body, n.body, bound_type=n.bound_type)
        return CLet(n.bound.pat, n.bound.bound, inner,
                    bound_type=n.bound.bound_type)
    return None


def _assoc_r(rw, n):
    if (isinstance(n, CLet) and isinstance(n.body, CLet)
            and not set(pattern_names(n.pat)) & free_vars(n.body.body)
            and not set(pattern_names(n.pat)) & set(pattern_names(n.body.pat))):
        outer_bound = CLet(n.pat, n.bound, n.body.bound,
                           bound_type=n.bound_type)
        return CLet(n.body.pat, outer_bound, n.body.body,
                    bound_type=n.body.bound_type)
    return None


def _beta_fun(rw, n):
    if isinstance(n, App) and isinstance(n.fn, Lam):
        return subst_map(n.fn.body, pattern_subst(n.fn.pat, n.arg))
    return None


def _eta_fun(rw, n):
    if (isinstance(n, Lam) and isinstance(n.pat, PVar)
            and isinstance(n.body, App) and isinstance(n.body.arg, Var)
            and n.body.arg.name == n.pat.name
            and n.pat.name not in free_vars(n.body.fn)):
        return n.body.fn
    return None


def _beta_pair1(rw, n):
    if isinstance(n, Fst) and isinstance(n.arg, Pair):
        return n.arg.left
    return None


def _beta_pair2(rw, n):
    if isinstance(n, Snd) and isinstance(n.arg, Pair):
        return n.arg.right
    return None


def _eta_pair(rw, n):
    if (isinstance(n, Pair) and isinstance(n.left, Fst)
            and isinstance(n.right, Snd)
            and alpha_eq(n.left.arg, n.right.arg)):
        return n.left.arg
    return None


def _let_subst(rw, n):
    if isinstance(n, Let):
        return subst_map(n.body, pattern_subst(n.pat, n.bound))
    return None


def _if_true(rw, n):
    if isinstance(n, If) and isinstance(n.cond, BoolLit) and n.cond.value:
        return n.then
    return None


def _if_false(rw, n):
    if isinstance(n, If) and isinstance(n.cond, BoolLit) and not n.cond.value:
        return n.orelse
    return None


def _eq_lit(rw, n):
    if (isinstance(n, Eq) and isinstance(n.left, BoolLit)
            and isinstance(n.right, BoolLit)):
        return BoolLit(n.left.value == n.right.value)
    return None


def _eq_true(rw, n):
    if isinstance(n, Eq) and isinstance(n.right, BoolLit) and n.right.value:
        return n.left
    if isinstance(n, Eq) and isinstance(n.left, BoolLit) and n.left.value:
        return n.right
    return None


def _if_distrib(rw, n):
    if isinstance(n, If) and isinstance(n.cond, If):
        c = n.cond
        return If(c.cond, If(c.then, n.then, n.orelse),
                  If(c.orelse, n.then, n.orelse))
    return None


def _if_distrib_r(rw, n):
    if (isinstance(n, If) and isinstance(n.then, If)
            and isinstance(n.orelse, If)
            and alpha_eq(n.then.then, n.orelse.then)
            and alpha_eq(n.then.orelse, n.orelse.orelse)):
        return If(If(n.cond, n.then.cond, n.orelse.cond),
                  n.then.then, n.then.orelse)
    return None


def _if_eta(rw, n):
    if (isinstance(n, If) and isinstance(n.then, BoolLit) and n.then.value
            and isinstance(n.orelse, BoolLit) and not n.orelse.value):
        return n.cond
    return None


def _bind_left(rw, n):
    if isinstance(n, VecLet) and isinstance(n.bound, VecUnit):
        return subst_map(n.body, pattern_subst(n.pat, n.bound.content))
    return None


def _bind_right(rw, n):
    if (isinstance(n, VecLet) and isinstance(n.body, VecUnit)
            and alpha_eq(n.body.content, pattern_term(n.pat))):
        return n.bound
    return None


def _bind_assoc(rw, n):
    if (isinstance(n, VecLet) and isinstance(n.bound, VecLet)
            and not set(pattern_names(n.bound.pat)) & free_vars(n.body)
            and not set(pattern_names(n.bound.pat)) & set(pattern_names(n.pat))):
        inner = VecLet(n.pat, n.bound.body, n.body, type_=n.type_)
        return VecLet(n.bound.pat, n.bound.bound, inner, type_=n.type_)
    return None


def _bind_assoc_r(rw, n):
    if (isinstance(n, VecLet) and isinstance(n.body, VecLet)
            and not set(pattern_names(n.pat)) & free_vars(n.body.body)
            and not set(pattern_names(n.pat)) & set(pattern_names(n.body.pat))):
        # the type of the regrouped bound (that of the inner bound term) is
        # not recorded on the node; re-elaborate before normalizing further
        outer_bound = VecLet(n.pat, n.bound, n.body.bound, type_=None)
        return VecLet(n.body.pat, outer_bound, n.body.body, type_=n.body.type_)
    return None


def _zero_bind(rw, n):
    if isinstance(n, VecLet) and isinstance(n.bound, MZero):
        if n.type_ is None:
            return None
        return MZero(type_=n.type_)
    return None


def _bind_zero(rw, n):
    if isinstance(n, VecLet) and isinstance(n.body, MZero):
        return MZero(type_=n.body.type_ or n.type_)
    return None


def _zero_plus(rw, n):
    if isinstance(n, VecAdd) and isinstance(n.left, MZero):
        return n.right
    return None


def _plus_zero(rw, n):
    if isinstance(n, VecAdd) and isinstance(n.right, MZero):
        return n.left
    return None


def _plus_assoc(rw, n):
    if isinstance(n, VecAdd) and isinstance(n.left, VecAdd):
        return VecAdd(n.left.left, VecAdd(n.left.right, n.right))
    return None


def _plus_assoc_r(rw, n):
    if isinstance(n, VecAdd) and isinstance(n.right, VecAdd):
        return VecAdd(VecAdd(n.left, n.right.left), n.right.right)
    return None


def _bind_plus(rw, n):
    if isinstance(n, VecLet) and isinstance(n.bound, VecAdd):
        return VecAdd(VecLet(n.pat, n.bound.left, n.body, type_=n.type_),
                      VecLet(n.pat, n.bound.right, n.body, type_=n.type_))
    return None


def _bind_plus_r(rw, n):
    if (isinstance(n, VecAdd) and isinstance(n.left, VecLet)
            and isinstance(n.right, VecLet)
            and n.left.pat == n.right.pat
            and alpha_eq(n.left.body, n.right.body)):
        return VecLet(n.left.pat, VecAdd(n.left.bound, n.right.bound),
                      n.left.body, type_=n.left.type_)
    return None


def _delta(rw, n):
    if isinstance(n, Var) and n.name in rw.unfold:
        return rw.unfold[n.name]
    return None


_L2R: dict[Law, Callable] = {
    Law.BETA_ARROW: _beta_arrow, Law.ETA_ARROW: _eta_arrow,
    Law.LEFT_UNIT: _left_unit, Law.RIGHT_UNIT: _right_unit,
    Law.ASSOC: _assoc, Law.BETA_FUN: _beta_fun, Law.ETA_FUN: _eta_fun,
    Law.BETA_PAIR1: _beta_pair1, Law.BETA_PAIR2: _beta_pair2,
    Law.ETA_PAIR: _eta_pair, Law.LET_SUBST: _let_subst,
    Law.IF_TRUE: _if_true, Law.IF_FALSE: _if_false, Law.EQ_LIT: _eq_lit,
    Law.EQ_TRUE: _eq_true, Law.IF_DISTRIB: _if_distrib, Law.IF_ETA: _if_eta,
    Law.BIND_LEFT: _bind_left, Law.BIND_RIGHT: _bind_right,
    Law.BIND_ASSOC: _bind_assoc, Law.ZERO_BIND: _zero_bind,
    Law.BIND_ZERO: _bind_zero, Law.ZERO_PLUS: _zero_plus,
    Law.PLUS_ZERO: _plus_zero, Law.PLUS_ASSOC: _plus_assoc,
    Law.BIND_PLUS: _bind_plus, Law.DELTA: _delta,
}

_R2L: dict[Law, Callable] = {
    Law.ASSOC: _assoc_r, Law.BIND_ASSOC: _bind_assoc_r,
    Law.PLUS_ASSOC: _plus_assoc_r, Law.IF_DISTRIB: _if_distrib_r,
    Law.BIND_PLUS: _bind_plus_r,
}

# priority order for automatic normalization (reducing laws only; the
# eta/assoc family and the distributing bind.plus are manual-only)
AUTO_LAWS: tuple[Law, ...] = (
    Law.BETA_ARROW, Law.LEFT_UNIT, Law.RIGHT_UNIT,
    Law.BETA_FUN, Law.BETA_PAIR1, Law.BETA_PAIR2, Law.LET_SUBST,
    Law.IF_TRUE, Law.IF_FALSE, Law.EQ_LIT, Law.EQ_TRUE,
    Law.IF_DISTRIB, Law.IF_ETA,
    Law.BIND_LEFT, Law.BIND_RIGHT, Law.ZERO_BIND, Law.BIND_ZERO,
    Law.ZERO_PLUS, Law.PLUS_ZERO,
    Law.DELTA,
)


# --------------------------------------------------------------------------
# Traces


@dataclass(frozen=True)
class Step:
    law: Law
    path: tuple[int, ...]
    direction: str          # "L2R" | "R2L"
    result: Node            # whole tree after this step


@dataclass(frozen=True)
class ProofTrace:
    start: Node
    steps: tuple[Step, ...]
    end: Node
    complete: bool          # False when fuel ran out

    def laws(self) -> list[Law]:
        return [s.law for s in self.steps]


def render_trace(trace: ProofTrace) -> str:
    lines = ["    " + pretty(trace.start)]
    for step in trace.steps:
        lines.append(f"= {{ {step.law.display} }}")
        lines.append("    " + pretty(step.result))
    if not trace.complete:
        lines.append("-- fuel exhausted; not a normal form")
    return "\n".join(lines)


def trace_to_json(trace: ProofTrace) -> dict:
    return {
        "start": pretty(trace.start),
        "steps": [{"law": s.law.display,
                   "path": list(s.path),
                   "direction": s.direction,
                   "result": pretty(s.result)} for s in trace.steps],
        "end": pretty(trace.end),
        "complete": trace.complete,
    }


# --------------------------------------------------------------------------
# The rewriter


class Rewriter:
    def __init__(self, defs: Optional[dict[str, Term]] = None,
                 fuel: int = 10000):
        defs = defs or {}
        self.unfold: dict[str, Term] = {
            name: term for name, term in defs.items()
            if not isinstance(term, ArrowAbs)
        }
        self.fuel = fuel

    def try_law(self, node: Node, law: Law,
                direction: str = "L2R") -> Optional[Node]:
        table = _L2R if direction == "L2R" else _R2L
        fn = table.get(law)
        if fn is None:
            raise RewriteError(
                f"direction {direction} is not supported for {law.display}")
        return fn(self, node)

    def apply_law_at(self, root: Node, path: tuple[int, ...], law: Law,
                     direction: str = "L2R") -> Node:
        target = get_at(root, path)
        new = self.try_law(target, law, direction)
        if new is None:
            raise RewriteError(
                f"{law.display} ({direction}) is not applicable at {path}")
        return replace_at(root, path, new)

    def _find_redex(self, node: Node,
                    path: tuple[int, ...] = ()) -> Optional[tuple]:
        for law in AUTO_LAWS:
            new = _L2R[law](self, node)
            if new is not None:
                return path, law, new
        for i, child in enumerate(node_children(node)):
            found = self._find_redex(child, path + (i,))
            if found is not None:
                return found
        return None

    def normalize(self, node: Node, fuel: Optional[int] = None) -> ProofTrace:
        fuel = self.fuel if fuel is None else fuel
        start = node
        steps: list[Step] = []
        complete = True
        while True:
            found = self._find_redex(node)
            if found is None:
                break
            if fuel <= 0:
                complete = False
                break
            path, law, new = found
            node = replace_at(node, path, new)
            steps.append(Step(law, path, "L2R", node))
            fuel -= 1
        return ProofTrace(start, tuple(steps), node, complete)

    def replay(self, trace: ProofTrace) -> bool:
        node = trace.start
        for step in trace.steps:
            node = self.apply_law_at(node, step.path, step.law, step.direction)
            if not alpha_eq(node, step.result):
                return False
        return alpha_eq(node, trace.end)


def apply_law_at(root: Node, path: tuple[int, ...], law: Law,
                 direction: str = "L2R",
                 defs: Optional[dict[str, Term]] = None) -> Node:
    return Rewriter(defs).apply_law_at(root, path, law, direction)


def normalize(node: Node, defs: Optional[dict[str, Term]] = None,
              fuel: int = 10000) -> ProofTrace:
    return Rewriter(defs, fuel).normalize(node)


# --------------------------------------------------------------------------
# Equality prover


@dataclass(frozen=True)
class ProvedByNormalization:
    left_trace: ProofTrace
    right_trace: ProofTrace

    kind = "proved-by-normalization"

    def describe(self) -> str:
        n = len(self.left_trace.steps) + len(self.right_trace.steps)
        return f"equal: both sides normalize to the same term ({n} steps)"


@dataclass(frozen=True)
class ProvedSemantically:
    max_diff: float
    left_trace: ProofTrace
    right_trace: ProofTrace

    kind = "proved-semantically"

    def describe(self) -> str:
        return (f"equal: normal forms differ syntactically but denotations "
                f"agree (max deviation {self.max_diff:.3e})")


@dataclass(frozen=True)
class NotEqual:
    reason: str
    witness: Optional[np.ndarray] = None
    left_value: Optional[np.ndarray] = None
    right_value: Optional[np.ndarray] = None

    kind = "not-equal"

    def describe(self) -> str:
        return f"not equal: {self.reason}"


@dataclass(frozen=True)
class Unknown:
    reason: str

    kind = "unknown"

    def describe(self) -> str:
        return f"unknown: {self.reason}"


def _witness_states(d: int):
    """A tomographically spanning family of pure states."""
    for k in range(d):
        amp = np.zeros(d, dtype=complex)
        amp[k] = 1.0
        yield amp
    for i in range(d):
        for j in range(i + 1, d):
            for phase in (1.0, -1.0, 1j, -1j):
                amp = np.zeros(d, dtype=complex)
                amp[i] = 2 ** -0.5
                amp[j] = phase * 2 ** -0.5
                yield amp


def _compare_values(a, b, t: TypeExpr, tol: float):
    """Returns (max_diff, witness_or_None) or raises Unknown via None."""
    if isinstance(a, BoolV) and isinstance(b, BoolV):
        return (0.0, None) if a.value == b.value else (1.0, None)
    if isinstance(a, PairV) and isinstance(b, PairV) and isinstance(t, ProdT):
        d1, w1 = _compare_values(a.left, b.left, t.left, tol)
        d2, w2 = _compare_values(a.right, b.right, t.right, tol)
        return (max(d1, d2), w1 if d1 >= d2 else w2)
    if isinstance(a, VecV) and isinstance(b, VecV):
        return (float(np.max(np.abs(a.amp - b.amp))), None)
    if isinstance(a, SuperV) and isinstance(b, SuperV):
        diff = float(np.max(np.abs(a.val.action - b.val.action)))
        if diff <= tol:
            return (diff, None)
        best, best_rho = 0.0, None
        for amp in _witness_states(dim(a.val.in_type)):
            rho = pure_density(amp)
            gap = float(np.max(np.abs(run_super(a, rho) - run_super(b, rho))))
            if gap > best:
                best, best_rho = gap, rho
        return (diff, (best, best_rho))
    if (isinstance(a, ClosureV) and isinstance(b, ClosureV)
            and isinstance(t, FunT) and is_classical(t.arg)):
        worst = 0.0
        wit = None
        for elem in basis(t.arg):
            va = apply_closure(a, elem_to_value(elem))
            vb = apply_closure(b, elem_to_value(elem))
            d, w = _compare_values(va, vb, t.res, tol)
            if d > worst:
                worst, wit = d, w
        return (worst, wit)
    return (float("nan"), None)


def value_diff(a, b, t: TypeExpr, tol: float = 1e-9) -> float:
    """Largest observable difference between two values of type `t`.

    Booleans differ by 0 or 1, vectors by amplitude gap, superoperators by
    matrix-entry gap, and classical-argument closures pointwise over the
    argument basis.  Returns NaN when the values are incomparable.
    """
    diff, _ = _compare_values(a, b, t, tol)
    return diff


def prove_equal(left: Term, right: Term, *, types: dict, env: dict,
                defs: Optional[dict[str, Term]] = None,
                fuel: int = 10000, tol: float = 1e-9):
    """Decide whether two terms are equal: first by normalization, then by
    evaluating closed terms and comparing denotations."""
    lt = rt = None
    left_err = right_err = None
    try:
        lt, left2 = elaborate_term(types, left)
    except TypeCheckError as e:
        left_err = e
    try:
        rt, right2 = elaborate_term(types, right)
    except TypeCheckError as e:
        right_err = e
    try:
        # one side may be ambiguous on its own; borrow the other's type
        if lt is None and rt is not None:
            lt, left2 = elaborate_term(types, left, rt)
        elif rt is None and lt is not None:
            rt, right2 = elaborate_term(types, right, lt)
    except TypeCheckError as e:
        return Unknown(f"typechecking failed: {e.render()}")
    if lt is None or rt is None:
        err = left_err or right_err
        return Unknown(f"typechecking failed: {err.render()}")
    if type_str(lt) != type_str(rt):
        return NotEqual(f"types differ: {type_str(lt)} vs {type_str(rt)}")

    rw = Rewriter(defs, fuel)
    ltr = rw.normalize(left2)
    rtr = rw.normalize(right2)
    if ltr.complete and rtr.complete and alpha_eq(ltr.end, rtr.end):
        return ProvedByNormalization(ltr, rtr)

    closed = (free_vars(left2) | free_vars(right2)) <= set(env.keys())
    if closed:
        va = eval_term(left2, env)
        vb = eval_term(right2, env)
        diff, wit = _compare_values(va, vb, lt, tol)
        if diff != diff:  # NaN: incomparable values
            return Unknown("values of this type cannot be compared "
                           "extensionally")
        if diff <= tol:
            return ProvedSemantically(diff, ltr, rtr)
        if isinstance(wit, tuple):
            gap, rho = wit
            if gap > 1e-6:
                return NotEqual(
                    f"denotations differ (max deviation {diff:.3e}); a pure "
                    f"state separates them by {gap:.3e}",
                    witness=rho)
            return Unknown(
                f"matrix actions differ by {diff:.3e} but no probed state "
                f"separates them beyond 1e-6")
        if diff > 1e-6:
            return NotEqual(f"denotations differ (max deviation {diff:.3e})",
                            witness=wit)
        return Unknown(f"denotations differ by {diff:.3e}, between the "
                       f"tolerance {tol:g} and 1e-6")

    if not (ltr.complete and rtr.complete):
        return Unknown("normalization ran out of fuel")
    return Unknown("open terms with distinct normal forms")
