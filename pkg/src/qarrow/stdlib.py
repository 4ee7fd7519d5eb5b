"""Bundled prelude: parse, typecheck and evaluate it once, then share."""

from __future__ import annotations

from dataclasses import dataclass
from importlib.resources import files

from .evaluator import eval_program
from .parser import parse_program
from .syntax import Program, TypeExpr
from .typecheck import elaborate_program


def prelude_source() -> str:
    return files("qarrow").joinpath("prelude.qarr").read_text(encoding="utf-8")


@dataclass(frozen=True)
class Prelude:
    program: Program            # elaborated definitions
    types: dict                 # name -> TypeExpr
    env: dict                   # name -> evaluated Value


_cached: Prelude | None = None


def load_prelude() -> Prelude:
    global _cached
    if _cached is None:
        prog = parse_program(prelude_source(), "prelude.qarr")
        types, elaborated = elaborate_program(prog)
        env = eval_program(elaborated)
        _cached = Prelude(elaborated, types, env)
    return _cached


def prelude_types() -> dict[str, TypeExpr]:
    return dict(load_prelude().types)


def prelude_env() -> dict:
    return dict(load_prelude().env)


def prelude_program() -> Program:
    return load_prelude().program
