"""Compilation of closed-form expressions to flat stack programs.

Schedules built from expression trees are compiled once into a postfix
opcode/constant representation that both kernel backends evaluate without
touching the symbolic layer again.  The opcode values are mirrored as
literals in the compiled extension; ``tests/test_backends.py`` pins the
correspondence.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
import sympy as sp

from ..errors import ScheduleParseError

__all__ = ["Op", "Program", "compile_expr", "TIME_SYMBOL"]

TIME_SYMBOL = sp.Symbol("t", real=True)

MAX_STACK = 64


class Op(IntEnum):
    CONST = 0
    VAR_T = 1
    ADD = 2
    SUB = 3
    MUL = 4
    DIV = 5
    POW = 6
    NEG = 7
    SIN = 8
    COS = 9
    EXP = 10
    LOG = 11
    SQRT = 12


_UNARY = {sp.sin: Op.SIN, sp.cos: Op.COS, sp.exp: Op.EXP, sp.log: Op.LOG}


@dataclass(frozen=True)
class Program:
    """Flat postfix program over the single variable t."""

    ops: np.ndarray      # uint8, opcodes
    args: np.ndarray     # int32, constant index for CONST, -1 otherwise
    consts: np.ndarray   # float64 pool
    stack_need: int

    def __post_init__(self):
        if self.stack_need > MAX_STACK:
            raise ScheduleParseError("expression too deep to compile")


class _Emitter:
    def __init__(self):
        self.ops: list[int] = []
        self.args: list[int] = []
        self.consts: list[float] = []
        self.depth = 0
        self.max_depth = 0

    def emit(self, op: Op, arg: int = -1):
        self.ops.append(int(op))
        self.args.append(arg)
        if op in (Op.CONST, Op.VAR_T):
            self.depth += 1
        elif op in (Op.ADD, Op.SUB, Op.MUL, Op.DIV, Op.POW):
            self.depth -= 1
        self.max_depth = max(self.max_depth, self.depth)

    def const(self, value: float):
        try:
            idx = self.consts.index(value)
        except ValueError:
            idx = len(self.consts)
            self.consts.append(value)
        self.emit(Op.CONST, idx)


def _compile_node(expr: sp.Expr, em: _Emitter) -> None:
    if expr is TIME_SYMBOL or expr == TIME_SYMBOL:
        em.emit(Op.VAR_T)
        return
    if expr.is_Number or (expr.is_number and not expr.free_symbols):
        em.const(float(expr))
        return
    if isinstance(expr, sp.Add):
        terms = expr.args
        _compile_node(terms[0], em)
        for term in terms[1:]:
            _compile_node(term, em)
            em.emit(Op.ADD)
        return
    if isinstance(expr, sp.Mul):
        factors = expr.args
        _compile_node(factors[0], em)
        for factor in factors[1:]:
            _compile_node(factor, em)
            em.emit(Op.MUL)
        return
    if isinstance(expr, sp.Pow):
        base, exponent = expr.args
        if exponent == sp.Rational(1, 2):
            _compile_node(base, em)
            em.emit(Op.SQRT)
            return
        if exponent == sp.Rational(-1, 2):
            em.const(1.0)
            _compile_node(base, em)
            em.emit(Op.SQRT)
            em.emit(Op.DIV)
            return
        if exponent == sp.Integer(-1):
            em.const(1.0)
            _compile_node(base, em)
            em.emit(Op.DIV)
            return
        _compile_node(base, em)
        _compile_node(exponent, em)
        em.emit(Op.POW)
        return
    for func, op in _UNARY.items():
        if isinstance(expr, func):
            _compile_node(expr.args[0], em)
            em.emit(op)
            return
    raise ScheduleParseError(f"unsupported operation in expression: {expr!r}")


def compile_expr(expr: sp.Expr) -> Program:
    """Compile a sympy expression in t into a :class:`Program`.

    Only the schedule grammar is accepted: +, -, *, /, ^ (constant or
    general exponents), sin, cos, exp, sqrt, log, numbers and t.
    """
    bad = expr.free_symbols - {TIME_SYMBOL}
    if bad:
        names = ", ".join(sorted(str(s) for s in bad))
        raise ScheduleParseError(f"unknown symbol(s) in expression: {names}")
    em = _Emitter()
    _compile_node(sp.sympify(expr), em)
    return Program(
        ops=np.asarray(em.ops, dtype=np.uint8),
        args=np.asarray(em.args, dtype=np.int32),
        consts=np.asarray(em.consts, dtype=np.float64),
        stack_need=em.max_depth,
    )
