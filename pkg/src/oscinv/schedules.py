"""Time-indexed parameter curves with two derivatives.

Two representations:

* :class:`ExprSchedule` -- a closed-form expression in ``t`` over the grammar
  ``+ - * / ^``, functions ``sin cos exp sqrt log``, numbers and ``pi``.
  Derivatives are exact (symbolic); evaluation runs through the compiled
  kernel backend.
* :class:`SampledSchedule` -- uniformly sampled values interpolated by a
  not-a-knot cubic spline; derivatives come from the interpolant.
"""

from __future__ import annotations

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from ._kernels import eval_program
from ._kernels.programs import TIME_SYMBOL, Program, compile_expr
from .errors import DomainError, ScheduleParseError

__all__ = [
    "ExprSchedule",
    "SampledSchedule",
    "ScalarSchedule",
    "as_schedule",
    "parse_expression",
]

_TRANSFORMS = standard_transformations + (convert_xor,)
_LOCALS = {"t": TIME_SYMBOL, "pi": sp.pi}


def parse_expression(text: str) -> sp.Expr:
    """Parse an expression string of the schedule grammar into sympy form."""
    try:
        expr = parse_expr(text, local_dict=_LOCALS, transformations=_TRANSFORMS)
    except Exception as exc:  # tokenizer raises several unrelated types
        raise ScheduleParseError(f"could not parse {text!r}: {exc}") from None
    if not isinstance(expr, sp.Expr):
        raise ScheduleParseError(f"not a scalar expression: {text!r}")
    return expr


class ExprSchedule:
    """Closed-form schedule; d1/d2 are exact symbolic derivatives."""

    def __init__(self, expr):
        if isinstance(expr, str):
            expr = parse_expression(expr)
        else:
            expr = sp.sympify(expr)
        self.expr: sp.Expr = expr
        self._d1: sp.Expr = sp.diff(expr, TIME_SYMBOL)
        self._d2: sp.Expr = sp.diff(self._d1, TIME_SYMBOL)
        # compiling also rejects anything outside the grammar
        self._progs: tuple[Program, Program, Program] = (
            compile_expr(expr),
            compile_expr(self._d1),
            compile_expr(self._d2),
        )

    domain = None  # defined for all t

    def _eval(self, k: int, t):
        p = self._progs[k]
        if np.ndim(t) == 0:
            return float(eval_program(p.ops, p.args, p.consts, float(t)))
        return eval_program(p.ops, p.args, p.consts, np.asarray(t, dtype=np.float64))

    def value(self, t):
        return self._eval(0, t)

    def d1(self, t):
        return self._eval(1, t)

    def d2(self, t):
        return self._eval(2, t)

    def derivative(self) -> "ExprSchedule":
        return ExprSchedule(self._d1)

    def kernel_curve(self):
        p = self._progs[0]
        return ("prog", p.ops, p.args, p.consts)

    @property
    def is_constant(self) -> bool:
        return not self.expr.free_symbols

    def __repr__(self):
        return f"ExprSchedule({self.expr})"


class SampledSchedule:
    """Uniformly sampled schedule with cubic-spline value and derivatives."""

    def __init__(self, times, values):
        t = np.asarray(times, dtype=np.float64)
        v = np.asarray(values, dtype=np.float64)
        if t.ndim != 1 or t.shape != v.shape or t.size < 4:
            raise ValueError("need matching 1-d arrays of at least 4 samples")
        steps = np.diff(t)
        if np.any(steps <= 0):
            raise ValueError("sample times must be strictly increasing")
        h = steps.mean()
        if np.max(np.abs(steps - h)) > 1e-8 * max(abs(h), 1.0):
            raise ValueError("sample times must be uniformly spaced")
        self.times = t
        self.values = v
        self.step = float(h)
        self.domain = (float(t[0]), float(t[-1]))
        self._spline = CubicSpline(t, v)
        self._spline_d1 = self._spline.derivative(1)
        self._spline_d2 = self._spline.derivative(2)

    def _check(self, t):
        lo, hi = self.domain
        slack = 1e-9 * max(hi - lo, 1.0)
        if np.any(np.asarray(t) < lo - slack) or np.any(np.asarray(t) > hi + slack):
            raise DomainError(
                f"time outside schedule domain [{lo:g}, {hi:g}]"
            )

    def value(self, t):
        self._check(t)
        out = self._spline(t)
        return float(out) if np.ndim(t) == 0 else out

    def d1(self, t):
        self._check(t)
        out = self._spline_d1(t)
        return float(out) if np.ndim(t) == 0 else out

    def d2(self, t):
        self._check(t)
        out = self._spline_d2(t)
        return float(out) if np.ndim(t) == 0 else out

    def kernel_curve(self):
        return ("spline", self._spline.x, self._spline.c)

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def fd_consistency(self) -> dict:
        """Compare d1/d2 against central finite differences of value().

        Returns the worst relative mismatch for each derivative; both are
        bounded by 10 h^2 for schedules sampled from smooth data.
        """
        t, v, h = self.times, self.values, self.step
        fd1 = (v[2:] - v[:-2]) / (2 * h)
        fd2 = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
        mid = t[1:-1]
        scale1 = max(np.max(np.abs(fd1)), 1e-300)
        scale2 = max(np.max(np.abs(fd2)), 1e-300)
        return {
            "d1": float(np.max(np.abs(self.d1(mid) - fd1)) / scale1),
            "d2": float(np.max(np.abs(self.d2(mid) - fd2)) / scale2),
            "bound": 10.0 * h**2,
        }

    def __repr__(self):
        lo, hi = self.domain
        return f"SampledSchedule({self.times.size} pts on [{lo:g}, {hi:g}])"


ScalarSchedule = (ExprSchedule, SampledSchedule)


def as_schedule(obj) -> ExprSchedule | SampledSchedule:
    """Coerce strings, numbers and sympy expressions into a schedule."""
    if isinstance(obj, ScalarSchedule):
        return obj
    if isinstance(obj, (str, sp.Expr, int, float)):
        return ExprSchedule(obj)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a schedule")
