"""Pure-Python fallback kernels.

Mirrors the compiled extension exactly: same opcodes, same Dormand-Prince
5(4) tableau, same step controller.  Scalar arithmetic uses plain floats so
results match the C implementation to rounding.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import IntegrationError, NonPositiveRhoError

BACKEND_NAME = "pure"

# Dormand-Prince 5(4) pair.  Row 7 of A equals b: first-same-as-last.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_MAX_FACTOR = 10.0
_MIN_FACTOR = 0.2
_SAFETY = 0.9


def _eval_scalar(ops, args, consts, t):
    stack = []
    push = stack.append
    for i in range(len(ops)):
        op = ops[i]
        if op == 0:
            push(consts[args[i]])
        elif op == 1:
            push(t)
        elif op == 2:
            b = stack.pop()
            stack[-1] += b
        elif op == 3:
            b = stack.pop()
            stack[-1] -= b
        elif op == 4:
            b = stack.pop()
            stack[-1] *= b
        elif op == 5:
            b = stack.pop()
            try:
                stack[-1] /= b
            except ZeroDivisionError:
                stack[-1] = math.nan if stack[-1] == 0 else math.copysign(math.inf, stack[-1]) * math.copysign(1.0, b)
        elif op == 6:
            b = stack.pop()
            try:
                stack[-1] = math.pow(stack[-1], b)
            except ValueError:
                stack[-1] = math.nan
            except OverflowError:
                stack[-1] = math.inf
        elif op == 7:
            stack[-1] = -stack[-1]
        elif op == 8:
            stack[-1] = math.sin(stack[-1])
        elif op == 9:
            stack[-1] = math.cos(stack[-1])
        elif op == 10:
            try:
                stack[-1] = math.exp(stack[-1])
            except OverflowError:
                stack[-1] = math.inf
        elif op == 11:
            a = stack[-1]
            stack[-1] = math.log(a) if a > 0.0 else (-math.inf if a == 0.0 else math.nan)
        elif op == 12:
            a = stack[-1]
            stack[-1] = math.sqrt(a) if a >= 0.0 else math.nan
    return stack[-1]


def _eval_array(ops, args, consts, t):
    stack = []
    push = stack.append
    with np.errstate(all="ignore"):
        for i in range(len(ops)):
            op = ops[i]
            if op == 0:
                push(np.full_like(t, consts[args[i]]))
            elif op == 1:
                push(t.copy())
            elif op == 2:
                b = stack.pop()
                stack[-1] += b
            elif op == 3:
                b = stack.pop()
                stack[-1] -= b
            elif op == 4:
                b = stack.pop()
                stack[-1] *= b
            elif op == 5:
                b = stack.pop()
                stack[-1] /= b
            elif op == 6:
                b = stack.pop()
                stack[-1] = np.power(stack[-1], b)
            elif op == 7:
                stack[-1] = -stack[-1]
            elif op == 8:
                stack[-1] = np.sin(stack[-1])
            elif op == 9:
                stack[-1] = np.cos(stack[-1])
            elif op == 10:
                stack[-1] = np.exp(stack[-1])
            elif op == 11:
                stack[-1] = np.log(stack[-1])
            elif op == 12:
                stack[-1] = np.sqrt(stack[-1])
    return stack[-1]


def eval_program(ops, args, consts, t):
    """Evaluate a compiled schedule program at scalar or array t."""
    if isinstance(t, np.ndarray):
        return _eval_array(ops, args, consts, np.asarray(t, dtype=np.float64))
    return _eval_scalar(ops, args, consts, float(t))


def _spline_value(bp, coef, t):
    # piecewise cubic in (t - bp[i]); end segments extrapolate
    i = int(np.searchsorted(bp, t, side="right")) - 1
    if i < 0:
        i = 0
    elif i > len(bp) - 2:
        i = len(bp) - 2
    s = t - bp[i]
    return ((coef[0, i] * s + coef[1, i]) * s + coef[2, i]) * s + coef[3, i]


def eval_curve(curve, t):
    kind = curve[0]
    if kind == "prog":
        return _eval_scalar(curve[1], curve[2], curve[3], t)
    if kind == "spline":
        return _spline_value(curve[1], curve[2], t)
    return curve[1]  # const


def _rhs_ermakov(curves, t, y, out):
    a = eval_curve(curves[0], t)
    b = eval_curve(curves[1], t)
    c = eval_curve(curves[2], t)
    r, v = y
    r3 = r * r * r
    out[0] = v
    try:
        out[1] = -a * v - b * r + c / r3
    except ZeroDivisionError:
        out[1] = math.inf


def _rhs_classical(curves, t, y, out):
    m1 = eval_curve(curves[0], t)
    m2 = eval_curve(curves[1], t)
    b1 = eval_curve(curves[2], t)
    b2 = eval_curve(curves[3], t)
    w1 = eval_curve(curves[4], t)
    w2 = eval_curve(curves[5], t)
    d = eval_curve(curves[6], t)
    x1, x2, p1, p2 = y
    out[0] = p1 / m1 + b1 * x1
    out[1] = p2 / m2 + b2 * x2
    out[2] = -b1 * p1 - m1 * w1 * x1 - d * x2
    out[3] = -b2 * p2 - m2 * w2 * x2 - d * x1


def _integrate(rhs, curves, y0, t_out, rtol, atol, max_steps, rho_floor=None):
    ndim = len(y0)
    nout = len(t_out)
    out = np.empty((nout, ndim))
    y = list(y0)
    t = float(t_out[0])
    out[0] = y
    if rho_floor is not None and y[0] <= rho_floor:
        raise NonPositiveRhoError("nonpositive rho")
    if nout == 1:
        return out

    k = [[0.0] * ndim for _ in range(7)]
    ytmp = [0.0] * ndim
    ynew = [0.0] * ndim
    rhs(curves, t, y, k[0])

    span = float(t_out[-1]) - t
    if span <= 0.0:
        raise IntegrationError("output grid must be increasing")
    h_prop = span * 1e-3
    i_out = 1
    steps = 0
    while i_out < nout:
        target = float(t_out[i_out])
        if target <= t:
            out[i_out] = y
            i_out += 1
            continue
        capped = t + h_prop >= target
        h = target - t if capped else h_prop

        for s in range(1, 7):
            arow = _A[s]
            for j in range(ndim):
                acc = 0.0
                for q in range(s):
                    acc += arow[q] * k[q][j]
                ytmp[j] = y[j] + h * acc
            rhs(curves, t + _C[s] * h, ytmp, k[s])
        # stage 6 used row b: ytmp holds the 5th-order solution
        for j in range(ndim):
            ynew[j] = ytmp[j]

        err = 0.0
        bad = False
        for j in range(ndim):
            eacc = 0.0
            for q in range(7):
                eacc += _E[q] * k[q][j]
            eacc *= h
            sc = atol + rtol * max(abs(y[j]), abs(ynew[j]))
            r = eacc / sc
            if math.isnan(r) or math.isinf(r):
                bad = True
                break
            err += r * r
        err = math.sqrt(err / ndim) if not bad else math.inf

        steps += 1
        if steps > max_steps:
            raise IntegrationError("maximum step count exceeded")

        if err <= 1.0:
            t = target if capped else t + h
            for j in range(ndim):
                y[j] = ynew[j]
            for j in range(ndim):
                k[0][j] = k[6][j]
            if rho_floor is not None and y[0] <= rho_floor:
                raise NonPositiveRhoError(
                    f"rho crossed floor {rho_floor:g} at t={t:.6g}"
                )
            if capped:
                out[i_out] = y
                i_out += 1
            factor = _MAX_FACTOR if err == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            )
        else:
            factor = max(_MIN_FACTOR, _SAFETY * err ** -0.2) if math.isfinite(err) else _MIN_FACTOR
        h_prop = h * factor
        if h_prop <= 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t:.6g}")
    return out


def solve_ermakov_ode(curves, rho0, v0, t_out, rtol, atol, rho_floor, max_steps=1_000_000):
    """Integrate rho'' = -A(t) rho' - B(t) rho + C(t)/rho^3 over t_out.

    Returns an array (len(t_out), 2) of (rho, rho').
    """
    return _integrate(
        _rhs_ermakov, curves, (float(rho0), float(v0)),
        np.asarray(t_out, dtype=np.float64), rtol, atol, max_steps,
        rho_floor=rho_floor,
    )


def solve_classical_ode(curves, y0, t_out, rtol, atol, max_steps=1_000_000):
    """Integrate the coupled-oscillator phase flow; returns (n, 4) samples."""
    return _integrate(
        _rhs_classical, curves, tuple(float(v) for v in y0),
        np.asarray(t_out, dtype=np.float64), rtol, atol, max_steps,
    )


def hermite_functions(nmax, xi):
    """Orthonormal Hermite functions h_0..h_nmax at points xi.

    h_n(x) = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi)); the normalized
    recurrence keeps every intermediate bounded, so no overflow guard is
    needed at any order.
    """
    xi = np.asarray(xi, dtype=np.float64)
    out = np.empty((nmax + 1, xi.size))
    flat = xi.ravel()
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * flat * flat)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * flat * out[0]
    for n in range(1, nmax):
        out[n + 1] = (
            math.sqrt(2.0 / (n + 1)) * flat * out[n]
            - math.sqrt(n / (n + 1)) * out[n - 1]
        )
    return out
