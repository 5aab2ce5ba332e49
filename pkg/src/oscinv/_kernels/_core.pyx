# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: schedule-program evaluation, Dormand-Prince 5(4)
integration of the auxiliary and classical systems, Hermite functions.

Opcode values and the step controller mirror ``pure.py`` exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sin, cos, exp, log, sqrt, pow, fabs, isfinite, INFINITY, pi

from oscinv.errors import IntegrationError, NonPositiveRhoError

BACKEND_NAME = "compiled"

DEF MAXSTACK = 64

cdef double MAX_FACTOR = 10.0
cdef double MIN_FACTOR = 0.2
cdef double SAFETY = 0.9

cdef double[7] C_NODES
cdef double[7][6] A_TAB
cdef double[7] E_TAB

C_NODES = [0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0]
A_TAB[1][0] = 1.0 / 5
A_TAB[2][0] = 3.0 / 40; A_TAB[2][1] = 9.0 / 40
A_TAB[3][0] = 44.0 / 45; A_TAB[3][1] = -56.0 / 15; A_TAB[3][2] = 32.0 / 9
A_TAB[4][0] = 19372.0 / 6561; A_TAB[4][1] = -25360.0 / 2187
A_TAB[4][2] = 64448.0 / 6561; A_TAB[4][3] = -212.0 / 729
A_TAB[5][0] = 9017.0 / 3168; A_TAB[5][1] = -355.0 / 33
A_TAB[5][2] = 46732.0 / 5247; A_TAB[5][3] = 49.0 / 176; A_TAB[5][4] = -5103.0 / 18656
A_TAB[6][0] = 35.0 / 384; A_TAB[6][1] = 0.0; A_TAB[6][2] = 500.0 / 1113
A_TAB[6][3] = 125.0 / 192; A_TAB[6][4] = -2187.0 / 6784; A_TAB[6][5] = 11.0 / 84
E_TAB = [71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
         -17253.0 / 339200, 22.0 / 525, -1.0 / 40]


cdef double _prog_eval(const unsigned char* ops, const int* args,
                       const double* consts, int n, double t) noexcept nogil:
    cdef double stack[MAXSTACK]
    cdef int sp = 0
    cdef int i, op
    for i in range(n):
        op = ops[i]
        if op == 0:      # CONST
            stack[sp] = consts[args[i]]; sp += 1
        elif op == 1:    # VAR_T
            stack[sp] = t; sp += 1
        elif op == 2:    # ADD
            sp -= 1; stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == 3:    # SUB
            sp -= 1; stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == 4:    # MUL
            sp -= 1; stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == 5:    # DIV
            sp -= 1; stack[sp - 1] = stack[sp - 1] / stack[sp]
        elif op == 6:    # POW
            sp -= 1; stack[sp - 1] = pow(stack[sp - 1], stack[sp])
        elif op == 7:    # NEG
            stack[sp - 1] = -stack[sp - 1]
        elif op == 8:    # SIN
            stack[sp - 1] = sin(stack[sp - 1])
        elif op == 9:    # COS
            stack[sp - 1] = cos(stack[sp - 1])
        elif op == 10:   # EXP
            stack[sp - 1] = exp(stack[sp - 1])
        elif op == 11:   # LOG
            stack[sp - 1] = log(stack[sp - 1])
        elif op == 12:   # SQRT
            stack[sp - 1] = sqrt(stack[sp - 1])
    return stack[sp - 1]


cdef struct CurveView:
    int kind  # 0 program, 1 spline, 2 constant
    int nops
    const unsigned char* ops
    const int* args
    const double* consts
    int nseg
    const double* bp
    const double* coef  # row-major (4, nseg)
    double cval


cdef CurveView _curve_view(tup, list keep) except *:
    cdef CurveView v
    v.kind = -1
    v.nops = 0; v.ops = NULL; v.args = NULL; v.consts = NULL
    v.nseg = 0; v.bp = NULL; v.coef = NULL; v.cval = 0.0
    cdef const unsigned char[::1] ops_mv
    cdef const int[::1] args_mv
    cdef const double[::1] dbl_mv
    cdef const double[:, ::1] coef_mv
    if tup[0] == "prog":
        v.kind = 0
        ops_arr = np.ascontiguousarray(tup[1], dtype=np.uint8)
        args_arr = np.ascontiguousarray(tup[2], dtype=np.int32)
        consts_arr = np.ascontiguousarray(tup[3], dtype=np.float64)
        keep += [ops_arr, args_arr, consts_arr]
        ops_mv = ops_arr
        args_mv = args_arr
        v.nops = ops_mv.shape[0]
        v.ops = &ops_mv[0]
        v.args = &args_mv[0]
        if consts_arr.size:
            dbl_mv = consts_arr
            v.consts = &dbl_mv[0]
    elif tup[0] == "spline":
        v.kind = 1
        bp_arr = np.ascontiguousarray(tup[1], dtype=np.float64)
        coef_arr = np.ascontiguousarray(tup[2], dtype=np.float64)
        keep += [bp_arr, coef_arr]
        dbl_mv = bp_arr
        coef_mv = coef_arr
        v.nseg = coef_mv.shape[1]
        v.bp = &dbl_mv[0]
        v.coef = &coef_mv[0, 0]
    elif tup[0] == "const":
        v.kind = 2
        v.cval = float(tup[1])
    else:
        raise ValueError(f"unknown curve kind {tup[0]!r}")
    return v


cdef double _curve_eval(const CurveView* c, double t) noexcept nogil:
    cdef int lo, hi, mid, nseg
    cdef double s
    if c.kind == 0:
        return _prog_eval(c.ops, c.args, c.consts, c.nops, t)
    if c.kind == 2:
        return c.cval
    nseg = c.nseg
    lo = 0; hi = nseg
    while lo < hi:
        mid = (lo + hi) // 2
        if c.bp[mid + 1] > t:
            hi = mid
        else:
            lo = mid + 1
    if lo > nseg - 1:
        lo = nseg - 1
    s = t - c.bp[lo]
    return ((c.coef[lo] * s + c.coef[nseg + lo]) * s
            + c.coef[2 * nseg + lo]) * s + c.coef[3 * nseg + lo]


def eval_program(ops, args, consts, t):
    """Evaluate a compiled schedule program at scalar or array t."""
    ops_arr = np.ascontiguousarray(ops, dtype=np.uint8)
    args_arr = np.ascontiguousarray(args, dtype=np.int32)
    consts_arr = np.ascontiguousarray(consts, dtype=np.float64)
    cdef const unsigned char[::1] o = ops_arr
    cdef const int[::1] a = args_arr
    cdef const double[::1] cpool = consts_arr
    cdef const double* cptr = NULL
    if consts_arr.size:
        cptr = &cpool[0]
    cdef Py_ssize_t i, n
    cdef int nops = o.shape[0]
    cdef double[::1] res
    cdef const double[::1] tv
    if isinstance(t, np.ndarray):
        shape = t.shape
        tflat = np.ascontiguousarray(t, dtype=np.float64).ravel()
        tv = tflat
        n = tv.shape[0]
        out = np.empty(n, dtype=np.float64)
        res = out
        with nogil:
            for i in range(n):
                res[i] = _prog_eval(&o[0], &a[0], cptr, nops, tv[i])
        return out.reshape(shape)
    return _prog_eval(&o[0], &a[0], cptr, nops, <double> t)


cdef void _rhs_ermakov(const CurveView* cv, double t, double* y, double* out) noexcept nogil:
    cdef double a = _curve_eval(&cv[0], t)
    cdef double b = _curve_eval(&cv[1], t)
    cdef double c = _curve_eval(&cv[2], t)
    cdef double r = y[0]
    out[0] = y[1]
    out[1] = -a * y[1] - b * r + c / (r * r * r)


cdef void _rhs_classical(const CurveView* cv, double t, double* y, double* out) noexcept nogil:
    cdef double m1 = _curve_eval(&cv[0], t)
    cdef double m2 = _curve_eval(&cv[1], t)
    cdef double b1 = _curve_eval(&cv[2], t)
    cdef double b2 = _curve_eval(&cv[3], t)
    cdef double w1 = _curve_eval(&cv[4], t)
    cdef double w2 = _curve_eval(&cv[5], t)
    cdef double d = _curve_eval(&cv[6], t)
    out[0] = y[2] / m1 + b1 * y[0]
    out[1] = y[3] / m2 + b2 * y[1]
    out[2] = -b1 * y[2] - m1 * w1 * y[0] - d * y[1]
    out[3] = -b2 * y[3] - m2 * w2 * y[1] - d * y[0]


cdef _integrate(int system, list curve_tups, tuple y0, const double[::1] t_out,
                double rtol, double atol, long max_steps, double rho_floor,
                bint check_floor):
    cdef int ndim = len(y0)
    cdef Py_ssize_t nout = t_out.shape[0]
    out_arr = np.empty((nout, ndim), dtype=np.float64)
    cdef double[:, ::1] out = out_arr

    cdef CurveView cviews[8]
    cdef list keep = []
    cdef int ci
    for ci in range(len(curve_tups)):
        cviews[ci] = _curve_view(curve_tups[ci], keep)

    cdef double k[7][4]
    cdef double y[4]
    cdef double ytmp[4]
    cdef double ynew[4]
    cdef int j, q, s
    cdef double t = t_out[0]
    for j in range(ndim):
        y[j] = y0[j]
        out[0, j] = y[j]
    if check_floor and y[0] <= rho_floor:
        raise NonPositiveRhoError("nonpositive rho")
    if nout == 1:
        return out_arr

    if system == 0:
        _rhs_ermakov(cviews, t, y, k[0])
    else:
        _rhs_classical(cviews, t, y, k[0])

    cdef double span = t_out[nout - 1] - t
    if span <= 0.0:
        raise IntegrationError("output grid must be increasing")
    cdef double h_prop = span * 1e-3
    cdef Py_ssize_t i_out = 1
    cdef long steps = 0
    cdef double target, h, acc, eacc, sc, r, err, factor
    cdef bint capped, bad

    while i_out < nout:
        target = t_out[i_out]
        if target <= t:
            for j in range(ndim):
                out[i_out, j] = y[j]
            i_out += 1
            continue
        capped = t + h_prop >= target
        h = target - t if capped else h_prop

        for s in range(1, 7):
            for j in range(ndim):
                acc = 0.0
                for q in range(s):
                    acc += A_TAB[s][q] * k[q][j]
                ytmp[j] = y[j] + h * acc
            if system == 0:
                _rhs_ermakov(cviews, t + C_NODES[s] * h, ytmp, k[s])
            else:
                _rhs_classical(cviews, t + C_NODES[s] * h, ytmp, k[s])
        for j in range(ndim):
            ynew[j] = ytmp[j]

        err = 0.0
        bad = False
        for j in range(ndim):
            eacc = 0.0
            for q in range(7):
                eacc += E_TAB[q] * k[q][j]
            eacc *= h
            sc = atol + rtol * max(fabs(y[j]), fabs(ynew[j]))
            r = eacc / sc
            if not isfinite(r):
                bad = True
                break
            err += r * r
        err = sqrt(err / ndim) if not bad else INFINITY

        steps += 1
        if steps > max_steps:
            raise IntegrationError("maximum step count exceeded")

        if err <= 1.0:
            t = target if capped else t + h
            for j in range(ndim):
                y[j] = ynew[j]
                k[0][j] = k[6][j]
            if check_floor and y[0] <= rho_floor:
                raise NonPositiveRhoError(
                    f"rho crossed floor {rho_floor:g} at t={t:.6g}"
                )
            if capped:
                for j in range(ndim):
                    out[i_out, j] = y[j]
                i_out += 1
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * pow(err, -0.2)))
        else:
            factor = max(MIN_FACTOR, SAFETY * pow(err, -0.2)) if isfinite(err) else MIN_FACTOR
        h_prop = h * factor
        if h_prop <= 1e-14 * max(1.0, fabs(t)):
            raise IntegrationError(f"step size underflow at t={t:.6g}")
    return out_arr


def solve_ermakov_ode(curves, rho0, v0, t_out, rtol, atol, rho_floor, max_steps=1_000_000):
    """Integrate rho'' = -A(t) rho' - B(t) rho + C(t)/rho^3 over t_out."""
    t = np.ascontiguousarray(t_out, dtype=np.float64)
    return _integrate(0, list(curves), (float(rho0), float(v0)), t,
                      rtol, atol, max_steps, rho_floor, True)


def solve_classical_ode(curves, y0, t_out, rtol, atol, max_steps=1_000_000):
    """Integrate the coupled-oscillator phase flow; returns (n, 4) samples."""
    t = np.ascontiguousarray(t_out, dtype=np.float64)
    return _integrate(1, list(curves), tuple(float(v) for v in y0), t,
                      rtol, atol, max_steps, 0.0, False)


def hermite_functions(nmax, xi):
    """Orthonormal Hermite functions h_0..h_nmax at points xi."""
    xi_flat = np.ascontiguousarray(xi, dtype=np.float64).ravel()
    cdef const double[::1] x = xi_flat
    cdef Py_ssize_t npts = x.shape[0]
    cdef int nm = nmax
    out_arr = np.empty((nm + 1, npts), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i
    cdef int n
    cdef double norm0 = pow(pi, -0.25)
    cdef double c1, c2
    with nogil:
        for i in range(npts):
            out[0, i] = norm0 * exp(-0.5 * x[i] * x[i])
        if nm >= 1:
            for i in range(npts):
                out[1, i] = sqrt(2.0) * x[i] * out[0, i]
        for n in range(1, nm):
            c1 = sqrt(2.0 / (n + 1))
            c2 = sqrt(n / <double> (n + 1))
            for i in range(npts):
                out[n + 1, i] = c1 * x[i] * out[n, i] - c2 * out[n - 1, i]
    return out_arr
