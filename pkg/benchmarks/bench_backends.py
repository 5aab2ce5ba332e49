#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times the three kernel families on representative workloads:

* schedule-program evaluation (scalar loop and vectorized array),
* adaptive integration of the auxiliary and classical systems,
* Hermite-function batches on quadrature-sized grids.

Usage: python benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import time

import numpy as np
import sympy as sp

from oscinv._kernels import available_backends
from oscinv._kernels.programs import compile_expr

T = sp.Symbol("t", real=True)


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = available_backends()
    if len(backends) < 2:
        print("compiled extension not built; benchmarking the pure backend only")

    prog = compile_expr(sp.sqrt(1 + sp.sin(T) / 10) * sp.exp(-T / 50) + T**2 / 100)
    pargs = (prog.ops, prog.args, prog.consts)
    tt = np.linspace(0.0, 20.0, 200_000)

    wsq = compile_expr(1 + sp.sin(T) / 4)
    ermakov_curves = (("const", 0.0), ("prog", wsq.ops, wsq.args, wsq.consts), ("const", 1.0))
    ermakov_grid = np.linspace(0.0, 50.0, 5001)

    classical_curves = (
        ("const", 1.0), ("const", 1.0), ("const", 0.0), ("const", 0.0),
        ("prog", wsq.ops, wsq.args, wsq.consts), ("const", 1.0), ("const", 0.2),
    )
    classical_grid = np.linspace(0.0, 50.0, 2001)
    xi = np.linspace(-10.0, 10.0, 200 * 200)

    cases = {
        "program scalar x20000": lambda mod: [
            mod.eval_program(*pargs, 0.1 * i) for i in range(20_000)
        ],
        "program array 200k": lambda mod: mod.eval_program(*pargs, tt),
        "auxiliary ODE [0,50] rtol 1e-10": lambda mod: mod.solve_ermakov_ode(
            ermakov_curves, 1.1, 0.0, ermakov_grid, 1e-10, 1e-10, 1e-8
        ),
        "classical ODE [0,50] rtol 1e-10": lambda mod: mod.solve_classical_ode(
            classical_curves, (1.0, 0.5, 0.0, 0.0), classical_grid, 1e-10, 1e-10
        ),
        "hermite batch n<=40 on 200^2": lambda mod: mod.hermite_functions(40, xi),
    }

    names = sorted(backends)
    width = max(len(c) for c in cases)
    header = f"{'case':<{width}}  " + "  ".join(f"{n:>12}" for n in names)
    if len(names) == 2:
        header += f"  {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for case, fn in cases.items():
        times = {n: timeit(lambda n=n: fn(backends[n]), args.repeat) for n in names}
        row = f"{case:<{width}}  " + "  ".join(f"{times[n] * 1e3:10.2f}ms" for n in names)
        if len(names) == 2:
            row += f"  {times['pure'] / times['compiled']:8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
