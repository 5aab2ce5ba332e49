"""Command-line interface.

Subcommands: ``scenario`` (build + validate), ``verify`` (conservation
checks), ``diagonalize`` (decoupling constants), ``spectrum`` (eigenvalue
lattice comparison), ``eigen`` (eigenfunction artifacts).  All outputs are
machine-readable and byte-deterministic.  Exit codes: 0 success, 1 failed
check or domain error, 2 input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import eigenfun, fock, invariant, model, transforms
from .errors import (
    DomainError,
    GridTooCoarseError,
    IntegrationError,
    NonPositiveRhoError,
    NotPositiveDefiniteError,
    ScheduleParseError,
)
from .report import write_csv, write_json
from .scenario_io import load_scenario, save_scenario

_INPUT_ERRORS = (ScheduleParseError, FileNotFoundError, IsADirectoryError)
_CHECK_ERRORS = (
    DomainError,
    NonPositiveRhoError,
    NotPositiveDefiniteError,
    IntegrationError,
    GridTooCoarseError,
)


def _positive(value: str) -> float:
    x = float(value)
    if x <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--scenario", required=True, help="scenario JSON file")
    sub.add_argument("--t0", type=float, default=None, help="start time (default: domain start)")
    sub.add_argument("--t1", type=float, default=None, help="end time (default: domain end)")
    sub.add_argument("--grid", type=int, default=None, help="grid size (meaning is per command)")
    sub.add_argument("--cutoff", type=int, default=None, help="Fock cutoff per mode")
    sub.add_argument("--tol", type=_positive, default=None, help="override check tolerance")
    sub.add_argument("--out", default="oscinv-out", help="output directory")
    sub.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscinv",
        description="Dynamical invariants of two coupled time-dependent oscillators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("scenario", help="build a scenario and validate its invariants")
    _add_common(ps)

    pv = sub.add_parser("verify", help="run the conservation checks")
    _add_common(pv)
    pv.add_argument("--dt", type=_positive, default=1e-4, help="FD step for time derivatives")

    pd = sub.add_parser("diagonalize", help="decoupling constants and their constancy")
    _add_common(pd)

    pp = sub.add_parser("spectrum", help="invariant eigenvalues vs the label lattice")
    _add_common(pp)
    pp.add_argument("--k", type=int, default=10, help="number of eigenvalues to compare")
    pp.add_argument("--dump-matrix", action="store_true",
                    help="also write the invariant matrix as text ('re im' pairs)")

    pe = sub.add_parser("eigen", help="eigenfunction grid dump, overlaps, residuals")
    _add_common(pe)
    pe.add_argument("--nmax", type=int, default=2, help="include labels with n1+n2 <= nmax")
    pe.add_argument("--lengths", type=_positive, default=8.0,
                    help="grid half-width in characteristic lengths")
    return parser


def _span(scenario, args):
    t0 = scenario.domain[0] if args.t0 is None else args.t0
    t1 = scenario.domain[1] if args.t1 is None else args.t1
    scenario.check_time(t0)
    scenario.check_time(t1)
    return t0, t1


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_scenario(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _outdir(args)
    report = model.validate_scenario(scenario)
    closed = all(sol.source == "closed-form" for sol in scenario.rho)
    tol = args.tol or (model.TOL_CONSTRAINT_CLOSED if closed else model.TOL_CONSTRAINT_ODE)
    save_scenario(out / "scenario.json", scenario)
    payload = report.to_dict()
    payload["tolerance"] = tol
    payload["pass"] = report.max_residual() <= tol
    write_json(out / "validation.json", payload)
    print(f"wrote {out / 'scenario.json'}")
    print(f"wrote {out / 'validation.json'}")
    status = "PASS" if payload["pass"] else "FAIL"
    print(f"[{status}] max residual {report.max_residual():.3e} (tol {tol:.1e})")
    return 0 if payload["pass"] else 1


def cmd_verify(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _outdir(args)
    t0, t1 = _span(scenario, args)
    npts = args.grid or 9
    dt = args.dt
    margin = 4.0 * dt
    lo, hi = scenario.domain
    inner0 = max(t0, lo + margin)
    inner1 = min(t1, hi - margin)
    times = np.linspace(inner0, inner1, npts)

    closed = all(sol.source == "closed-form" for sol in scenario.rho)
    defaults = (
        {"coefficient_odes": 1e-8, "conserved_coupling": 1e-9,
         "classical_drift": 1e-8, "lvn_residual": 1e-6}
        if closed
        else {"coefficient_odes": 1e-6, "conserved_coupling": 1e-6,
              "classical_drift": 1e-6, "lvn_residual": 1e-5}
    )
    if args.tol is not None:
        defaults = {k: args.tol for k in defaults}

    checks = {}
    checks["coefficient_odes"] = max(
        invariant.coefficient_ode_residuals(t, scenario, h=dt).max() for t in times
    )

    dense = np.linspace(t0, t1, 201)
    coupling = invariant.conserved_coupling(dense, scenario)
    c0 = coupling[0]
    drift = np.max(np.abs(coupling - c0))
    checks["conserved_coupling"] = float(drift / abs(c0)) if abs(c0) > 0 else float(drift)

    state = invariant.PhaseState(x=(1.0, 0.5), p=(0.0, 0.0), t=t0)
    traj = invariant.integrate_classical(state, np.linspace(t0, t1, 401), scenario)
    drift_report = invariant.invariant_along_trajectory(traj, scenario)
    checks["classical_drift"] = drift_report.max_drift

    cutoff = args.cutoff or 20
    spec = fock.basis_for_scenario(scenario, cutoff)
    checks["lvn_residual"] = max(
        fock.lvn_matrix_residual(t, scenario, spec, dt=dt) for t in times
    )

    results = {
        name: {"value": val, "tolerance": defaults[name], "pass": val <= defaults[name]}
        for name, val in checks.items()
    }
    failing = sorted(name for name, r in results.items() if not r["pass"])
    payload = {"checks": results, "failing": failing, "pass": not failing}
    write_json(out / "verification.json", payload)
    if args.fmt == "csv":
        coeffs = invariant.coefficients_at(traj.t, scenario)
        ivals = invariant.invariant_value(
            traj.x[:, 0], traj.x[:, 1], traj.p[:, 0], traj.p[:, 1], coeffs
        )
        scale = abs(ivals[0]) if abs(ivals[0]) > 0 else 1.0
        residual = np.abs(ivals - ivals[0]) / scale
        rows = np.column_stack([traj.t, traj.x, traj.p, ivals, residual])
        write_csv(
            out / "trajectory.csv",
            ["t", "x1", "x2", "p1", "p2", "I", "residual"],
            rows,
        )
        print(f"wrote {out / 'trajectory.csv'}")
    print(f"wrote {out / 'verification.json'}")
    for name in sorted(results):
        r = results[name]
        print(f"[{'PASS' if r['pass'] else 'FAIL'}] {name}: {r['value']:.3e} (tol {r['tolerance']:.1e})")
    if failing:
        print("failing checks: " + ", ".join(failing), file=sys.stderr)
        return 1
    return 0


def cmd_diagonalize(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _outdir(args)
    t0, t1 = _span(scenario, args)
    data = transforms.decouple(
        invariant.coefficients_at(t0, scenario), scenario.constants
    )
    times = np.linspace(t0, t1, args.grid or 10)
    samples = [
        transforms.decouple(invariant.coefficients_at(t, scenario), scenario.constants)
        for t in times
    ]
    wbar_sq = np.array([s.omega_bar_sq for s in samples])
    phis = np.array([s.phi for s in samples])
    scale = max(np.max(np.abs(wbar_sq)), 1e-300)
    constancy = {
        "omega_bar_sq_drift": float(np.max(np.abs(wbar_sq - wbar_sq[0])) / scale),
        "phi_drift": float(np.max(np.abs(phis - phis[0])) / max(abs(phis[0]), 1.0)),
    }
    payload = data.to_dict()
    payload["constancy"] = constancy
    write_json(out / "diagonalize.json", payload)
    print(f"wrote {out / 'diagonalize.json'}")
    print(
        f"phi={data.phi:.12g} omega_bar_sq=({data.omega_bar_sq[0]:.12g}, "
        f"{data.omega_bar_sq[1]:.12g}) delta_bar={data.delta_bar:.3e}"
    )
    if not data.positive_definite:
        print("not positive definite", file=sys.stderr)
        return 1
    return 0


def cmd_spectrum(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _outdir(args)
    t0, _ = _span(scenario, args)
    cutoff = args.cutoff or 30
    spec = fock.basis_for_scenario(scenario, cutoff, t=t0)
    report = fock.spectrum_check(t0, scenario, spec, k=args.k)
    payload = report.to_dict()
    payload["cutoff"] = cutoff
    write_json(out / "spectrum.json", payload)
    if args.dump_matrix:
        dump = fock.matrix_dump_text(fock.invariant_matrix(t0, scenario, spec))
        (out / "invariant_matrix.txt").write_text(dump, encoding="utf-8")
        print(f"wrote {out / 'invariant_matrix.txt'}")
    print(f"wrote {out / 'spectrum.json'}")
    print(f"max deviation {report.max_deviation:.3e} over {args.k} eigenvalues (N={cutoff})")
    if args.tol is not None and report.max_deviation > args.tol:
        return 1
    return 0


def cmd_eigen(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _outdir(args)
    t0, _ = _span(scenario, args)
    labels = [
        (n1, n2)
        for n1 in range(args.nmax + 1)
        for n2 in range(args.nmax + 1)
        if n1 + n2 <= args.nmax
    ]
    points = args.grid or 200
    quad = eigenfun.grid_for_scenario(t0, scenario, points=points, lengths=args.lengths)
    gram = eigenfun.gram_matrix(labels, t0, scenario, quad)
    eye = np.eye(len(labels))
    gram_payload = {
        "labels": [list(l) for l in labels],
        "gram_real": gram.real,
        "gram_imag": gram.imag,
        "max_defect": float(np.max(np.abs(gram - eye))),
    }
    write_json(out / "gram.json", gram_payload)

    uniform = eigenfun.grid_for_scenario(
        t0, scenario, points=points, lengths=args.lengths, rule="uniform"
    )
    residuals = {
        f"{n1},{n2}": eigenfun.eigen_residual((n1, n2), t0, scenario, uniform)
        for n1, n2 in labels
    }
    write_json(out / "residual.json", {"residuals": residuals})

    dump = eigenfun.grid_for_scenario(t0, scenario, points=max(points // 2, 64),
                                      lengths=args.lengths, rule="uniform")
    x1, _ = dump.axis(0)
    x2, _ = dump.axis(1)
    mesh1, mesh2 = np.meshgrid(x1, x2, indexing="ij")
    table = eigenfun.eigenfunction_table(labels, mesh1.ravel(), mesh2.ravel(), t0, scenario)
    for (n1, n2), values in zip(labels, table):
        rows = np.column_stack(
            [mesh1.ravel(), mesh2.ravel(), values.real, values.imag, np.abs(values) ** 2]
        )
        write_csv(out / f"eigen_{n1}{n2}.csv", ["x1", "x2", "re_u", "im_u", "abs2_u"], rows)
    print(f"wrote {out / 'gram.json'}")
    print(f"wrote {out / 'residual.json'}")
    print(f"wrote {len(labels)} grid dumps to {out}")
    print(f"gram max defect {gram_payload['max_defect']:.3e}")
    tol = args.tol or 1e-6
    return 0 if gram_payload["max_defect"] <= tol else 1


_COMMANDS = {
    "scenario": cmd_scenario,
    "verify": cmd_verify,
    "diagonalize": cmd_diagonalize,
    "spectrum": cmd_spectrum,
    "eigen": cmd_eigen,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _CHECK_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
