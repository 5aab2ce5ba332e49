"""Scenario JSON schema: load, build, and save.

A scenario file records construction *inputs*; building is deterministic,
so the derived schedules are emitted only as an informational ``derived``
section (ignored on load).  See docs/formats.md for the schema and the
expression grammar.
"""

from __future__ import annotations

from pathlib import Path

import json
import numpy as np

from .errors import ScheduleParseError
from .model import (
    Constants,
    Scenario,
    build_forward_scenario,
    build_inverse_scenario,
)
from .report import canonical_dumps
from .schedules import ExprSchedule, SampledSchedule

__all__ = ["load_scenario", "save_scenario", "scenario_from_dict", "scenario_to_dict"]

_INVERSE_KEYS = ("m1", "m2", "b1", "b2", "rho1")
_FORWARD_KEYS = ("m1", "m2", "b1", "b2", "omega1", "omega2")


def schedule_to_dict(sched) -> dict:
    if isinstance(sched, ExprSchedule):
        return {"kind": "expr", "expr": str(sched.expr)}
    if isinstance(sched, SampledSchedule):
        return {
            "kind": "samples",
            "points": [[float(t), float(v)] for t, v in zip(sched.times, sched.values)],
        }
    raise TypeError(f"cannot serialize schedule of type {type(sched).__name__}")


def schedule_from_dict(data: dict):
    kind = data.get("kind")
    if kind == "expr":
        return ExprSchedule(data["expr"])
    if kind == "samples":
        pts = np.asarray(data["points"], dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ScheduleParseError("samples must be [t, value] pairs")
        return SampledSchedule(pts[:, 0], pts[:, 1])
    raise ScheduleParseError(f"unknown schedule kind {kind!r}")


def _sampled_on_grid(fn, grid) -> dict:
    return {
        "kind": "samples",
        "points": [[float(t), float(v)] for t, v in zip(grid, fn(grid))],
    }


def scenario_from_dict(data: dict) -> Scenario:
    try:
        mode = data["mode"]
        constants = Constants.from_dict(data.get("constants", {}))
        domain = tuple(float(v) for v in data["domain"])
        grid_points = int(data.get("grid_points", 201))
        schedules = {k: schedule_from_dict(v) for k, v in data["schedules"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScheduleParseError):
            raise
        raise ScheduleParseError(f"invalid scenario document: {exc}") from None

    if mode in ("inverse", "inverse-constructed"):
        missing = [k for k in _INVERSE_KEYS if k not in schedules]
        if missing:
            raise ScheduleParseError(f"missing schedules: {missing}")
        return build_inverse_scenario(
            constants,
            schedules["m1"],
            schedules["m2"],
            schedules["b1"],
            schedules["b2"],
            schedules["rho1"],
            float(data.get("d0", 0.0)),
            domain,
            grid_points,
        )
    if mode in ("forward", "forward-uncoupled"):
        missing = [k for k in _FORWARD_KEYS if k not in schedules]
        if missing:
            raise ScheduleParseError(f"missing schedules: {missing}")
        if float(data.get("d0", 0.0)) != 0.0:
            raise ScheduleParseError("forward mode supports only d0 = 0")
        try:
            rho_init = [
                (float(r), float(v))
                for r, v in zip(data["rho_init"]["rho"], data["rho_init"]["rho_dot"])
            ]
        except (KeyError, TypeError, ValueError):
            raise ScheduleParseError("forward mode requires rho_init") from None
        return build_forward_scenario(
            constants,
            (schedules["m1"], schedules["m2"]),
            (schedules["b1"], schedules["b2"]),
            (schedules["omega1"], schedules["omega2"]),
            rho_init,
            domain,
            grid_points,
        )
    raise ScheduleParseError(f"unknown scenario mode {mode!r}")


def scenario_to_dict(scenario: Scenario, include_derived: bool = True) -> dict:
    doc: dict = {
        "format": "oscinv-scenario",
        "mode": "inverse" if scenario.mode == "inverse-constructed" else "forward-uncoupled",
        "constants": scenario.constants.to_dict(),
        "domain": list(scenario.domain),
        "grid_points": int(scenario.grid.size),
        "d0": scenario.d0,
    }
    if scenario.mode == "inverse-constructed":
        rho1 = scenario.rho[0].schedule
        doc["schedules"] = {
            "m1": schedule_to_dict(scenario.m[0]),
            "m2": schedule_to_dict(scenario.m[1]),
            "b1": schedule_to_dict(scenario.b[0]),
            "b2": schedule_to_dict(scenario.b[1]),
            "rho1": schedule_to_dict(rho1)
            if rho1 is not None
            else _sampled_on_grid(scenario.rho[0].rho, scenario.grid),
        }
    else:
        # forward inputs are frequencies; the squared schedules the scenario
        # carries go under "derived"
        doc["schedules"] = {
            "m1": schedule_to_dict(scenario.m[0]),
            "m2": schedule_to_dict(scenario.m[1]),
            "b1": schedule_to_dict(scenario.b[0]),
            "b2": schedule_to_dict(scenario.b[1]),
        }
        src = scenario.source or {}
        if "omega" in src:
            doc["schedules"]["omega1"] = schedule_to_dict(src["omega"][0])
            doc["schedules"]["omega2"] = schedule_to_dict(src["omega"][1])
        doc["rho_init"] = {
            "rho": [float(scenario.rho[j].rho(scenario.domain[0])) for j in range(2)],
            "rho_dot": [
                float(scenario.rho[j].rho_dot(scenario.domain[0])) for j in range(2)
            ],
        }
    if include_derived:
        doc["derived"] = {
            "omega1_sq": schedule_to_dict(scenario.omega_sq[0]),
            "omega2_sq": schedule_to_dict(scenario.omega_sq[1]),
            "d": schedule_to_dict(scenario.d),
            "rho2": schedule_to_dict(scenario.rho[1].schedule)
            if scenario.rho[1].schedule is not None
            else _sampled_on_grid(scenario.rho[1].rho, scenario.grid),
        }
    return doc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScheduleParseError(f"invalid JSON in {path}: {exc}") from None
    return scenario_from_dict(data)


def save_scenario(path, scenario: Scenario, include_derived: bool = True) -> Path:
    path = Path(path)
    path.write_text(
        canonical_dumps(scenario_to_dict(scenario, include_derived)), encoding="utf-8"
    )
    return path
