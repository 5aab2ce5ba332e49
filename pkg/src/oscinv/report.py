"""Deterministic report serialization.

Identical inputs must produce byte-identical artifacts, so JSON is emitted
with sorted keys and every float printed at 17 significant digits; CSV uses
the same float format.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = ["canonical_dumps", "format_float", "write_csv", "write_json"]


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _emit(obj, out: list):
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool | np.bool_):
        out.append("true" if obj else "false")
    elif isinstance(obj, int | np.integer):
        out.append(str(int(obj)))
    elif isinstance(obj, float | np.floating):
        x = float(obj)
        out.append(format_float(x) if np.isfinite(x) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        out.append("[")
        for i, item in enumerate(seq):
            if i:
                out.append(", ")
            _emit(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_dumps(obj) -> str:
    out: list[str] = []
    _emit(obj, out)
    out.append("\n")
    return "".join(out)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(canonical_dumps(obj), encoding="utf-8")
    return path


def write_csv(path, header, rows) -> Path:
    """Write rows of numbers (or strings) with deterministic float formatting."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, str):
                cells.append(cell)
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            else:
                cells.append(format_float(cell))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
