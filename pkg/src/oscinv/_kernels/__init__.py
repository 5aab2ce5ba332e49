"""Kernel backend selection.

The compiled extension is preferred when importable; ``OSCINV_BACKEND=pure``
forces the fallback, ``OSCINV_BACKEND=compiled`` makes a missing extension a
hard error.  Both backends expose the same four callables with identical
semantics; ``benchmarks/bench_backends.py`` compares their speed.
"""

from __future__ import annotations

import os

from . import programs  # noqa: F401  (re-exported for schedule compilation)

_requested = os.environ.get("OSCINV_BACKEND", "").strip().lower()
if _requested not in ("", "pure", "compiled"):
    raise ValueError(
        f"OSCINV_BACKEND must be 'pure' or 'compiled', got {_requested!r}"
    )

if _requested == "pure":
    from . import pure as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "compiled":
            raise
        from . import pure as _impl

eval_program = _impl.eval_program
solve_ermakov_ode = _impl.solve_ermakov_ode
solve_classical_ode = _impl.solve_classical_ode
hermite_functions = _impl.hermite_functions


def backend_name() -> str:
    """Name of the active kernel backend ('compiled' or 'pure')."""
    return _impl.BACKEND_NAME


def available_backends() -> dict:
    """Import every buildable backend module, keyed by name."""
    from . import pure

    found = {"pure": pure}
    try:
        from . import _core  # type: ignore[attr-defined]

        found["compiled"] = _core
    except ImportError:
        pass
    return found
