"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The compiled extension is selected at import time when present; set
``HYPERCRIT_FORCE_PYTHON_KERNELS=1`` to force the fallback.  Both backends
consume the random stream identically, so results are bitwise reproducible
across them for a fixed seed.
"""

import os

from ._pure import LOG_U_MIN, STOP_BUDGET, STOP_FROZEN, STOP_HORIZON, U_MIN

_force_python = os.environ.get("HYPERCRIT_FORCE_PYTHON_KERNELS", "0") not in ("", "0")

if _force_python:
    from ._pure import run_walk, wk_segment

    BACKEND = "python"
else:
    try:
        from ._core import run_walk, wk_segment

        BACKEND = "compiled"
    except ImportError:  # built without the extension
        from ._pure import run_walk, wk_segment

        BACKEND = "python"


def backend() -> str:
    """Name of the kernel backend in use: "compiled" or "python"."""
    return BACKEND


__all__ = [
    "BACKEND",
    "LOG_U_MIN",
    "STOP_BUDGET",
    "STOP_FROZEN",
    "STOP_HORIZON",
    "U_MIN",
    "backend",
    "run_walk",
    "wk_segment",
]
