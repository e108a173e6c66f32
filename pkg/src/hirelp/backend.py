"""Selects the compiled rounding kernel, falling back to pure Python.

Set ``HIRELP_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and the backend-equivalence tests).
"""

from __future__ import annotations

import os

from . import _gkps_py

if os.environ.get("HIRELP_PURE_PYTHON"):
    _impl = _gkps_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _gkps_py
        BACKEND = "python"

gkps_core = _impl.gkps_core
gkps_batch = _impl.gkps_batch


def backends() -> dict[str, object]:
    """All importable backends, keyed by name (for benchmarks and tests)."""
    found: dict[str, object] = {"python": _gkps_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
