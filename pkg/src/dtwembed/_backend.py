"""Kernel backend selection.

Hot loops (banded DTW, coordinate sweeps) exist twice: a numba ``@njit``
version and a pure-numpy version. The numba path is used when numba imports
and ``DTWEMBED_DISABLE_NUMBA`` is unset (or ``0``). ``set_backend`` switches at
runtime, which the tests and the benchmark use to compare both.
"""
from __future__ import annotations

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_ENV_FLAG = "DTWEMBED_DISABLE_NUMBA"


def _default_backend() -> str:
    flag = os.environ.get(_ENV_FLAG, "").strip().lower()
    if flag not in ("", "0", "false", "no") or not HAVE_NUMBA:
        return "numpy"
    return "numba"


_active = _default_backend()


def get_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _active = name


def kernels():
    """Return the kernel module for the active backend."""
    if _active == "numba":
        from . import _kernels_numba as mod
    else:
        from . import _kernels_numpy as mod
    return mod
