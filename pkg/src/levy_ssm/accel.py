"""Optional numba acceleration for the hot numeric kernels.

Every function decorated with :func:`jit_kernel` is written as plain
numpy/scalar code that runs unmodified in the interpreter.  When numba is
importable (and not disabled) the same function is compiled with ``@njit``.

Set ``LEVY_SSM_NUMBA=0`` in the environment to force the interpreted
fallback; any other value (or leaving it unset) uses numba when available.
The selected mode is fixed at import time.
"""

from __future__ import annotations

import os

_flag = os.environ.get("LEVY_SSM_NUMBA", "1").strip().lower()

if _flag in ("0", "false", "off", "no"):
    NUMBA_ENABLED = False
    _njit = None
else:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False
        _njit = None


def jit_kernel(func):
    """Compile ``func`` with numba when enabled, else return it unchanged."""
    if NUMBA_ENABLED:
        return _njit(cache=True, nogil=True)(func)
    return func


def backend_name() -> str:
    """Human-readable name of the active execution backend."""
    return "numba" if NUMBA_ENABLED else "numpy"
