"""Backend selection for the hot numeric kernels.

Kernels are compiled with numba when it is importable and the environment
variable ``LASSOLAB_DISABLE_NUMBA`` is unset (or ``0``).  Otherwise every
kernel falls back to its pure-numpy implementation.  Both paths are kept in
``lassolab._kernels`` so tests and the benchmark can call either explicitly.
"""

import os

_flag = os.environ.get("LASSOLAB_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    import numba

    NUMBA_AVAILABLE = True
except ImportError:
    numba = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE

numba_default = {
    "nogil": True,
    "cache": True,
    "fastmath": False,
    "error_model": "numpy",
}


def njit(func):
    """Compile ``func`` with the package defaults, or return ``None``."""
    if not NUMBA_AVAILABLE:
        return None
    return numba.njit(**numba_default)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
