"""Kernel backend selection: numba-jitted loops or pure numpy.

The hot numeric kernels (simplex pivoting, grid-search verification) ship in
two flavors.  The default is the numba build when numba imports cleanly; set
``ACTUPLACE_NUMBA=0`` to force the pure-numpy path, ``ACTUPLACE_NUMBA=1`` to
insist on numba (falls back with a warning if numba is missing).  The active
backend can also be switched at runtime, which is what the benchmark script
and the cross-backend tests do.
"""

import os
import warnings

ENV_FLAG = "ACTUPLACE_NUMBA"

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on stripped installs
    numba = None
    HAS_NUMBA = False


def _default_backend():
    raw = os.environ.get(ENV_FLAG, "").strip().lower()
    if raw in ("0", "false", "off", "numpy"):
        return "numpy"
    if raw in ("1", "true", "on", "numba") and not HAS_NUMBA:
        warnings.warn("numba requested via %s but not importable; using numpy" % ENV_FLAG)
        return "numpy"
    return "numba" if HAS_NUMBA else "numpy"


_backend = _default_backend()


def current_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    """Select 'numba' or 'numpy' for all subsequent kernel calls."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError("unknown backend %r" % (name,))
    if name == "numba" and not HAS_NUMBA:
        raise ValueError("numba backend requested but numba is not installed")
    _backend = name


def jit(**options):
    """Return numba.njit(**options) when available, else a no-op decorator.

    The decorated python function stays importable either way; kernels keep
    an explicit reference to the undecorated version for the numpy path.
    """
    if HAS_NUMBA:
        return numba.njit(**options)

    def passthrough(func):
        return func

    return passthrough
