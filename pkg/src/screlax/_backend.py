"""Kernel backend selection.

The hot numerical kernels are written once and run either as numba-compiled
machine code or as plain numpy, selected by the environment variable
``SCRELAX_BACKEND`` (values ``numba`` or ``numpy``). The default is numba
when it imports cleanly, numpy otherwise.
"""

from __future__ import annotations

import os
import logging

log = logging.getLogger(__name__)

_JIT_CACHE: dict = {}
_NUMBA_OK: bool | None = None


def _numba_available() -> bool:
    global _NUMBA_OK
    if _NUMBA_OK is None:
        try:
            import numba  # noqa: F401

            _NUMBA_OK = True
        except Exception:  # pragma: no cover - depends on environment
            _NUMBA_OK = False
    return _NUMBA_OK


def backend_name(override: str | None = None) -> str:
    """Resolve the active backend name ('numba' or 'numpy')."""
    name = override or os.environ.get("SCRELAX_BACKEND", "").strip().lower()
    if name not in ("numba", "numpy"):
        name = "numba" if _numba_available() else "numpy"
    if name == "numba" and not _numba_available():
        log.warning("numba backend requested but numba is unavailable; using numpy")
        name = "numpy"
    return name


def compile_kernel(func, backend: str | None = None):
    """Return `func` itself (numpy backend) or its numba-compiled form.

    Compiled forms are cached per function. The kernel source must restrict
    itself to the numba-supported numpy subset so that both forms compute
    the same thing.
    """
    name = backend_name(backend)
    if name == "numpy":
        return func
    key = (func.__module__, func.__qualname__)
    if key not in _JIT_CACHE:
        import warnings

        import numba

        # compilation happens lazily at first call; keep its layout chatter out
        warnings.filterwarnings("ignore", category=numba.NumbaPerformanceWarning)
        _JIT_CACHE[key] = numba.njit(cache=True, nogil=True)(func)
    return _JIT_CACHE[key]
