"""Kernel dispatch: the compiled extension when importable, else numpy.

Set ``ZEROTEMP_PURE=1`` to force the fallback (used by the benchmark and by
the backend-parity tests).
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("ZEROTEMP_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

logsumexp_in = _impl.logsumexp_in
maxplus_apply = _impl.maxplus_apply
log_power_iteration = _impl.log_power_iteration
karp = _impl.karp
maxplus_closure = _impl.maxplus_closure

__all__ = [
    "BACKEND",
    "logsumexp_in",
    "maxplus_apply",
    "log_power_iteration",
    "karp",
    "maxplus_closure",
]
