"""Kernel backend selection.

The compiled extension is used when it imports; set ``LESIONSEG_PURE_PYTHON=1``
to force the numpy fallback (used by the benchmark and the parity tests).
"""
import os

from . import _fallback

NAME = "python"
kernels = _fallback

if os.environ.get("LESIONSEG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        kernels = _compiled
        NAME = "cython"


def compiled():
    """Return the compiled kernel module, or None when it is unavailable."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
