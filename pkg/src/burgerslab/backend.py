"""Kernel backend selection.

The compiled Cython module is used when it imports; otherwise the numpy
fallback.  Set ``BURGERSLAB_BACKEND=python`` to force the fallback.
"""
import logging
import os

from . import _fallback

log = logging.getLogger(__name__)

_requested = os.environ.get("BURGERSLAB_BACKEND", "auto").lower()

compiled = None
if _requested != "python":
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        if _requested == "compiled":
            raise
        log.debug("compiled kernels unavailable, using numpy fallback")

kernels = compiled if compiled is not None else _fallback
NAME = "compiled" if compiled is not None else "python"


def get(name=None):
    """Return a kernel namespace: ``"compiled"``, ``"python"`` or the default."""
    if name is None:
        return kernels
    if name == "python":
        return _fallback
    if name == "compiled":
        if compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return compiled
    raise ValueError(f"unknown backend {name!r}")
