"""Backend selection for the stepping kernel.

The compiled extension is preferred when it built; the pure-numpy fallback
implements the identical contract.  Set ETDISPATCH_KERNEL=python or =cython
to force a backend (the latter raises if the extension is unavailable).
"""

import logging
import os

from . import _kernel_py

log = logging.getLogger(__name__)

_forced = os.environ.get("ETDISPATCH_KERNEL", "").lower()

try:
    from . import _kernel_cy

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _kernel_cy = None
    HAVE_COMPILED = False

if _forced == "python":
    BACKEND = "python"
    step = _kernel_py.step
elif _forced == "cython":
    if not HAVE_COMPILED:
        raise ImportError(
            "ETDISPATCH_KERNEL=cython but the compiled kernel is not available"
        )
    BACKEND = "cython"
    step = _kernel_cy.step
elif HAVE_COMPILED:
    BACKEND = "cython"
    step = _kernel_cy.step
else:
    BACKEND = "python"
    step = _kernel_py.step
    log.info("compiled kernel unavailable; using the pure-numpy backend")


def get_step(backend: str = None):
    """Return the step function for an explicit backend choice."""
    if backend in (None, BACKEND):
        return step
    if backend == "python":
        return _kernel_py.step
    if backend == "cython":
        if not HAVE_COMPILED:
            raise ImportError("compiled kernel is not available")
        return _kernel_cy.step
    raise ValueError(f"unknown backend {backend!r}")
