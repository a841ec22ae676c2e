"""Backend selection for the hot sub-step kernel.

The compiled extension is used when it imports; set ``DIRACWALK_PURE_PYTHON=1``
to force the NumPy fallback.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _ext
except ImportError:  # extension not built
    _ext = None

HAVE_CYTHON = _ext is not None

if HAVE_CYTHON and not os.environ.get("DIRACWALK_PURE_PYTHON"):
    BACKEND = "cython"
    substep = _ext.substep
else:
    BACKEND = "python"
    substep = _kernels_py.substep


def get_substep(backend: str | None = None):
    """Return the kernel for ``backend`` ("cython", "python" or None for the default)."""
    if backend is None:
        return substep
    if backend == "python":
        return _kernels_py.substep
    if backend == "cython":
        if _ext is None:
            raise ImportError("the compiled kernel extension is not built")
        return _ext.substep
    raise ValueError(f"unknown backend {backend!r}")
