"""Selects the stepping kernel for tensor games at import time.

The compiled extension is used when it was built; otherwise the numpy
kernel takes over. Setting ``MIXEDFLOW_PURE_PYTHON=1`` forces the
fallback even when the extension is present.
"""
import os

import numpy as np

from . import _fallback

try:
    if os.environ.get("MIXEDFLOW_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernel requested")
    from . import _kernels
except ImportError:
    _kernels = None

AVAILABLE = ("cython", "python") if _kernels is not None else ("python",)
DEFAULT = AVAILABLE[0]


def advance_tensor(costs, dims, scheme, x, integral, h, n_steps, inner_tol, inner_max,
                   margin, backend=None):
    """Dispatch to the requested kernel; ``backend=None`` picks the default."""
    backend = backend or DEFAULT
    if backend == "cython":
        if _kernels is None:
            raise RuntimeError("compiled kernel not available; build with `pip install -e .`")
        return _kernels.advance_tensor(
            costs, np.asarray(dims, dtype=np.intp), scheme, x, integral, h,
            n_steps, inner_tol, inner_max, margin,
        )
    if backend == "python":
        return _fallback.advance_tensor(
            costs, dims, scheme, x, integral, h, n_steps, inner_tol, inner_max, margin
        )
    raise ValueError(f"unknown backend {backend!r}")
