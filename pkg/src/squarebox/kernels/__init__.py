"""Forward-pass kernels with a compiled hot path and a numpy fallback.

The Cython extension is preferred when it built successfully; set the
environment variable ``SQUAREBOX_PURE_KERNELS=1`` to force the numpy
implementation (used by the benchmark and the backend-equivalence tests).
"""

import os

from . import _pure

try:
    from . import _fast
except ImportError:
    _fast = None

_force_pure = os.environ.get("SQUAREBOX_PURE_KERNELS", "") not in ("", "0")

if _fast is not None and not _force_pure:
    BACKEND = "cython"
    conv2d_forward = _fast.conv2d_forward
    dense_forward = _fast.dense_forward
else:
    BACKEND = "pure"
    conv2d_forward = _pure.conv2d_forward
    dense_forward = _pure.dense_forward

__all__ = ["BACKEND", "conv2d_forward", "dense_forward"]
