"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The active backend is chosen once at import time:

* ``XLQG_KERNELS=numpy``  force the pure-numpy implementations
* ``XLQG_KERNELS=numba``  require numba (ImportError if missing)
* unset / ``auto``        use numba when importable, else numpy

``KERNEL_BACKEND`` records which path won.  Both paths implement the same
signatures, so callers import names from this package only.
"""

import os

from . import numpy_impl

_choice = os.environ.get("XLQG_KERNELS", "auto").strip().lower()

if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"XLQG_KERNELS must be one of auto/numba/numpy, got {_choice!r}"
    )

if _choice == "numpy":
    _impl = numpy_impl
    KERNEL_BACKEND = "numpy"
elif _choice == "numba":
    from . import numba_impl as _impl
    KERNEL_BACKEND = "numba"
else:
    try:
        from . import numba_impl as _impl
        KERNEL_BACKEND = "numba"
    except ImportError:
        _impl = numpy_impl
        KERNEL_BACKEND = "numpy"

softmax_rows = _impl.softmax_rows
softmax_rows_backward = _impl.softmax_rows_backward
layer_norm_forward = _impl.layer_norm_forward
layer_norm_backward = _impl.layer_norm_backward
cross_entropy = _impl.cross_entropy
adamw_update = _impl.adamw_update
embedding_grad = _impl.embedding_grad
lcs_length = _impl.lcs_length

__all__ = [
    "KERNEL_BACKEND",
    "softmax_rows",
    "softmax_rows_backward",
    "layer_norm_forward",
    "layer_norm_backward",
    "cross_entropy",
    "adamw_update",
    "embedding_grad",
    "lcs_length",
]
