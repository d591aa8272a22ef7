"""Hot-kernel backend selection.

The compiled Cython module is preferred when built; the pure-numpy
fallback is always available. Set RELPROBE_KERNELS=python (or =c) to force
a backend at import time.
"""

import os

from . import _pykernels

_requested = os.environ.get("RELPROBE_KERNELS", "auto")

if _requested in ("auto", "c"):
    try:
        from . import _ckernels as _impl
        BACKEND = "c"
    except ImportError:
        if _requested == "c":
            raise
        _impl = _pykernels
        BACKEND = "python"
elif _requested == "python":
    _impl = _pykernels
    BACKEND = "python"
else:
    raise ValueError(f"RELPROBE_KERNELS must be auto, c or python, got {_requested!r}")

relu_ = _impl.relu_
relu_grad_ = _impl.relu_grad_
dropout_ = _impl.dropout_
softmax_xent = _impl.softmax_xent
adam_ = _impl.adam_


def backend() -> str:
    return BACKEND
