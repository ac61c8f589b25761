"""Select the Bessel-K kernel implementation at import time.

The compiled ``_ckernels`` module is used when it imports; otherwise the numpy
fallback. Setting ``VGMIX_BACKEND=python`` forces the fallback.
"""

import os

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _ckernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("VGMIX_BACKEND", "").lower() != "python":
    kernels = compiled_kernels
    NAME = "cython"
else:
    kernels = python_kernels
    NAME = "python"
