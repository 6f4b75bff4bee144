"""Selects the kernel implementation at import time.

The compiled Cython extension is preferred when present; the numpy
fallback keeps the package fully functional without a build step.  Set
``ACCENTOR_PURE_PYTHON=1`` to force the fallback (used by the kernel
benchmark and for debugging).
"""

import os

from . import _kernels_py

if os.environ.get("ACCENTOR_PURE_PYTHON"):
    _impl = _kernels_py
    COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        _impl = _kernels_py
        COMPILED = False

acf_matrix = _impl.acf_matrix
viterbi_lags = _impl.viterbi_lags
