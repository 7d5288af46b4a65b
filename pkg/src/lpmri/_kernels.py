"""Select the compiled kernels when available, numpy otherwise.

Set ``LPMRI_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
if not os.environ.get("LPMRI_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

prox_lp_modulus = _impl.prox_lp_modulus
lp_threshold = _impl.lp_threshold
dwt_rows = _impl.dwt_rows
idwt_rows = _impl.idwt_rows

__all__ = ["BACKEND", "prox_lp_modulus", "lp_threshold", "dwt_rows", "idwt_rows"]
