"""Kernel backend selection.

The Cython extension is used when it was built; ``KGB_LAB_PURE=1`` forces
the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
if not os.environ.get("KGB_LAB_PURE"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    else:
        BACKEND = "cython"
else:
    _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py

exp_filter_sum = _impl.exp_filter_sum
quadratic_forms = _impl.quadratic_forms
