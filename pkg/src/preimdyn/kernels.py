"""Backend selection for the hot integer kernels.

The compiled extension ``_ckernels`` is used when it was built; otherwise
(or when ``PREIMDYN_PURE_PYTHON=1``) the pure-Python reference module is
used.  ``BACKEND`` records which one is active.
"""

import os

from preimdyn import _pykernels

if os.environ.get("PREIMDYN_PURE_PYTHON") == "1":
    _impl = _pykernels
else:
    try:
        from preimdyn import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

trial_factor = _impl.trial_factor
homog_eval = _impl.homog_eval
exact_isqrt = _impl.exact_isqrt

__all__ = ["BACKEND", "trial_factor", "homog_eval", "exact_isqrt"]
