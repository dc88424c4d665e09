"""Backend selection for the numeric hot loops.

The compiled extension is used when it imports; setting
ARTIFACT_PURE_PYTHON=1 forces the NumPy fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

_compiled = None
if os.environ.get("ARTIFACT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py


def backends() -> dict:
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    else:
        try:
            from . import _kernels
            out["cython"] = _kernels
        except ImportError:
            pass
    return out


horner_many = _impl.horner_many
horner_abs_many = _impl.horner_abs_many
arg_increments = _impl.arg_increments
poly_eval_many = _impl.poly_eval_many
