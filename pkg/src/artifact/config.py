"""Global working precision shared by mpmath and python-flint."""
from __future__ import annotations

import contextlib

import flint
import mpmath

DEFAULT_PRECISION = 256

_state = {"bits": DEFAULT_PRECISION}


def get_precision() -> int:
    return _state["bits"]


def set_precision(bits: int) -> None:
    bits = int(bits)
    if bits < 64:
        raise ValueError("precision must be at least 64 bits")
    _state["bits"] = bits
    mpmath.mp.prec = bits
    flint.ctx.prec = bits
    # series operations silently truncate at ctx.cap
    flint.ctx.cap = max(flint.ctx.cap, 1 << 16)


@contextlib.contextmanager
def precision(bits: int):
    old = get_precision()
    set_precision(bits)
    try:
        yield
    finally:
        set_precision(old)


def rel_tol() -> mpmath.mpf:
    """Relative tolerance used for every magnitude comparison."""
    return mpmath.ldexp(1, -(get_precision() - 32))


set_precision(DEFAULT_PRECISION)
