"""Non-negative magnitudes stored as natural logarithms.

Products are sums of logs computed exactly (mpmath ``exact=True``), so
grouping never changes the result and values like ``e^(-10**6)`` are
ordinary numbers here.
"""
from __future__ import annotations

import functools

import mpmath
from mpmath import mpf


@functools.total_ordering
class BigMagnitude:
    __slots__ = ("_log",)

    def __init__(self, log_value=None):
        # None encodes the magnitude zero
        self._log = None if log_value is None else mpf(log_value)

    @classmethod
    def zero(cls) -> "BigMagnitude":
        return cls(None)

    @classmethod
    def one(cls) -> "BigMagnitude":
        return cls(0)

    @classmethod
    def from_value(cls, x) -> "BigMagnitude":
        x = abs(mpmath.mpmathify(x))
        if x == 0:
            return cls(None)
        return cls(mpmath.log(x))

    @classmethod
    def exp(cls, exponent) -> "BigMagnitude":
        """The magnitude e^exponent."""
        return cls(exponent)

    @property
    def log_value(self):
        return self._log

    @property
    def is_zero(self) -> bool:
        return self._log is None

    def log(self):
        if self._log is None:
            raise ValueError("log of zero magnitude")
        return self._log

    def value(self):
        return mpf(0) if self._log is None else mpmath.exp(self._log)

    def __float__(self) -> float:
        if self._log is None:
            return 0.0
        if self._log < -745:
            return 0.0
        return float(mpmath.exp(self._log))

    def __mul__(self, other):
        other = _coerce(other)
        if self._log is None or other._log is None:
            return BigMagnitude.zero()
        return BigMagnitude(mpmath.fadd(self._log, other._log, exact=True))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other._log is None:
            raise ZeroDivisionError("division by zero magnitude")
        if self._log is None:
            return BigMagnitude.zero()
        return BigMagnitude(mpmath.fsub(self._log, other._log, exact=True))

    def __pow__(self, k):
        if self._log is None:
            if k <= 0:
                raise ValueError("non-positive power of zero magnitude")
            return BigMagnitude.zero()
        return BigMagnitude(mpmath.fmul(self._log, k, exact=isinstance(k, int)))

    def __add__(self, other):
        other = _coerce(other)
        if self._log is None:
            return other
        if other._log is None:
            return self
        hi, lo = (self._log, other._log) if self._log >= other._log else (other._log, self._log)
        return BigMagnitude(hi + mpmath.log1p(mpmath.exp(lo - hi)))

    __radd__ = __add__

    def _key(self):
        return self._log

    def __eq__(self, other):
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self._log == other._log

    def __lt__(self, other):
        other = _coerce(other)
        if self._log is None:
            return other._log is not None
        if other._log is None:
            return False
        return self._log < other._log

    def __hash__(self):
        return hash(self._log)

    def __repr__(self):
        if self._log is None:
            return "BigMagnitude(0)"
        return f"BigMagnitude(exp({mpmath.nstr(self._log, 20)}))"

    def to_json(self):
        """Log value as a decimal string, or None for zero."""
        if self._log is None:
            return None
        return mpmath.nstr(self._log, 30, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)


def _coerce(x) -> BigMagnitude:
    if isinstance(x, BigMagnitude):
        return x
    if isinstance(x, (int, float, mpf)):
        return BigMagnitude.from_value(x)
    raise TypeError(f"cannot use {type(x).__name__} as a magnitude")
