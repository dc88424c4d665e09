"""Truncated power series with a remainder bound on a closed disk."""
from __future__ import annotations

import math
from typing import Sequence

import mpmath
import numpy as np
from flint import acb, acb_poly, arb
from mpmath import mpf

from . import kernels
from .hp import rad_of, to_acb, to_mpc
from .magnitude import BigMagnitude


class TruncatedSeries:
    """f(z) = sum_k c_k z^k + remainder, with |remainder| <= tail on |z| <= radius.

    Coefficients are flint balls; their radii are folded into error_bound().
    """

    __slots__ = ("poly", "radius", "tail", "_coeffs", "_scaled")

    def __init__(self, coeffs, radius=mpmath.inf, tail: BigMagnitude | None = None):
        if isinstance(coeffs, acb_poly):
            self.poly = coeffs
        else:
            self.poly = acb_poly([to_acb(c) for c in coeffs])
        self.radius = mpf(radius)
        self.tail = tail if tail is not None else BigMagnitude.zero()
        self._coeffs = None
        self._scaled = {}

    @classmethod
    def from_polynomial(cls, coeffs: Sequence) -> "TruncatedSeries":
        """Exact univariate polynomial, valid everywhere."""
        return cls(coeffs, mpmath.inf, BigMagnitude.zero())

    def length(self) -> int:
        return self.poly.length()

    def coefficients(self) -> list:
        if self._coeffs is None:
            self._coeffs = self.poly.coeffs()
        return self._coeffs

    def coefficient(self, k: int):
        cs = self.coefficients()
        return to_mpc(cs[k]) if k < len(cs) else mpmath.mpc(0)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coefficients())

    def ball_error(self, r) -> mpf:
        """sum rad(c_k) r^k from the coefficient balls."""
        r = mpf(r)
        total = mpf(0)
        rk = mpf(1)
        for c in self.coefficients():
            total += rad_of(c) * rk
            rk *= r
        return total

    def error_bound(self, r) -> mpf:
        """Bound on |f - midpoint polynomial| over |z| <= r."""
        if r > self.radius * (1 + mpmath.mpf(2) ** -40):
            raise ValueError(f"radius {r} exceeds certified radius {self.radius}")
        return self.tail.value() + self.ball_error(r)

    def abs_sum(self, r) -> mpf:
        """sum |c_k| r^k, an upper bound for |f| on |z| <= r up to the tail."""
        r = mpf(r)
        total = mpf(0)
        rk = mpf(1)
        for c in self.coefficients():
            total += mpmath.mpmathify(c.abs_upper()) * rk
            rk *= r
        return total

    def eval(self, z) -> mpmath.mpc:
        return to_mpc(self.poly(to_acb(z)))

    def eval_ball(self, z) -> acb:
        return self.poly(to_acb(z))

    def derivative(self) -> "TruncatedSeries":
        # the tail of f' is not tracked; callers use it for Newton steps only
        return TruncatedSeries(self.poly.derivative(), self.radius, BigMagnitude.zero())

    def scaled(self, r) -> "ScaledSeries":
        key = mpmath.nstr(mpf(r), 40)
        s = self._scaled.get(key)
        if s is None:
            s = ScaledSeries(self, mpf(r))
            self._scaled[key] = s
        return s

    def __repr__(self):
        return f"TruncatedSeries(length={self.length()}, radius={mpmath.nstr(self.radius, 6)})"


class ScaledSeries:
    """Double-precision view of f on |z| <= r.

    With u = z/r, f(z) = 2^e * sum a_k u^k where max |a_k| is about 1.
    """

    def __init__(self, series: TruncatedSeries, r: mpf):
        self.series = series
        self.r = r
        ra = to_acb(r)
        cs = series.coefficients()
        scaled = []
        pw = acb(1)
        logs = []
        for c in cs:
            v = c * pw
            scaled.append(v)
            m = v.mid()
            if m.is_zero():
                logs.append(-math.inf)
            else:
                logs.append(float(mpmath.log(abs(mpmath.mpmathify(m)), 2)))
            pw = pw * ra
        top = max(logs) if logs else -math.inf
        if top == -math.inf:
            self.log2_scale = 0
            self.a = np.zeros(max(len(cs), 1), dtype=np.complex128)
        else:
            self.log2_scale = int(math.floor(top))
            vals = []
            for v, lg in zip(scaled, logs):
                if lg - self.log2_scale < -1070:
                    vals.append(0j)
                else:
                    m = v.mid()
                    re = mpmath.ldexp(mpmath.mpmathify(m.real), -self.log2_scale)
                    im = mpmath.ldexp(mpmath.mpmathify(m.imag), -self.log2_scale)
                    vals.append(complex(float(re), float(im)))
            self.a = np.array(vals, dtype=np.complex128)
        self.abs_a = np.abs(self.a)
        self.abs_total = float(self.abs_a.sum())
        err = series.error_bound(r) if series.radius >= r else mpmath.inf
        # remainder and ball radii in units of 2^e
        self.rel_error = float(mpmath.ldexp(err, -self.log2_scale)) if err < mpmath.inf else math.inf

    @property
    def log_scale(self) -> float:
        return self.log2_scale * math.log(2)

    def eval_unit(self, u) -> np.ndarray:
        """Values in units of 2^e at u = z/r (|u| <= 1)."""
        u = np.ascontiguousarray(u, dtype=np.complex128)
        return kernels.horner_many(self.a, u)

    def rounding_bound(self, u) -> np.ndarray:
        u = np.ascontiguousarray(np.abs(u), dtype=np.float64)
        return kernels.horner_abs_many(self.abs_a, u) * (4 * len(self.a) * 2.0 ** -52)

    def circle(self, K: int) -> np.ndarray:
        """Values at u_j = exp(2 pi i j / K), in units of 2^e, via FFT."""
        a = self.a
        if len(a) > K:
            folded = np.zeros(K, dtype=np.complex128)
            for start in range(0, len(a), K):
                chunk = a[start:start + K]
                folded[:len(chunk)] += chunk
            a = folded
        return np.fft.ifft(a, n=K) * K
