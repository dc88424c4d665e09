"""Exact conversions between mpmath numbers and python-flint balls."""
from __future__ import annotations

import mpmath
from flint import acb, arb, arf
from mpmath import mpc, mpf


def mpf_to_arb(x) -> arb:
    x = mpmath.mpf(x)
    if not mpmath.isfinite(x):
        raise ValueError("non-finite value")
    sign, man, exp, _ = x._mpf_
    man = -int(man) if sign else int(man)
    return arb(arf((man, int(exp))))


def to_acb(z) -> acb:
    if isinstance(z, acb):
        return z
    if isinstance(z, arb):
        return acb(z)
    z = mpmath.mpmathify(z)
    if isinstance(z, mpc):
        return acb(mpf_to_arb(z.real), mpf_to_arb(z.imag))
    return acb(mpf_to_arb(z))


def to_mpc(a) -> mpc:
    """Midpoint of a flint ball as an mpmath complex number."""
    return mpmath.mpc(mpmath.mpmathify(a))


def to_mpf(a) -> mpf:
    return mpmath.mpf(mpmath.mpmathify(a))


def rad_of(a) -> mpf:
    """Upper bound on the radius of an acb/arb ball."""
    if isinstance(a, acb):
        return mpmath.mpf(mpmath.mpmathify(a.real.rad())) + mpmath.mpf(mpmath.mpmathify(a.imag.rad()))
    return mpmath.mpf(mpmath.mpmathify(a.rad()))


def acb_abs_upper(a) -> mpf:
    return mpmath.mpmathify(a.abs_upper())


def scaled_complex(a: acb, log2_scale: int) -> complex:
    """complex(a * 2^-log2_scale) without overflow in between."""
    m = a.mid()
    re = mpmath.ldexp(mpmath.mpmathify(m.real), -log2_scale)
    im = mpmath.ldexp(mpmath.mpmathify(m.imag), -log2_scale)
    return complex(float(re), float(im))
