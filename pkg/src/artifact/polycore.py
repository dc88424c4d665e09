"""Integer polynomials, heights, projective norms and distances."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import mpmath
from mpmath import mpc, mpf

from .config import get_precision, rel_tol
from .errors import DomainError
from .magnitude import BigMagnitude

Exponent = tuple


def monomial_exponents(n: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent vectors in n variables of total degree <= degree, graded lex."""
    out = []
    for d in range(degree + 1):
        out.extend(_exact_degree(n, d))
    return out


def _exact_degree(n, d):
    if n == 1:
        return [(d,)]
    res = []
    for first in range(d, -1, -1):
        for rest in _exact_degree(n - 1, d - first):
            res.append((first,) + rest)
    return res


class IntPolynomial:
    """Multivariate polynomial with integer coefficients."""

    __slots__ = ("num_vars", "_terms", "_hash")

    def __init__(self, num_vars: int, terms: Mapping[Sequence[int], int] | None = None):
        if num_vars < 1:
            raise DomainError("num_vars must be positive")
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != num_vars or any(e < 0 for e in exp):
                raise DomainError(f"bad exponent {exp} for {num_vars} variables")
            c = int(c)
            if c:
                clean[exp] = clean.get(exp, 0) + c
                if clean[exp] == 0:
                    del clean[exp]
        self.num_vars = num_vars
        self._terms = dict(sorted(clean.items(), reverse=True))
        self._hash = None

    # construction helpers
    @classmethod
    def variable(cls, i: int, n: int) -> "IntPolynomial":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): 1})

    @classmethod
    def constant(cls, c: int, n: int) -> "IntPolynomial":
        return cls(n, {(0,) * n: c})

    @classmethod
    def from_coefficients(cls, n: int, exps: Sequence[Sequence[int]], coeffs: Iterable[int]):
        return cls(n, {tuple(e): c for e, c in zip(exps, coeffs) if c})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self):
        return len(self._terms)

    def degree(self) -> int:
        if not self._terms:
            raise DomainError("degree of the zero polynomial is undefined")
        return max(sum(e) for e in self._terms)

    def max_abs_coeff(self) -> int:
        if not self._terms:
            raise DomainError("zero polynomial has no height")
        return max(abs(c) for c in self._terms.values())

    def height(self) -> mpf:
        return mpmath.log(self.max_abs_coeff())

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self._terms), default=0)

    # arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return IntPolynomial(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return IntPolynomial(self.num_vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return IntPolynomial(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise DomainError("negative power")
        result = IntPolynomial.constant(1, self.num_vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def _coerce(self, other):
        if isinstance(other, IntPolynomial):
            if other.num_vars != self.num_vars:
                raise DomainError("variable count mismatch")
            return other
        if isinstance(other, int):
            return IntPolynomial.constant(other, self.num_vars)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num_vars, tuple(self._terms.items())))
        return self._hash

    def derivative(self, i: int) -> "IntPolynomial":
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = c * e[i]
        return IntPolynomial(self.num_vars, out)

    # evaluation
    def evaluate(self, point: Sequence) -> mpc:
        """Evaluate at a complex point using the current mpmath precision."""
        if len(point) != self.num_vars:
            raise DomainError("point has wrong dimension")
        point = [mpmath.mpmathify(x) for x in point]
        powers = [_power_table(x, self.degree_in(i)) for i, x in enumerate(point)]
        total = mpc(0)
        for e, c in self._terms.items():
            term = mpf(c)
            for i, a in enumerate(e):
                if a:
                    term = term * powers[i][a]
            total += term
        return total

    def abs_evaluate(self, point_abs: Sequence) -> mpf:
        """Sum of |c| * prod |x_i|^a_i, the usual rounding-error scale."""
        total = mpf(0)
        for e, c in self._terms.items():
            term = mpf(abs(c))
            for x, a in zip(point_abs, e):
                if a:
                    term *= mpf(x) ** a
            total += term
        return total

    # text form
    def to_dict(self) -> dict:
        return {"n": self.num_vars,
                "terms": [[list(e), str(c)] for e, c in self._terms.items()]}

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), separators=(", ", ": "))

    @classmethod
    def from_dict(cls, d: Mapping) -> "IntPolynomial":
        return cls(int(d["n"]), {tuple(e): int(c) for e, c in d["terms"]})

    @classmethod
    def from_text(cls, text: str) -> "IntPolynomial":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in self._terms.items():
            mono = "*".join(f"x{i + 1}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(e) if a)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _power_table(x, d):
    table = [mpmath.mpf(1)]
    for _ in range(d):
        table.append(table[-1] * x)
    return table


def t_of(p: IntPolynomial):
    """(deg p, h(p), deg p + h(p)) with h the natural log of the max coefficient."""
    if p.is_zero():
        raise DomainError("t is undefined for the zero polynomial")
    d = p.degree()
    h = p.height()
    return d, h, d + h


class HomogeneousPolynomial:
    """Homogeneous integer polynomial in X0..Xn."""

    __slots__ = ("num_vars", "_terms", "degree")

    def __init__(self, num_vars: int, terms: Mapping[Sequence[int], int], degree: int | None = None):
        poly = IntPolynomial(num_vars, terms)
        degs = {sum(e) for e in poly._terms}
        if len(degs) > 1:
            raise DomainError("terms of different total degree")
        if degs:
            (d,) = degs
            if degree is not None and degree != d:
                raise DomainError("declared degree disagrees with terms")
            degree = d
        self.num_vars = num_vars
        self._terms = poly._terms
        self.degree = degree if degree is not None else 0

    def items(self):
        return self._terms.items()

    @property
    def terms(self):
        return dict(self._terms)

    def is_zero(self):
        return not self._terms

    def evaluate(self, point: Sequence) -> mpc:
        return IntPolynomial(self.num_vars, self._terms).evaluate(point) if self._terms else mpc(0)

    def __eq__(self, other):
        return (isinstance(other, HomogeneousPolynomial) and self.num_vars == other.num_vars
                and self._terms == other._terms and self.degree == other.degree)

    def __repr__(self):
        return f"HomogeneousPolynomial(deg={self.degree}, {IntPolynomial(self.num_vars, self._terms)!r})"


def homogenize(p: IntPolynomial) -> HomogeneousPolynomial:
    if p.is_zero():
        raise DomainError("cannot homogenize the zero polynomial")
    d = p.degree()
    return HomogeneousPolynomial(p.num_vars + 1,
                                 {(d - sum(e),) + e: c for e, c in p.items()}, d)


def dehomogenize(Q: HomogeneousPolynomial) -> IntPolynomial:
    return IntPolynomial(Q.num_vars - 1, {e[1:]: c for e, c in Q.items()})


def _multinomial(d: int, alpha) -> int:
    out = math.factorial(d)
    for a in alpha:
        out //= math.factorial(a)
    return out


def bombieri_norm(Q: HomogeneousPolynomial) -> BigMagnitude:
    if Q.is_zero():
        raise DomainError("norm of the zero polynomial")
    # exact rational sum, converted once
    s = sum((Fraction(c * c, _multinomial(Q.degree, e)) for e, c in Q.items()), Fraction(0))
    return BigMagnitude(mpmath.log(mpf(s.numerator) / s.denominator) / 2)


def h1(Q: HomogeneousPolynomial) -> mpf:
    return bombieri_norm(Q).log()


@dataclass(frozen=True)
class ProjectivePoint:
    coords: tuple

    def __init__(self, coords: Sequence):
        cs = tuple(mpmath.mpmathify(c) for c in coords)
        if not cs or all(c == 0 for c in cs):
            raise DomainError("projective point needs a nonzero coordinate")
        object.__setattr__(self, "coords", cs)

    @classmethod
    def affine(cls, omega: Sequence) -> "ProjectivePoint":
        return cls((1,) + tuple(omega))

    def l2(self) -> mpf:
        return mpmath.sqrt(mpmath.fsum(abs(c) ** 2 for c in self.coords))

    def scaled(self, lam) -> "ProjectivePoint":
        return ProjectivePoint([lam * c for c in self.coords])


def norm_at(Q: HomogeneousPolynomial, x: ProjectivePoint) -> BigMagnitude:
    if Q.is_zero():
        raise DomainError("norm_at of the zero polynomial")
    if len(x.coords) != Q.num_vars:
        raise DomainError("dimension mismatch")
    val = Q.evaluate(x.coords)
    if val == 0:
        return BigMagnitude.zero()
    return BigMagnitude(mpmath.log(abs(val)) - Q.degree * mpmath.log(x.l2()))


def proj_dist(x: ProjectivePoint, y: ProjectivePoint) -> mpf:
    if len(x.coords) != len(y.coords):
        raise DomainError("dimension mismatch")
    minors = mpmath.fsum(abs(x.coords[i] * y.coords[j] - x.coords[j] * y.coords[i]) ** 2
                         for i, j in combinations(range(len(x.coords)), 2))
    d = mpmath.sqrt(minors) / (x.l2() * y.l2())
    return min(d, mpf(1))


def _max_abs_sq(omega):
    return max((abs(mpmath.mpmathify(w)) ** 2 for w in omega), default=mpf(0))


def a_omega(omega: Sequence, c3) -> mpf:
    c3 = mpf(c3)
    if c3 <= 1:
        raise DomainError("c3 must exceed 1")
    n = len(omega)
    return 2 * n + 1 + mpmath.log(1 + c3 ** 2 * n * _max_abs_sq(omega))


def c_d(omega: Sequence, d) -> mpf:
    d = mpf(d)
    if d <= 1:
        raise DomainError("d must exceed 1")
    n = len(omega)
    s = mpmath.fsum(abs(mpmath.mpmathify(w)) ** 2 for w in omega)
    return mpmath.sqrt(1 + s) * mpmath.sqrt(1 + d ** 2 * n * _max_abs_sq(omega))


def c_d_prime(omega: Sequence, d) -> mpf:
    d = mpf(d)
    if d <= 1:
        raise DomainError("d must exceed 1")
    n = len(omega)
    return 2 * n + 1 + mpmath.log(1 + d ** 2 * n * _max_abs_sq(omega))


def radius_cap(omega: Sequence, d) -> mpf:
    """min of the two caps on r required by the Dist-to-l2 comparison."""
    d = mpf(d)
    n = len(omega)
    s = mpmath.sqrt(1 + mpmath.fsum(abs(mpmath.mpmathify(w)) ** 2 for w in omega))
    return min((1 - 1 / d) / (s * mpmath.sqrt(n + 1)), 1 / c_d(omega, d))


@dataclass(frozen=True)
class RadiusCertificate:
    radius: BigMagnitude
    vanishes: bool
    delta: mpf
    tau: mpf
    c_prime: mpf
    cap: mpf
    value_abs: mpf


def nonvanishing_radius(p: IntPolynomial, omega: Sequence, d=2, *, delta=None, tau=None
                        ) -> RadiusCertificate:
    """Radius r of a projective ball about (1:omega) on which p has no zero.

    delta and tau default to max(1, deg p) and max(1, h(p)); the certificate
    needs both to be at least 1. Explicit values are used as given.
    """
    if p.is_zero():
        raise DomainError("zero polynomial")
    omega = [mpmath.mpmathify(w) for w in omega]
    deg, h, _ = t_of(p)
    delta = mpf(max(1, deg)) if delta is None else mpf(delta)
    tau = max(mpf(1), h) if tau is None else mpf(tau)
    cp = c_d_prime(omega, d)
    cap = radius_cap(omega, d)
    val = abs(p.evaluate(omega))
    scale = p.abs_evaluate([abs(w) for w in omega])
    if val <= rel_tol() * scale:
        return RadiusCertificate(BigMagnitude.zero(), True, delta, tau, cp, cap, val)
    # strict inequality: shave a relative 2^-(prec-32)
    log_r = mpmath.log(val) - cp * (delta + tau) + mpmath.log1p(-rel_tol())
    log_r = min(log_r, mpmath.log(cap))
    return RadiusCertificate(BigMagnitude(log_r), False, delta, tau, cp, cap, val)
