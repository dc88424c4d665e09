import math

import mpmath
import pytest
from mpmath import mpf

from artifact.errors import DomainError
from artifact.magnitude import BigMagnitude
from artifact.polycore import (HomogeneousPolynomial, IntPolynomial, ProjectivePoint, a_omega,
                               bombieri_norm, c_d, c_d_prime, dehomogenize, h1, homogenize,
                               monomial_exponents, nonvanishing_radius, norm_at, proj_dist, t_of)

x = IntPolynomial.variable(0, 2)
y = IntPolynomial.variable(1, 2)


def test_arithmetic_and_text_roundtrip():
    p = x ** 2 - 3 * y + IntPolynomial.constant(7, 2)
    assert p.degree() == 2
    assert p.max_abs_coeff() == 7
    assert IntPolynomial.from_text(p.to_text()) == p
    assert (p - p).is_zero()


def test_monomial_count():
    assert len(monomial_exponents(3, 4)) == math.comb(7, 3)


def test_t_of():
    d, h, t = t_of(2 * x ** 3 + y)
    assert d == 3
    assert h == mpmath.log(2)
    assert t == 3 + mpmath.log(2)
    with pytest.raises(DomainError):
        t_of(x - x)


def test_homogenize_roundtrip():
    p = x ** 2 * y - 5 * x + IntPolynomial.constant(1, 2)
    Q = homogenize(p)
    assert Q.degree == 3
    assert dehomogenize(Q) == p


def test_bombieri_norm_two_unit_squares():
    Q = HomogeneousPolynomial(2, {(2, 0): 1, (0, 2): 1})
    assert mpmath.almosteq(bombieri_norm(Q).value(), mpmath.sqrt(2))


def test_bombieri_cross_term_weighted():
    # (X0 + X1)^2 has norm 2: 1 + 4/2 + 1 = 4
    Q = HomogeneousPolynomial(2, {(2, 0): 1, (1, 1): 2, (0, 2): 1})
    assert mpmath.almosteq(bombieri_norm(Q).value(), 2)
    assert mpmath.almosteq(h1(Q), mpmath.log(2))


def test_norm_at_rescaling_invariant():
    Q = HomogeneousPolynomial(3, {(2, 0, 0): 1, (0, 1, 1): -3})
    xp = ProjectivePoint([1, mpf("0.3"), mpf("-2.5")])
    a = norm_at(Q, xp).log()
    b = norm_at(Q, xp.scaled(mpmath.mpc(3, -7))).log()
    assert abs(a - b) < mpf(2) ** -200


def test_proj_dist():
    a = ProjectivePoint([1, 2, 3])
    b = ProjectivePoint([2, 4, 6])
    c = ProjectivePoint([1, 0, 0])
    assert proj_dist(a, b) == 0
    assert mpmath.almosteq(proj_dist(a, c), proj_dist(c, a))
    assert 0 < proj_dist(a, c) <= 1


def test_a_omega_and_c_d():
    assert a_omega([0, 0], 2) == 5
    assert c_d_prime([0], 2) == 3
    assert c_d([0], 2) == 1
    with pytest.raises(DomainError):
        a_omega([0], 1)


def test_radius_for_linear_polynomial():
    p = IntPolynomial(1, {(1,): 1, (0,): -2})
    cert = nonvanishing_radius(p, [0], 2)
    # delta = tau = 1 after clamping, c' = 3: r = 2 e^-6
    assert mpmath.almosteq(cert.radius.value(), 2 * mpmath.exp(-6), rel_eps=mpf(2) ** -100)
    assert not cert.vanishes
    # the lemma's own formula with tau = log 2
    raw = nonvanishing_radius(p, [0], 2, delta=1, tau=mpmath.log(2))
    assert mpmath.almosteq(raw.radius.value(), mpmath.exp(-3) / 4, rel_eps=mpf(2) ** -100)


def test_radius_at_zero_is_flagged():
    p = IntPolynomial(1, {(1,): 1})
    cert = nonvanishing_radius(p, [0])
    assert cert.vanishes and cert.radius.is_zero


def test_radius_below_true_distance():
    p = IntPolynomial(1, {(1,): 1})
    r = nonvanishing_radius(p, [1]).radius.value()
    assert 0 < r < 1


def test_big_magnitude():
    tiny = BigMagnitude.exp(-10 ** 6)
    assert not tiny.is_zero
    a, b, c = BigMagnitude.exp(-3), BigMagnitude.from_value(7), tiny
    assert ((a * b) * c).log_value == (a * (b * c)).log_value
    assert BigMagnitude.zero() < tiny < BigMagnitude.one()
