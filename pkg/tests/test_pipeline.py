import math

import mpmath
import pytest
from mpmath import mpf

from artifact.criterion import validate_schedule
from artifact.errors import DomainError
from artifact.magnitude import BigMagnitude
from artifact.pipeline import (DiskCover, count_exp_curve, cover_gamma, embedded_monomials,
                               enumerate_log_curve_points, exp_curve_pairs, iN_from_ord,
                               log_curve_parameter, n_range, separation_check, theorem_budgets,
                               witness_relation)


@pytest.fixture(scope="module")
def s51():
    return validate_schedule(5, 1)


def test_disk_cover_membership():
    cov = DiskCover([(mpmath.mpc(0), BigMagnitude.from_value(mpf("0.1"))),
                     (mpmath.mpc("0.5"), BigMagnitude.exp(-50))])
    assert cov.contains(mpf("0.05"))
    assert cov.contains(mpf("0.5"))
    assert not cov.contains(mpf("0.3"))
    assert cov.count == 2
    assert mpmath.almosteq(cov.total_diameter.value(), mpf("0.2") + 2 * mpmath.exp(-50))


def test_embedded_basis_size():
    assert len(embedded_monomials(6)) == 196


@pytest.mark.parametrize("T,count", [(3, 3), (4, 4), (5, 7), (6, 8)])
def test_log_census_counts(T, count):
    pts = enumerate_log_curve_points(T)
    assert len(pts) == count
    for w in pts:
        a, b = witness_relation(w)
        z = w.omega[0]
        assert abs(a * mpmath.log(z) - b * mpmath.log(1 + z)) < mpf(2) ** -128
        assert abs(log_curve_parameter(z) - w.z) < mpf(2) ** -128


def test_log_census_relations_at_5():
    rel = sorted(witness_relation(w) for w in enumerate_log_curve_points(5))
    assert rel == [(2, 1), (3, 1), (3, 2), (4, 1), (5, 1), (5, 2), (5, 3)]


def test_separation():
    pts = enumerate_log_curve_points(5)
    assert separation_check(pts, BigMagnitude.exp(-25))
    assert not separation_check(pts + pts[:1], BigMagnitude.exp(-25))


def _brute_exp_pairs(T, n, R):
    out = set()
    for m in range(1, T + 1):
        if m ** (n - 1) > T:
            break
        if m ** (n - 1) + (n - 1) * math.log(m) > T:
            continue
        for q in range(1, m + 1):
            for p in range(-m, m + 1):
                if max(abs(p), q) == m and math.gcd(p, q) == 1 and abs(p) <= R * q:
                    out.add((p, q))
    return out


def test_exp_census_matches_brute_force():
    for T in (1, 10, 50, 200):
        assert set(exp_curve_pairs(T, 3, 10)) == _brute_exp_pairs(T, 3, 10)
    assert count_exp_curve(1, 3, 10).count == 3


def test_iN():
    assert iN_from_ord(2, 3, 2) == 5
    assert iN_from_ord(mpf("2.5"), 2, 3) == 4
    with pytest.raises(DomainError):
        iN_from_ord(0, 3, 2)


def test_budgets_monotone(s51):
    b3, b5 = theorem_budgets(s51, 3), theorem_budgets(s51, 5)
    assert b3["count"] < b5["count"]
    assert b5["log_diameter"] < b3["log_diameter"] < 0
    R, lo, _ = n_range(s51, 3)
    assert lo >= 2 and R >= 3


def test_cover_small_T(logcurve5, s51):
    rep = cover_gamma(logcurve5, s51, 5)
    assert rep.sound and len(rep.census) == 7
    assert rep.budgets["count_within"] and rep.budgets["diameter_within"]
    sw = rep.families[0].checks["sandwich"]
    assert sw["upper_holds"] and sw["lower_holds"]
