import mpmath
import pytest
from mpmath import mpf

from artifact.errors import DomainError, InsufficientDataError
from artifact.polycore import IntPolynomial
from artifact.series import TruncatedSeries
from artifact.trajectory import compose_poly
from artifact.zerocount import (ExpCurveFamily, count_zeros, envelope_fit, iy_bound,
                                planted_series, verify_order_bound)


def test_planted_simple_and_double(backend):
    zs = [mpf("0.1"), mpmath.mpc("-0.05", "0.2"), mpmath.mpc("-0.05", "0.2")]
    f = planted_series(zs, g=[0, mpf("0.5"), mpf("-0.3")])
    rep = count_zeros(f)
    assert rep.count == 3
    assert sorted(rep.multiplicities) == [1, 2]
    for z in rep.zero_locations:
        assert min(abs(z - w) for w in zs) < mpf(2) ** -64


def test_zero_outside_contour_not_counted(backend):
    f = planted_series([mpf("0.2"), mpf("0.5")])
    assert count_zeros(f).count == 1


def test_zero_free(backend):
    assert count_zeros(planted_series([], g=[1, 2])).count == 0


def test_bad_inputs():
    with pytest.raises(DomainError):
        count_zeros(TruncatedSeries.from_polynomial([0]))
    with pytest.raises(DomainError):
        count_zeros(TruncatedSeries.from_polynomial([1, 1]), -1)


@pytest.mark.parametrize("k", [1, 5, 12])
def test_iy_power_is_tight(k):
    f = TruncatedSeries.from_polynomial([0] * k + [1])
    res = iy_bound(f, C=1)
    assert res.holds and res.count == k
    assert abs(res.bound - k) < mpf(2) ** -100


def test_iy_fails_below_tight_constant():
    f = TruncatedSeries.from_polynomial([0] * 4 + [1])
    assert not iy_bound(f, C=0.9).holds


def test_zero_count_of_composed_power(expcurve):
    x = IntPolynomial.variable(0, 2)
    rep = count_zeros(compose_poly(expcurve, x ** 4))
    assert rep.count == 4 and rep.multiplicities == [4]


def test_envelope_fit_recovers_power():
    pairs = [(t, t ** 2) for t in range(2, 60)]
    slope, _, _ = envelope_fit(pairs)
    assert abs(slope - 2) < 1e-9
    with pytest.raises(InsufficientDataError):
        envelope_fit(pairs[:5])


def test_family_deterministic():
    a = [p.to_text() for p in ExpCurveFamily(15, seed=3)]
    b = [p.to_text() for p in ExpCurveFamily(15, seed=3)]
    assert a == b and len(a) == 15


def test_order_bound_small(expcurve):
    fit = verify_order_bound(expcurve, ExpCurveFamily(30, t_max=25, seed=1), 25)
    assert fit.slope <= 2.3
    assert 0 < fit.C < float("inf")
