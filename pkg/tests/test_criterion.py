import mpmath
import pytest
from mpmath import mpf

from artifact.criterion import (CriterionSchedule, check_assumptions, check_philippon, compute_i0,
                                compute_N0, main_inequality, validate_schedule)
from artifact.errors import DomainError, InfeasibleError
from artifact.polycore import HomogeneousPolynomial, ProjectivePoint


@pytest.fixture(scope="module")
def s51():
    return validate_schedule(5, 1)


def test_rejects_small_n():
    with pytest.raises(InfeasibleError):
        validate_schedule(4, 1)


def test_default_schedule_5_1(s51):
    assert s51.alpha == mpf("0.25") and s51.eps == mpf("0.25")
    assert s51.eta == mpf("0.125") and s51.theta == mpf(1) / 32
    assert s51.a0 == 4097
    assert all(s51.chain().values())
    assert s51.delta(2) == mpf(2) ** mpf("2.375")


def test_override_breaking_chain():
    with pytest.raises(InfeasibleError, match="parameter chain"):
        validate_schedule(5, 1, overrides={"theta": "0.5"})


def test_roundtrip(s51):
    # decimal text round trip: 40 digits
    assert CriterionSchedule.from_dict(s51.to_dict()).to_dict() == s51.to_dict()


def test_assumptions_a0(s51):
    rep = check_assumptions(s51, (1, 10 ** 4))
    assert rep.a0 == s51.a0
    assert not check_assumptions(s51, (1, 100)).ok


def test_i0_is_minimal(s51):
    q = compute_i0(s51, 10)
    assert main_inequality(s51, 10, q.i0)
    assert not main_inequality(s51, 10, q.i0 - 1)
    assert q.preamble(1)
    with pytest.raises(DomainError):
        compute_i0(s51, 1)


def test_N0_endpoint(s51):
    q = compute_i0(s51, 10)
    lo, hi = q.s_range(1)
    assert compute_N0(q, s51, hi) == q.i0
    with pytest.raises(DomainError):
        compute_N0(q, s51, lo)


def test_philippon_X0_fails_cond3(s51):
    q = compute_i0(s51, 10)
    Q = HomogeneousPolynomial(6, {(1, 0, 0, 0, 0, 0): 1})
    chk = check_philippon(Q, ProjectivePoint.affine([0] * 5), q, q.s_range(1)[1], 1)
    assert chk.cond1 and chk.cond2 and not chk.cond3
