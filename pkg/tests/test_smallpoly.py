import mpmath
import pytest
from mpmath import mpf

from artifact.errors import DomainError, InfeasibleError, PreconditionError
from artifact.polycore import IntPolynomial
from artifact.smallpoly import (Coordinate, ExactAlgebraic, IdealBudget, NumericOnly, WitnessPoint,
                                exact_kernel, pigeonhole_min_t, residue_bound, siegel_construct,
                                siegel_search, verify_smallness)
from artifact.polycore import monomial_exponents

PHI = (1 + mpmath.sqrt(5)) / 2
GOLDEN = WitnessPoint(mpmath.mpc(PHI), (mpmath.mpc(PHI), mpmath.mpc(PHI ** 2)),
                      ExactAlgebraic((-1, -1, 1), (Coordinate((0, 1)), Coordinate((1, 1)))))


def _numeric(w):
    return WitnessPoint(w.z, w.omega, NumericOnly(256))


def test_origin_point_gives_x1():
    w = WitnessPoint(mpmath.mpc(0), (mpmath.mpc(0), mpmath.mpc(1)),
                     ExactAlgebraic((0, 1), (Coordinate((0,)), Coordinate((1,)))))
    x1 = IntPolynomial.variable(0, 2)
    assert siegel_construct([w], 1, 1) == x1
    assert siegel_construct([_numeric(w)], 1, 1) == x1


def test_golden_ratio_both_routes():
    p, rep = siegel_search([GOLDEN], 2, 3)
    q, rep_n = siegel_search([_numeric(GOLDEN)], 2, 3)
    assert rep.route == "exact" and rep_n.route == "numeric"
    assert p == q
    assert p.degree() <= 2 and p.height() <= 3
    assert abs(p.evaluate(GOLDEN.omega)) < mpf(2) ** -200


def test_exact_kernel_dimension():
    mons = monomial_exponents(2, 2)
    basis, rank = exact_kernel([GOLDEN], mons)
    assert rank == 2 and len(basis) == len(mons) - rank


def test_preconditions():
    with pytest.raises(PreconditionError):
        siegel_construct([], 2, 3)
    with pytest.raises(InfeasibleError):
        siegel_construct([GOLDEN], 2, -1)


def test_witness_serialises():
    d = GOLDEN.to_dict()
    assert d["provenance"]["kind"] == "exact"
    assert d["provenance"]["minpoly"] == ["-1", "-1", "1"]


def test_residue_bound():
    assert residue_bound(1, 0, 0, 1, mpmath.e() ** 5, 5) == 150
    with pytest.raises(DomainError, match="constant side"):
        residue_bound(1, 0, 0, 1, 10, 3)
    with pytest.raises(DomainError, match="degree/height side"):
        residue_bound(5, 10, 0, 2, 10, 4)


def test_pigeonhole():
    assert pigeonhole_min_t([1, 2, 3], 3, 1) == 30
    assert pigeonhole_min_t([10 ** 6], 2, 0) == 1000
    with pytest.raises(DomainError):
        pigeonhole_min_t([1], 3, 2)
    with pytest.raises(DomainError):
        pigeonhole_min_t([], 3, 1)


def test_budget_check():
    b = IdealBudget(1, (5, 8), mpf(1), mpf("0.25"))
    assert b.check(10 ** 4, 5) == []
    assert b.check(2, 5) == ["t(p_i) <= c N^alpha"]


@pytest.mark.parametrize("C", [1, 2])
def test_power_of_z_is_small(expcurve, C):
    x1 = IntPolynomial.variable(0, 2)
    chk = verify_smallness(expcurve, x1 ** 6, 6, C)
    lhs, rhs, holds = chk
    assert holds and chk.zeros == 6
    assert lhs == -6


def test_smallness_needs_zeros(expcurve):
    y = IntPolynomial.variable(1, 2)
    with pytest.raises(PreconditionError):
        verify_smallness(expcurve, y, 1, 1)
