"""Small integer polynomials vanishing at prescribed points of a trajectory.

The constructive path is lattice reduction: an exact rational kernel for
witnesses with algebraic provenance, a scaled evaluation lattice for
witnesses known only numerically. The counting bounds that justify the
existence of such polynomials are provided as calculators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np
from flint import fmpz_mat
from mpmath import mpf

from .config import get_precision
from .errors import DomainError, InfeasibleError, PreconditionError
from .polycore import IntPolynomial, monomial_exponents, t_of


# ---------------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class NumericOnly:
    precision: int

    def to_dict(self) -> dict:
        return {"kind": "numeric", "precision": self.precision}


@dataclass(frozen=True)
class Coordinate:
    """x_j = A(theta) + sum_l lin[l] * s_l, with A in Q[theta] of degree < deg minpoly
    and s_l symbols assumed algebraically independent over Q(theta)."""

    alg: tuple = ()
    lin: tuple = ()

    def to_dict(self) -> dict:
        return {"alg": [str(a) for a in self.alg], "lin": [str(a) for a in self.lin]}


@dataclass(frozen=True)
class ExactAlgebraic:
    """Exact description of a witness: theta is a root of the integer polynomial
    ``minpoly`` (coefficients from the constant term up), every coordinate is a
    Coordinate over theta and the symbols. ``relation`` records where the data
    came from (free text)."""

    minpoly: tuple
    coords: tuple
    symbols: tuple = ()
    relation: str = ""

    def __post_init__(self):
        if len(self.minpoly) < 2 or self.minpoly[-1] == 0:
            raise DomainError("minimal polynomial must have degree at least 1")

    @property
    def degree(self) -> int:
        return len(self.minpoly) - 1

    def to_dict(self) -> dict:
        return {"kind": "exact", "minpoly": [str(c) for c in self.minpoly],
                "coords": [c.to_dict() for c in self.coords], "symbols": list(self.symbols),
                "relation": self.relation}


@dataclass(frozen=True)
class WitnessPoint:
    z: mpmath.mpc
    omega: tuple
    provenance: object

    @property
    def n(self) -> int:
        return len(self.omega)

    @property
    def exact(self) -> bool:
        return isinstance(self.provenance, ExactAlgebraic)

    def to_dict(self) -> dict:
        def c(x):
            x = mpmath.mpmathify(x)
            return [mpmath.nstr(mpmath.re(x), 40), mpmath.nstr(mpmath.im(x), 40)]
        return {"z": c(self.z), "omega": [c(w) for w in self.omega],
                "provenance": self.provenance.to_dict()}


@dataclass(frozen=True)
class IdealBudget:
    k: int
    t_values: tuple
    c: mpf
    alpha: mpf

    def check(self, N, n: int) -> list:
        """Violated invariants for this N in ambient dimension n (empty when fine)."""
        bad = []
        if not 0 < self.alpha < n - self.k - 1:
            bad.append("0 < alpha < n - k - 1")
        lim = mpf(self.c) * mpf(N) ** self.alpha
        if any(mpf(t) > lim for t in self.t_values):
            bad.append("t(p_i) <= c N^alpha")
        return bad


# ---------------------------------------------------------------------------
# arithmetic in Q[theta]/(P)[s_1..s_r]


class _Ring:
    def __init__(self, minpoly: Sequence[int], nsym: int):
        self.P = [Fraction(c) for c in minpoly]
        self.d = len(self.P) - 1
        self.nsym = nsym
        lead = self.P[-1]
        # theta^d = -sum_{i<d} P_i/P_d theta^i
        self.red = [-c / lead for c in self.P[:-1]]

    def const(self, a: Sequence) -> dict:
        v = self._reduce(list(a))
        return {(0,) * self.nsym: v} if any(v) else {}

    def _reduce(self, coeffs: list) -> list:
        c = [Fraction(x) for x in coeffs]
        for top in range(len(c) - 1, self.d - 1, -1):
            lead = c[top]
            if lead:
                for i, r in enumerate(self.red):
                    c[top - self.d + i] += lead * r
            c[top] = Fraction(0)
        return (c + [Fraction(0)] * self.d)[:self.d]

    def coordinate(self, coord: Coordinate) -> dict:
        out = self.const(coord.alg) if coord.alg else {}
        for l, a in enumerate(coord.lin):
            a = Fraction(a)
            if a:
                key = tuple(1 if j == l else 0 for j in range(self.nsym))
                v = [Fraction(0)] * self.d
                v[0] = a
                out[key] = v
        return out

    def mul(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for kx, vx in x.items():
            for ky, vy in y.items():
                key = tuple(a + b for a, b in zip(kx, ky))
                prod = [Fraction(0)] * (2 * self.d - 1)
                for i, a in enumerate(vx):
                    if a:
                        for j, b in enumerate(vy):
                            if b:
                                prod[i + j] += a * b
                red = self._reduce(prod)
                acc = out.get(key)
                if acc is None:
                    out[key] = red
                else:
                    out[key] = [p + q for p, q in zip(acc, red)]
        return {k: v for k, v in out.items() if any(v)}

    def one(self) -> dict:
        v = [Fraction(0)] * self.d
        v[0] = Fraction(1)
        return {(0,) * self.nsym: v}


def _exact_rows(w: ExactAlgebraic, monomials: Sequence) -> list:
    """Rational linear conditions on the coefficients for p(w) = 0 identically."""
    ring = _Ring(w.minpoly, len(w.symbols))
    n = len(w.coords)
    powers = []
    for j in range(n):
        base = ring.coordinate(w.coords[j])
        tab = [ring.one()]
        top = max(e[j] for e in monomials) if monomials else 0
        for _ in range(top):
            tab.append(ring.mul(tab[-1], base))
        powers.append(tab)
    cols = []
    for e in monomials:
        v = ring.one()
        for j, a in enumerate(e):
            if a:
                v = ring.mul(v, powers[j][a])
        cols.append(v)
    keys = sorted({(k, i) for col in cols for k, vec in col.items() for i, c in enumerate(vec) if c})
    rows = []
    for k, i in keys:
        rows.append([col.get(k, [0] * ring.d)[i] for col in cols])
    return rows


def _integer_rows(rows: list) -> list:
    out = []
    for r in rows:
        den = 1
        for x in r:
            den = den * x.denominator // math.gcd(den, x.denominator)
        ir = [int(x * den) for x in r]
        g = 0
        for x in ir:
            g = math.gcd(g, x)
        if g:
            out.append([x // g for x in ir])
    return out


# ---------------------------------------------------------------------------


@dataclass
class SiegelReport:
    route: str                      # "exact" or "numeric"
    monomials: int
    conditions: int
    rank: int
    kernel_dim: int
    candidates: int
    chosen_height: mpf
    max_residual: mpf
    eps_vanish: mpf
    scale_bits: int
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("route", "monomials", "conditions", "rank", "kernel_dim",
                                           "candidates", "scale_bits")}
        d["chosen_height"] = mpmath.nstr(self.chosen_height, 20)
        d["max_residual"] = mpmath.nstr(self.max_residual, 10)
        d["eps_vanish"] = mpmath.nstr(self.eps_vanish, 10)
        d["diagnostics"] = self.diagnostics
        return d


def _poly_from_vector(n: int, monomials: Sequence, vec: Sequence[int]) -> IntPolynomial:
    return IntPolynomial(n, {e: int(c) for e, c in zip(monomials, vec) if c})


def _normalize(vec: list) -> list:
    g = 0
    for x in vec:
        g = math.gcd(g, int(x))
    if g == 0:
        return vec
    vec = [int(x) // g for x in vec]
    for x in vec:
        if x:
            if x < 0:
                vec = [-y for y in vec]
            break
    return vec


def _tie_key(vec: list):
    h = max(abs(x) for x in vec)
    return (h, tuple(vec))


def _monomials_for(n: int, deg_bound: int, variables: Sequence[int] | None) -> list:
    if variables is None:
        return monomial_exponents(n, deg_bound)
    variables = list(variables)
    out = []
    for e in monomial_exponents(len(variables), deg_bound):
        full = [0] * n
        for v, a in zip(variables, e):
            full[v] = a
        out.append(tuple(full))
    return out


def exact_kernel(points: Sequence[WitnessPoint], monomials: Sequence) -> tuple:
    """Integer basis of the rational kernel of the exact vanishing conditions,
    reduced by LLL. Returns (basis rows, number of independent conditions)."""
    rows = []
    seen = set()
    for w in points:
        key = w.provenance
        if key in seen:
            continue
        seen.add(key)
        rows.extend(_exact_rows(w.provenance, monomials))
    irows = _integer_rows(rows)
    m = len(monomials)
    if not irows:
        basis = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
        return basis, 0
    A = fmpz_mat(irows)
    X, nullity = A.nullspace()
    rank = m - nullity
    if nullity == 0:
        return [], rank
    basis = [[int(X[r, c]) for r in range(m)] for c in range(nullity)]
    B = fmpz_mat(basis).lll()
    basis = [_normalize([int(B[r, c]) for c in range(m)]) for r in range(B.nrows())]
    return basis, rank


def siegel_search(points: Sequence[WitnessPoint], deg_bound: int, height_bound, *,
                  variables: Sequence[int] | None = None,
                  smallness: Sequence | None = None, smallness_weight_bits: int = 0,
                  select: Callable | None = None, route: str | None = None,
                  monomials: Sequence | None = None,
                  smallness_columns: Sequence | None = None) -> tuple:
    """Core of siegel_construct; returns (polynomial, SiegelReport).

    ``variables`` restricts the monomials to a subset of coordinates.
    ``smallness`` is an optional list of extra complex points (for instance
    samples of the curve) whose values are appended to the lattice with
    weight 2^smallness_weight_bits, so reduction also favours polynomials
    that are small there. ``select`` overrides the (height, lex) choice
    among admissible candidates; it receives IntPolynomials and returns a
    sort key. ``route`` forces "exact" or "numeric"; by default the exact
    kernel is used whenever every witness has algebraic provenance.
    ``smallness_columns`` plays the same role with precomputed data: one
    sequence of complex values per monomial (for example weighted Taylor
    coefficients of the monomial along the curve), in monomial order.
    ``monomials`` replaces the full degree-bounded basis by an explicit list
    of exponent vectors (each of total degree <= deg_bound).
    """
    if not points:
        raise PreconditionError("siegel_construct needs at least one witness point")
    n = points[0].n
    if any(w.n != n for w in points):
        raise PreconditionError("witness points have different dimensions")
    if deg_bound < 0:
        raise PreconditionError("deg_bound must be non-negative")
    prec = get_precision()
    eps = mpmath.ldexp(1, -prec // 2)
    if monomials is None:
        monomials = _monomials_for(n, deg_bound, variables)
    else:
        monomials = [tuple(e) for e in monomials]
        if any(len(e) != n or sum(e) > deg_bound for e in monomials):
            raise PreconditionError("explicit monomials must have length n and degree <= deg_bound")
    m = len(monomials)
    if route is None:
        route = "exact" if all(w.exact for w in points) else "numeric"
    elif route == "exact" and not all(w.exact for w in points):
        raise PreconditionError("the exact route needs algebraic provenance for every witness")
    if route == "exact":
        basis, rank = exact_kernel(points, monomials)
        if m <= rank or not basis:
            raise PreconditionError(f"{m} monomials do not exceed the exact rank {rank}")
        conditions, scale_bits = rank, 0
    else:
        if m <= 2 * len(points):
            raise PreconditionError(f"{m} monomials do not exceed 2 x {len(points)} numeric conditions")
        basis = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
        rank = 2 * len(points)
        conditions = 2 * len(points)
        scale_bits = prec - 8
    # append scaled evaluation columns and reduce; the first m columns of any
    # integer combination of rows are the coefficient vector itself
    blocks = []
    if route == "numeric":
        blocks.append(("points", _point_columns(points, monomials), scale_bits))
    if smallness or smallness_columns:
        cols = _point_columns(smallness, monomials) if smallness else []
        if smallness_columns:
            if len(smallness_columns) != m:
                raise PreconditionError("smallness_columns needs one entry per monomial")
            extra_cols = [[mpmath.mpmathify(v) for v in row] for row in smallness_columns]
            cols = [a + b for a, b in zip(cols, extra_cols)] if cols else extra_cols
        blocks.append(("smallness", cols, smallness_weight_bits))
    diagnostics = {"kernel_vectors": len(basis)}
    extra = {}
    if blocks:
        B = fmpz_mat(basis)
        guard = max(sum(abs(x) for x in vec) for vec in basis).bit_length() + 16
        mats = [B]
        offset = m
        for name, per_mono, bits in blocks:
            if name == "points":
                diagnostics.update(_conditioning([list(c) for c in zip(*per_mono)]))
            # real and imaginary parts; drop parts that vanish identically
            parts = []
            for j in range(len(per_mono[0])):
                for part in (mpmath.re, mpmath.im):
                    col = [part(row[j]) for row in per_mono]
                    if any(col) or name == "points":
                        parts.append(col)
            V = fmpz_mat([[_fixed(col[i], bits + guard) for col in parts] for i in range(m)])
            prod = B * V
            half = 1 << (guard - 1)
            mats.append(fmpz_mat([[(int(prod[r, c]) + half) >> guard for c in range(prod.ncols())]
                                  for r in range(prod.nrows())]))
            extra[name] = (offset, len(parts), bits)
            offset += len(parts)
        lattice = [[int(x) for row_part in mats for x in _row(row_part, r)] for r in range(len(basis))]
        L = fmpz_mat(lattice).lll()
        rows = [[int(L[r, c]) for c in range(L.ncols())] for r in range(L.nrows())]
    else:
        rows = [list(v) for v in basis]
    # approximate vanishing filter from the lattice columns, exact check afterwards
    limit = None
    if "points" in extra:
        off, cnt, bits = extra["points"]
        limit = 1 << max(0, bits - prec // 2)
    cands = []
    best_height = None
    for row in rows:
        vec = row[:m]
        if not any(vec):
            continue
        if limit is not None:
            off, cnt, bits = extra["points"]
            if any(abs(x) > limit for x in row[off:off + cnt]):
                continue
        small = None
        if "smallness" in extra:
            off, cnt, bits = extra["smallness"]
            small = math.fsum(abs(float(x)) for x in row[off:off + cnt]) * 2.0 ** -bits
        nvec = _normalize(vec)
        h = mpmath.log(max(abs(x) for x in nvec))
        if best_height is None or h < best_height:
            best_height = h
        if h > mpf(height_bound):
            continue
        cands.append((nvec, small))
    if not cands:
        raise InfeasibleError(
            f"no polynomial of degree <= {deg_bound} and height <= {height_bound} found "
            f"(smallest admissible log-height {mpmath.nstr(best_height, 8) if best_height is not None else 'none'})",
            best_height=best_height)

    def key(c):
        vec, small = c
        k = _tie_key(vec)
        if select is not None:
            return (select(_poly_from_vector(n, monomials, vec)),) + k
        if small is not None:
            # bucket the sampled size so that rounding noise never decides the order
            return (round(math.log2(small + 1e-300), 3),) + k
        return k

    cands.sort(key=key)
    for vec, small in cands:
        p = _poly_from_vector(n, monomials, vec)
        res = max((abs(p.evaluate(_omega(w))) for w in points), default=mpf(0))
        if res <= eps and p.degree() <= deg_bound and p.height() <= mpf(height_bound):
            break
    else:
        raise InfeasibleError("no candidate survived post-verification", best_height=best_height)
    if small is not None:
        diagnostics["sampled_log_max"] = float(math.log(small + 1e-300))
    rep = SiegelReport(route, m, conditions, rank, len(basis), len(cands), p.height(), res, eps,
                       scale_bits, diagnostics)
    return p, rep


def _point_columns(points, monomials) -> list:
    """Monomial values at the points, laid out as [monomial][point]."""
    vals = [[_monomial_value(e, _omega(w)) for e in monomials] for w in points]
    return [list(c) for c in zip(*vals)]


def _fixed(x, bits: int) -> int:
    return int(mpmath.nint(mpmath.ldexp(x, bits)))


def _row(M, r: int) -> list:
    return [M[r, c] for c in range(M.ncols())]


def _conditioning(vals) -> dict:
    """Singular-value summary of the real/imaginary evaluation matrix."""
    rows = []
    for pv in vals:
        rows.append([float(mpmath.re(v)) for v in pv])
        rows.append([float(mpmath.im(v)) for v in pv])
    A = np.array(rows)
    sv = np.linalg.svd(A, compute_uv=False)
    nz = sv[sv > 0]
    return {"rows": A.shape[0], "cols": A.shape[1],
            "sigma_max": float(sv[0]) if sv.size else 0.0,
            "sigma_min": float(sv[-1]) if sv.size else 0.0,
            "condition": float(nz[0] / nz[-1]) if nz.size else float("inf"),
            "max_entry": float(np.abs(A).max()) if A.size else 0.0}


def _omega(w):
    return w.omega if isinstance(w, WitnessPoint) else tuple(w)


def _monomial_value(e, omega):
    v = mpmath.mpc(1)
    for x, a in zip(omega, e):
        if a:
            v *= mpmath.mpmathify(x) ** a
    return v


def siegel_construct(points: Sequence[WitnessPoint], deg_bound: int, height_bound, **kw) -> IntPolynomial:
    """Nonzero integer polynomial of degree <= deg_bound and log-height <= height_bound
    vanishing at every witness (exactly for algebraic provenance, to
    2^(-precision/2) otherwise). Ties go to the smallest height, then the
    lexicographically smallest coefficient vector with a positive leading entry."""
    return siegel_search(points, deg_bound, height_bound, **kw)[0]


# ---------------------------------------------------------------------------
# counting bounds


def residue_hypothesis(deg_p: int, h_p, k: int, n: int, t) -> tuple:
    """(e^{(k+1)t}, 30, 2k deg t + 3 deg h + 6n(k+1)deg^2 + 3(k+1)deg^3)."""
    t = mpf(t)
    h_p = mpf(h_p)
    rhs = 2 * k * deg_p * t + 3 * deg_p * h_p + 6 * n * (k + 1) * deg_p ** 2 + 3 * (k + 1) * deg_p ** 3
    return mpmath.exp((k + 1) * t), mpf(30), rhs


def residue_bound(deg_p: int, h_p, k: int, n: int, T, t: int) -> mpf:
    """6^{k+1}((n^2+n+2) deg t^{k+1} + h t^{k+1} + deg t^k log T), the bound on the
    log of the number of residues of degree-t, height-T forms modulo a prime
    ideal of degree deg_p and log-height h_p."""
    if n < 1 or k < 0:
        raise DomainError("need n >= 1 and k >= 0")
    lhs, floor30, rhs = residue_hypothesis(deg_p, h_p, k, n, t)
    if lhs < floor30:
        raise DomainError(f"growth hypothesis fails on the constant side: e^((k+1)t) = "
                          f"{mpmath.nstr(lhs, 8)} < 30")
    if lhs < rhs:
        raise DomainError(f"growth hypothesis fails on the degree/height side: e^((k+1)t) = "
                          f"{mpmath.nstr(lhs, 8)} < {mpmath.nstr(rhs, 8)}")
    t = mpf(t)
    return 6 ** (k + 1) * ((n * n + n + 2) * deg_p * t ** (k + 1) + mpf(h_p) * t ** (k + 1)
                           + deg_p * t ** k * mpmath.log(T))


def pigeonhole_min_t(t_values: Sequence, n: int, k: int, safety_const=1) -> int:
    """Smallest integer t >= 30 with t >= C (sum t_i)^{1/(n-k)} and t >= C max(t_i)^{1/n}."""
    if k > n - 2:
        raise DomainError("need k <= n - 2")
    if not t_values:
        raise DomainError("t_values must be nonempty")
    C = mpf(safety_const)
    total = mpmath.fsum(mpf(t) for t in t_values)
    top = max(mpf(t) for t in t_values)
    need = max(C * mpmath.root(total, n - k), C * mpmath.root(top, n))
    t = int(mpmath.ceil(need))
    # a computed root may land a few ulps above an exact integer
    if t - 1 >= need * (1 - mpmath.ldexp(1, -(get_precision() - 32))):
        t -= 1
    return max(30, t)


@dataclass(frozen=True)
class SmallnessCheck:
    lhs: mpf
    rhs: mpf
    holds: bool
    zeros: int

    def __iter__(self):
        yield self.lhs
        yield self.rhs
        yield self.holds


def verify_smallness(traj, p: IntPolynomial, s: int, C) -> SmallnessCheck:
    """log max_Gamma |p| against C t(p) - s/C, after confirming p o gamma has at
    least s zeros (with multiplicity) on Gamma."""
    from .trajectory import compose_poly, ord_gamma
    from .zerocount import count_zeros
    C = mpf(C)
    if s > 0:
        rep = count_zeros(compose_poly(traj, p))
        zeros = rep.count
        if zeros < s:
            raise PreconditionError(f"p has {zeros} zeros on Gamma, fewer than s = {s}")
    else:
        zeros = 0
    lhs = -ord_gamma(traj, p).value
    rhs = C * t_of(p)[2] - s / C
    return SmallnessCheck(lhs, rhs, bool(lhs <= rhs), zeros)
