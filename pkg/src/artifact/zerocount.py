"""Zero counting by the argument principle, the Ilyashenko-Yakovenko ratio,
and empirical checks of the order and zero bounds along a trajectory."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np
from flint import acb_poly, acb_series, ctx
from mpmath import mpf

from . import kernels
from .config import get_precision, rel_tol
from .errors import DegenerateInputError, DomainError, InsufficientDataError, PrecisionError
from .hp import to_acb, to_mpc
from .magnitude import BigMagnitude
from .polycore import IntPolynomial, t_of
from .series import TruncatedSeries
from .trajectory import DEFAULT_MARGIN, Trajectory, boundary_maximum, compose_poly, inv_e, ord_gamma

MAX_ARG_STEP = math.pi / 4
NUDGE_STEPS = 8
NUDGE_TOTAL = 0.01
# relative cell size at which subdivision stops
FINEST = 2.0 ** -26
SPLIT_FRACTIONS = (0.5, 0.4871, 0.5319, 0.4603, 0.5577)
# values this many rounding units above zero are trusted for their argument
NOISE_FACTOR = 64.0


@dataclass
class ZeroReport:
    count: int
    zero_locations: list
    multiplicities: list
    contour_radius: mpf
    iy_ratio: mpf | None = None
    iy_bound_constant: float = 2.0
    nudges: int = 0
    residual_logs: list = field(default_factory=list)

    def all_locations(self) -> list:
        """Locations repeated according to multiplicity."""
        out = []
        for z, m in zip(self.zero_locations, self.multiplicities):
            out.extend([z] * m)
        return out

    def to_dict(self) -> dict:
        def c(z):
            return [mpmath.nstr(z.real, 30), mpmath.nstr(z.imag, 30)]
        return {
            "count": self.count,
            "zero_locations": [c(z) for z in self.zero_locations],
            "multiplicities": list(self.multiplicities),
            "contour_radius": mpmath.nstr(self.contour_radius, 30),
            "iy_ratio": None if self.iy_ratio is None else mpmath.nstr(self.iy_ratio, 30),
            "iy_bound_constant": self.iy_bound_constant,
            "nudges": self.nudges,
        }


class _Evaluator:
    """Double-precision values of f in units of 2^e, plus their rounding noise."""

    def __init__(self, f: TruncatedSeries, r_scale: mpf):
        self.ss = f.scaled(r_scale)
        self.r = float(r_scale)
        d = f.poly.derivative()
        self.da = np.array([complex(x) for x in _scaled_coeffs(d, r_scale, self.ss.log2_scale)],
                           dtype=np.complex128) if d.length() else np.zeros(1, dtype=np.complex128)

    def values(self, z: np.ndarray):
        u = z / self.r
        v = kernels.horner_many(self.ss.a, u)
        noise = self.ss.rounding_bound(u)
        return v, noise

    def derivative(self, z: np.ndarray) -> np.ndarray:
        return kernels.horner_many(self.da, z / self.r)

    def newton_step(self, z: complex, m: int) -> complex:
        u = np.array([z / self.r])
        v = kernels.horner_many(self.ss.a, u)[0]
        # derivative series is stored in the same units with respect to z
        dv = kernels.horner_many(self.da, u)[0]
        if dv == 0:
            return 0j
        return m * v / dv


def _scaled_coeffs(d: acb_poly, r: mpf, log2_scale: int):
    out = []
    rk = mpf(1)
    for c in d.coeffs():
        m = to_mpc(c) * rk
        out.append(complex(mpmath.ldexp(m.real, -log2_scale), mpmath.ldexp(m.imag, -log2_scale)))
        rk *= r
    return out


def _piece_winding(ev: _Evaluator, path: Callable, t0: float, t1: float, n0: int = 32,
                   max_pts: int = 1 << 15):
    """Total argument change along path(t), t in [t0, t1]; None if a value
    is too close to zero to trust its argument."""
    ts = np.linspace(t0, t1, n0 + 1)
    while True:
        z = path(ts)
        v, noise = ev.values(z)
        if np.any(np.abs(v) <= NOISE_FACTOR * noise) or not np.all(np.isfinite(v)):
            return None
        inc = kernels.arg_increments(v)
        bad = np.abs(inc) >= MAX_ARG_STEP
        # a zero of order m at distance d from the path can turn the argument
        # by a full 2 pi between samples unless the step stays below |f/f'| ~ d/m
        newton = np.abs(v) / np.maximum(np.abs(ev.derivative(z)), 1e-300)
        bad |= np.abs(np.diff(z)) > np.minimum(newton[:-1], newton[1:])
        if not bad.any():
            return float(inc.sum()), float(np.min(np.abs(v)))
        if len(ts) > max_pts:
            return None
        mids = (ts[:-1][bad] + ts[1:][bad]) / 2
        ts = np.sort(np.concatenate([ts, mids]))
        if t1 < t0:
            ts = ts[::-1]


def _arc(rho: float):
    return lambda th: rho * np.exp(1j * th)


def _ray(theta: float):
    e = complex(math.cos(theta), math.sin(theta))
    return lambda rr: rr * e


@dataclass(frozen=True)
class _Cell:
    """Polar cell rho0 <= |z| <= rho1, theta0 <= arg z <= theta1 (a disk if rho0 = 0
    and the angle range is full)."""

    rho0: float
    rho1: float
    th0: float
    th1: float

    @property
    def is_disk(self) -> bool:
        return self.rho0 == 0.0 and self.th1 - self.th0 >= 2 * math.pi

    def size(self) -> float:
        if self.is_disk:
            return 2 * self.rho1
        return max(self.rho1 - self.rho0, self.rho1 * (self.th1 - self.th0))

    def center(self) -> complex:
        if self.is_disk:
            return 0j
        rm = (self.rho0 + self.rho1) / 2
        tm = (self.th0 + self.th1) / 2
        return rm * complex(math.cos(tm), math.sin(tm))

    def contains(self, z: complex) -> bool:
        r = abs(z)
        if self.is_disk:
            return r <= self.rho1
        if not (self.rho0 <= r <= self.rho1):
            return False
        th = math.atan2(z.imag, z.real)
        while th < self.th0:
            th += 2 * math.pi
        while th > self.th0 + 2 * math.pi:
            th -= 2 * math.pi
        return th <= self.th1

    def winding(self, ev: _Evaluator):
        if self.is_disk:
            got = _piece_winding(ev, _arc(self.rho1), self.th0, self.th1, 64)
            if got is None:
                return None
            total = got[0]
        else:
            pieces = [(_arc(self.rho1), self.th0, self.th1),
                      (_ray(self.th1), self.rho1, self.rho0)]
            if self.rho0 > 0:
                pieces.append((_arc(self.rho0), self.th1, self.th0))
            pieces.append((_ray(self.th0), self.rho0, self.rho1))
            total = 0.0
            for path, a, b in pieces:
                got = _piece_winding(ev, path, a, b)
                if got is None:
                    return None
                total += got[0]
        w = total / (2 * math.pi)
        k = round(w)
        if abs(w - k) > 0.1:
            return None
        return int(k)

    def split(self, s: float) -> list:
        if self.is_disk:
            rm = self.rho1 * s
            phase = self.th0 + 0.3183 * s
            q = 2 * math.pi / 4
            return [_Cell(0.0, rm, self.th0, self.th1)] + [
                _Cell(rm, self.rho1, phase + j * q, phase + (j + 1) * q) for j in range(4)]
        rm = self.rho0 + s * (self.rho1 - self.rho0)
        tm = self.th0 + s * (self.th1 - self.th0)
        return [_Cell(a, b, c, d) for a, b in ((self.rho0, rm), (rm, self.rho1))
                for c, d in ((self.th0, tm), (tm, self.th1))]


def _contour_check(f: TruncatedSeries, r: mpf):
    """Winding of f on |z| = r from double samples, with the minimum sampled
    modulus in units of 2^e; None if the contour passes too near a zero."""
    ev = _Evaluator(f, r)
    got = _piece_winding(ev, _arc(float(r)), 0.0, 2 * math.pi, 256)
    if got is None:
        return None, ev
    total, vmin = got
    w = total / (2 * math.pi)
    k = round(w)
    if abs(w - k) > 0.1:
        return None, ev
    return (int(k), vmin), ev


def count_zeros(f: TruncatedSeries, r=None, *, iy_constant: float = 2.0,
                locate: bool = True) -> ZeroReport:
    """Zeros of f in |z| <= r counted with multiplicity, by the argument principle.

    The contour is nudged outward (at most 1% in 8 steps) when it passes
    within 2^(-precision/8) of a zero. Locations come from recursive
    subdivision of the disk into polar cells with per-cell winding numbers,
    polished by Newton's method at working precision.
    """
    r = inv_e() if r is None else mpf(r)
    if r <= 0:
        raise DomainError("contour radius must be positive")
    if f.is_zero():
        raise DomainError("f is identically zero")
    prec = get_precision()
    near = mpmath.ldexp(1, -prec // 8)
    r_used = r
    res = None
    ev = None
    for step in range(NUDGE_STEPS + 1):
        r_used = r * (1 + mpf(NUDGE_TOTAL) * step / NUDGE_STEPS)
        if r_used > f.radius:
            break
        res, ev = _contour_check(f, r_used)
        if res is not None:
            err = f.error_bound(r_used)
            vmin = mpmath.ldexp(res[1], ev.ss.log2_scale)
            if vmin <= 2 * err:
                raise PrecisionError(
                    f"remainder bound {mpmath.nstr(err, 5)} is not small against min |f| = "
                    f"{mpmath.nstr(vmin, 5)} on the contour; increase the truncation order")
            if _clear_of_zeros(f, r_used, ev, near):
                break
            res = None
    if res is None:
        raise PrecisionError(f"could not find a contour near |z| = {mpmath.nstr(r, 8)} clear of zeros")
    nudges = step
    count = res[0]
    locs, mults, resid = ([], [], [])
    if locate and count > 0:
        locs, mults, resid = _locate(f, ev, r_used, count)
    iy_ratio = None
    outer = inv_e() + DEFAULT_MARGIN
    if r_used < outer <= f.radius:
        iy_ratio = _log_max(f, outer) - _log_max(f, r_used)
    return ZeroReport(count, locs, mults, r_used, iy_ratio, iy_constant, nudges, resid)


def _clear_of_zeros(f: TruncatedSeries, r: mpf, ev: _Evaluator, near: mpf) -> bool:
    """Distance estimate |f|/|f'| at the sampled minimum against the threshold."""
    th = np.linspace(0, 2 * math.pi, 2048, endpoint=False)
    z = float(r) * np.exp(1j * th)
    v, _ = ev.values(z)
    j = int(np.argmin(np.abs(v)))
    zz = r * mpmath.expjpi(mpf(th[j]) / mpmath.pi)
    fa = to_acb(zz)
    val = abs(to_mpc(f.poly(fa)))
    der = abs(to_mpc(f.poly.derivative()(fa)))
    if der == 0:
        return True
    return val / der > near * max(1, r)


def _locate(f: TruncatedSeries, ev: _Evaluator, r: mpf, count: int):
    rf = float(r)
    root = _Cell(0.0, rf, 0.0, 2 * math.pi)
    active = [(root, count)]
    final = []
    while active:
        nxt = []
        for cell, m in active:
            if cell.size() <= FINEST * rf:
                final.append((cell, m, cell.center()))
                continue
            if m == 1 and cell.size() < rf / 8:
                z = _double_newton(ev, cell.center(), 1, cell)
                if z is not None:
                    final.append((cell, 1, z))
                    continue
            kids = None
            for s in SPLIT_FRACTIONS:
                cand = cell.split(s)
                ws = [c.winding(ev) for c in cand]
                if any(w is None or w < 0 for w in ws) or sum(ws) != m:
                    continue
                kids = [(c, w) for c, w in zip(cand, ws) if w > 0]
                break
            if kids is None:
                # no clean split: report the cluster at this level
                final.append((cell, m, cell.center()))
                continue
            nxt.extend(kids)
        active = nxt
    locs, mults, resid = [], [], []
    for cell, m, z0 in final:
        z, lg = _polish(f, ev, complex(z0), m, cell)
        locs.append(z)
        mults.append(m)
        resid.append(lg)
    order = sorted(range(len(locs)), key=lambda i: (float(locs[i].real), float(locs[i].imag)))
    return [locs[i] for i in order], [mults[i] for i in order], [resid[i] for i in order]


def _double_newton(ev: _Evaluator, z: complex, m: int, cell: _Cell, iters: int = 40):
    for _ in range(iters):
        step = ev.newton_step(z, m)
        z = z - step
        if not cell.contains(z):
            return None
        if abs(step) < 1e-14 * max(1.0, abs(z)):
            return z
    return None


def _polish(f: TruncatedSeries, ev: _Evaluator, z0: complex, m: int, cell: _Cell):
    prec = get_precision()
    tol = mpmath.ldexp(1, -(prec // 4 + 16))
    old = ctx.prec
    ctx.prec = prec + 32
    try:
        fa = f.poly
        da = fa.derivative()
        z = mpmath.mpc(z0)
        limit = 2 * cell.size()
        for _ in range(200):
            za = to_acb(z)
            v = to_mpc(fa(za))
            if v == 0:
                break
            d = to_mpc(da(za))
            if d == 0:
                break
            step = m * v / d
            zn = z - step
            if abs(zn - z0) > limit:
                break
            z = zn
            if abs(step) < tol:
                break
        val = abs(to_mpc(fa(to_acb(z))))
    finally:
        ctx.prec = old
    scale = mpmath.ldexp(1, ev.ss.log2_scale)
    lg = mpmath.log(val / scale) if val > 0 else -mpmath.inf
    return z, lg


def _log_max(f: TruncatedSeries, r: mpf) -> mpf:
    return boundary_maximum(f, r)[0]


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IYResult:
    bound: mpf
    holds: bool
    count: int
    log_ratio: mpf
    C: float
    r_inner: mpf
    r_outer: mpf

    def __iter__(self):
        yield self.bound
        yield self.holds


def iy_bound(f: TruncatedSeries, C: float = 2.0, *, r_inner=None, r_outer=None,
             rescale_inner: bool = False) -> IYResult:
    """C * log(max_{|z|=r_outer} |f| / max_{|z|=r_inner} |f|) against the zero count in |z| <= r_inner.

    The outer radius defaults to 1 when f is certified there (exact
    polynomials) and to 1/e + margin otherwise; the inner one to 1/e, or to
    r_outer/e with ``rescale_inner`` so the two radii keep the ratio e.
    """
    if f.is_zero():
        raise DomainError("f is identically zero")
    if r_outer is None:
        r_outer = mpf(1) if f.radius >= 1 else inv_e() + DEFAULT_MARGIN
    r_outer = mpf(r_outer)
    if r_inner is None:
        r_inner = r_outer * inv_e() if rescale_inner else inv_e()
    r_inner = mpf(r_inner)
    if not r_outer > r_inner:
        raise DomainError("outer radius must exceed inner radius")
    if r_outer > f.radius:
        raise DomainError("outer radius beyond the certified radius of f")
    ratio = _log_max(f, r_outer) - _log_max(f, r_inner)
    rep = count_zeros(f, r_inner, iy_constant=C, locate=False)
    bound = C * ratio
    slack = rel_tol() * max(1, abs(bound))
    return IYResult(bound, rep.count <= bound + slack, rep.count, ratio, C, r_inner, r_outer)


# ---------------------------------------------------------------------------
# order bound experiments


@dataclass
class OrderBoundFit:
    slope: float
    intercept: float
    pairs: list           # (t, max(0, ord)) for every usable sample
    envelope: list        # the pairs used in the fit
    C: float              # max ord / t^n over all samples
    n: int
    zero_counts: list | None = None
    C_zero: float | None = None
    skipped: int = 0

    def __float__(self):
        return self.slope

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "C": self.C,
            "n": self.n,
            "C_zero": self.C_zero,
            "samples": len(self.pairs),
            "skipped": self.skipped,
            "pairs": [[float(t), float(o)] for t, o in self.pairs],
        }


def envelope_fit(pairs: Sequence, buckets: int = 8, quantile: float = 0.1):
    """Least-squares slope of log ord against log t over the top decile of each
    log-spaced t bucket. Pairs with ord <= 0 or t <= 0 are ignored."""
    pts = [(float(t), float(o)) for t, o in pairs if float(o) > 0 and float(t) > 0]
    if len(pts) < 20:
        raise InsufficientDataError(f"only {len(pts)} usable samples (need 20)")
    lt = np.log([p[0] for p in pts])
    lo, hi = float(lt.min()), float(lt.max())
    if hi - lo < 1e-12:
        raise InsufficientDataError("all samples share one t value; slope undefined")
    edges = np.linspace(lo, hi, buckets + 1)
    env = []
    for b in range(buckets):
        inb = [p for p, x in zip(pts, lt) if edges[b] <= x <= edges[b + 1] and
               (b == buckets - 1 or x < edges[b + 1])]
        if not inb:
            continue
        inb.sort(key=lambda p: (-p[1], p[0]))
        keep = max(1, int(math.ceil(quantile * len(inb))))
        env.extend(inb[:keep])
    xs = np.log([p[0] for p in env])
    ys = np.log([p[1] for p in env])
    if len(env) < 2 or np.ptp(xs) == 0:
        raise InsufficientDataError("envelope has too few distinct t values")
    slope, intercept = np.polyfit(xs, ys, 1)
    return float(slope), float(intercept), env


def verify_order_bound(traj: Trajectory, family: Iterable[IntPolynomial], t_max,
                       *, count: bool = False, samples: int = 4096) -> OrderBoundFit:
    """Fit the upper envelope of ord against t over a polynomial family.

    Polynomials with t > t_max, or vanishing identically on the curve, are
    skipped and counted in ``skipped``.
    """
    t_max = mpf(t_max)
    pairs, zc = [], []
    skipped = 0
    n = traj.n
    C = 0.0
    C_zero = 0.0
    for p in family:
        if p.is_zero():
            skipped += 1
            continue
        _, _, t = t_of(p)
        if t > t_max:
            skipped += 1
            continue
        try:
            est = ord_gamma(traj, p, samples)
        except DegenerateInputError:
            skipped += 1
            continue
        o = max(mpf(0), est.value)
        pairs.append((t, o))
        if t > 0:
            C = max(C, float(o / t ** n))
        if count:
            rep = count_zeros(compose_poly(traj, p), locate=False)
            zc.append(rep.count)
            if t > 0:
                C_zero = max(C_zero, rep.count / float(t) ** n)
    slope, intercept, env = envelope_fit(pairs)
    return OrderBoundFit(slope, intercept, pairs, env, C, n,
                         zc if count else None, C_zero if count else None, skipped)


class ExpCurveFamily:
    """Random polynomials in (z, y) for the exp-curve y = e^z, biased towards
    small values on the curve.

    Three kinds are mixed: z^a * q with q random and small; integer
    polynomials whose composition with (z, e^z) vanishes to maximal order
    at 0, reduced to small height by LLL; and plain random polynomials.
    """

    def __init__(self, count: int, t_max: float = 40.0, seed: int = 0):
        self.count = count
        self.t_max = float(t_max)
        self.seed = seed

    def __iter__(self):
        rng = np.random.default_rng(self.seed)
        made = 0
        attempts = 0
        seen = set()
        while made < self.count and attempts < 50 * self.count:
            attempts += 1
            kind = rng.choice(3, p=[0.35, 0.45, 0.2])
            if kind == 0:
                p = _zpower_family(rng)
            elif kind == 1:
                p = _pade_family(rng)
            else:
                p = _random_poly(rng, 2, int(rng.integers(1, 8)), int(rng.integers(1, 50)))
            if p is None or p.is_zero():
                continue
            if t_of(p)[2] > self.t_max or p in seen:
                continue
            seen.add(p)
            made += 1
            yield p


def _random_poly(rng, n: int, deg: int, bound: int) -> IntPolynomial:
    from .polycore import monomial_exponents
    terms = {}
    for e in monomial_exponents(n, deg):
        if rng.random() < 0.6:
            c = int(rng.integers(-bound, bound + 1))
            if c:
                terms[e] = c
    if not terms:
        e = (deg, 0) if n == 2 else tuple([deg] + [0] * (n - 1))
        terms[e] = 1
    return IntPolynomial(n, terms)


def _zpower_family(rng) -> IntPolynomial:
    a = int(rng.integers(1, 30))
    q = _random_poly(rng, 2, int(rng.integers(0, 4)), int(rng.integers(1, 6)))
    return IntPolynomial.variable(0, 2) ** a * q


def _pade_family(rng) -> IntPolynomial | None:
    """Nonzero P(z, y) with deg_z <= a, deg_y <= b whose composition with
    (z, e^z) vanishes to order (a+1)(b+1)-1 at 0, scaled to a primitive
    integer vector."""
    from fractions import Fraction
    from flint import fmpq_mat, fmpz_mat
    a = int(rng.integers(0, 8))
    b = int(rng.integers(1, 6))
    shift = int(rng.integers(0, 3))
    unknowns = [(i, j) for i in range(a + 1) for j in range(b + 1)]
    K = len(unknowns) - 1 - shift
    if K < 1:
        return None
    # coefficient of z^k in z^i e^{jz} times k!: j^(k-i) k!/(k-i)!
    rows = []
    for k in range(K):
        row = []
        for i, j in unknowns:
            if k < i:
                row.append(0)
            else:
                row.append(j ** (k - i) * math.factorial(k) // math.factorial(k - i))
        rows.append(row)
    A = fmpz_mat(rows)
    X, nullity = A.nullspace()
    if nullity == 0:
        return None
    basis = [[int(X[r, c]) for r in range(X.nrows())] for c in range(nullity)]
    if nullity > 1:
        B = fmpz_mat(basis).lll()
        basis = [[int(B[r, c]) for c in range(B.ncols())] for r in range(B.nrows())]
    vec = next((v for v in basis if any(v)), None)
    if vec is None:
        return None
    g = 0
    for x in vec:
        g = math.gcd(g, x)
    vec = [x // g for x in vec]
    terms = {(i, j): c for (i, j), c in zip(unknowns, vec) if c}
    return IntPolynomial(2, terms)


def planted_series(zeros: Sequence, g: Sequence = (), length: int = 120,
                   rho_g: float = 1.0) -> TruncatedSeries:
    """prod (z - a_i) * exp(g(z)) as a truncated series on |z| <= 1/e + margin.

    The remainder of exp(g) beyond ``length`` is bounded by Cauchy's
    estimate on |z| = rho_g.
    """
    prec = get_precision()
    old = ctx.prec
    ctx.prec = prec + 32
    try:
        P = acb_poly([1])
        for a in zeros:
            P = P * acb_poly([-to_acb(a), 1])
        if len(g):
            G = acb_series([to_acb(c) for c in g], prec=length)
            E = acb_poly(G.exp().coeffs())
        else:
            E = acb_poly([1])
        f = P * E
    finally:
        ctx.prec = old
    R = inv_e() + DEFAULT_MARGIN
    tail = mpf(0)
    if len(g):
        rg = mpf(rho_g)
        gmax = sum(abs(mpmath.mpmathify(c)) * rg ** k for k, c in enumerate(g))
        q = R / rg
        tail_e = mpmath.exp(gmax) * q ** length / (1 - q)
        pmax = mpf(1)
        for a in zeros:
            pmax *= R + abs(mpmath.mpmathify(a))
        tail = pmax * tail_e
    return TruncatedSeries(f, R, BigMagnitude.from_value(tail))
