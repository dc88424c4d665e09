"""Desk-scale covering of a trajectory piece by exceptional disks, and the
example censuses of points that such a cover has to contain."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from flint import acb, acb_series, ctx, fmpz_poly
from mpmath import mpf

from .config import get_precision, rel_tol
from .criterion import CriterionSchedule
from .errors import (CalibrationError, DomainError, InfeasibleError, PreconditionError)
from .hp import to_mpc
from .magnitude import BigMagnitude
from .polycore import IntPolynomial, a_omega, t_of
from .smallpoly import (Coordinate, ExactAlgebraic, IdealBudget, WitnessPoint, pigeonhole_min_t,
                        siegel_search)
from .trajectory import (GUARD_BITS, Trajectory, _abs_sum, compose_poly, inv_e, ord_gamma)
from .zerocount import count_zeros

DEGREE_CAP = 6            # desk-scale cap on deg p_N
TAYLOR_TERMS = 80         # smallness rows: weighted Taylor coefficients along the curve
SMALLNESS_BITS = 100
SMALLNESS_RADIUS = mpf("0.38")
DISK_C_MAX = 16           # largest accepted constant in the off-disk lower bound
DISK_RETRIES = 4
H_CONSTANT = 2            # h = exp(-N^theta / H_CONSTANT)
GRID_RADII = 24
GRID_ANGLES = 96
BOUNDARY_SAMPLES = 512
N_STEP_BITS = 2           # N grows by a factor 4 per step in the search
N_STEPS = 200


# ---------------------------------------------------------------------------
# covers


@dataclass
class DiskCover:
    disks: list = field(default_factory=list)          # (center mpc, radius BigMagnitude)
    calibration: dict = field(default_factory=dict)

    @property
    def total_diameter(self) -> BigMagnitude:
        total = BigMagnitude.zero()
        for _, r in self.disks:
            total = total + r * 2
        return total

    @property
    def count(self) -> int:
        return len(self.disks)

    def contains(self, z) -> bool:
        z = mpmath.mpmathify(z)
        for c, r in self.disks:
            d = abs(z - c)
            if d == 0 or BigMagnitude.from_value(d) <= r:
                return True
        return False

    def union(self, other: "DiskCover") -> "DiskCover":
        disks = sorted(self.disks + other.disks, key=lambda d: (float(d[0].real), float(d[0].imag)))
        return DiskCover(disks, {})

    def to_dict(self) -> dict:
        return {"count": self.count,
                "log_total_diameter": _num(self.total_diameter.log_value)
                if not self.total_diameter.is_zero else None,
                "disks": [{"center": _cnum(c), "log_radius": _num(r.log_value)} for c, r in self.disks],
                "calibration": self.calibration}


def _num(x, digits: int = 30):
    if x is None:
        return None
    return mpmath.nstr(mpf(x), digits, strip_zeros=False)


def _cnum(z, digits: int = 30):
    z = mpmath.mpmathify(z)
    return [_num(mpmath.re(z), digits), _num(mpmath.im(z), digits)]


def _sample_grid(r) -> np.ndarray:
    """Boundary circle plus a polar grid of |z| <= r (double precision)."""
    r = float(r)
    th = 2 * np.pi * np.arange(BOUNDARY_SAMPLES) / BOUNDARY_SAMPLES
    pts = [r * np.exp(1j * th)]
    for i in range(GRID_RADII):
        rho = r * i / GRID_RADII
        if i == 0:
            pts.append(np.array([0j]))
            continue
        k = max(8, int(GRID_ANGLES * i / GRID_RADII))
        ph = 2 * np.pi * (np.arange(k) + 0.5 * (i % 2)) / k
        pts.append(rho * np.exp(1j * ph))
    return np.concatenate(pts)


def _log_abs_on(f, zs: np.ndarray, r) -> np.ndarray:
    """log |f| at the points, double evaluation with high-precision fallback
    where rounding could matter."""
    ss = f.scaled(mpf(r))
    u = zs / float(r)
    vals = ss.eval_unit(u)
    bound = ss.rounding_bound(u) + ss.rel_error
    out = np.empty(len(zs))
    scale = ss.log_scale
    for i, (v, b) in enumerate(zip(vals, bound)):
        if abs(v) > 1e3 * b:
            out[i] = math.log(abs(v)) + scale
        else:
            w = f.eval(mpmath.mpc(zs[i].real, zs[i].imag))
            out[i] = float(mpmath.log(abs(w))) if w != 0 else -math.inf
    return out


def exceptional_disks(traj: Trajectory, p: IntPolynomial, h: BigMagnitude, *, power: int = 1,
                      c_max=DISK_C_MAX, retries: int = DISK_RETRIES, ord_value=None) -> DiskCover:
    """Disks around the zeros of (p o gamma)^power with radii summing to h/2, plus
    the calibrated constant C in

        log|Q(gamma(z))| >= -C log(1/h) (ord Q + t(Q))     off the disks,

    with Q = p^power and t(Q) bounded by power*(deg p + log ||p||_1) when
    power > 1. The radii double (at most ``retries`` times) while C > c_max.
    """
    h = h if isinstance(h, BigMagnitude) else BigMagnitude.from_value(h)
    if h.is_zero or not h.log_value < -1:
        raise DomainError("need 0 < h < 1/e")
    f = compose_poly(traj, p)
    margin = traj.radius - inv_e()
    rep = count_zeros(f, inv_e() + margin / 2)
    zeros = rep.zero_locations
    ordv = ord_value if ord_value is not None else ord_gamma(traj, p).value
    d, hp, tp = t_of(p)
    if power > 1:
        l1 = mpmath.fsum(abs(c) for _, c in p.items())
        t_unit = d + mpmath.log(l1)
    else:
        t_unit = tp
    r = inv_e()
    zs = _sample_grid(r)
    logs = _log_abs_on(f, zs, r)
    log_inv_h = -h.log_value
    base_radius = h / (2 * max(1, len(zeros)))
    centers = np.array([complex(z) for z in zeros]) if zeros else np.zeros(0, dtype=complex)
    attempt = 0
    while True:
        radius = base_radius * (2 ** attempt)
        rf = float(radius)
        if len(centers):
            dist = np.min(np.abs(zs[:, None] - centers[None, :]), axis=1)
            off = dist > rf * (1 + 1e-9)
        else:
            off = np.ones(len(zs), dtype=bool)
        worst = float(-np.min(logs[off])) if off.any() else -math.inf
        denom = float(log_inv_h * (ordv + t_unit))
        needed = max(worst, 0.0) / denom if denom > 0 else math.inf
        if needed <= float(c_max) or attempt >= retries:
            break
        attempt += 1
    calibration = {"C": needed, "c_max": float(c_max), "retries": attempt, "zeros": len(zeros),
                   "multiplicities": [m * power for m in rep.multiplicities],
                   "log_h": _num(h.log_value), "ord_p": _num(ordv), "t_unit": _num(t_unit),
                   "power": power, "samples": int(off.sum()),
                   "min_log_abs_off_disks": -worst if worst != -math.inf else None}
    if needed > float(c_max):
        raise CalibrationError(f"off-disk lower bound needs C = {needed:.4g} > {float(c_max)} "
                               f"after {attempt} retries", calibration)
    disks = sorted(((mpmath.mpc(z), radius) for z in zeros),
                   key=lambda d: (float(d[0].real), float(d[0].imag)))
    return DiskCover(disks, calibration)


# ---------------------------------------------------------------------------
# the auxiliary polynomials


def embedded_monomials(D: int) -> list:
    """Monomials of total degree <= D in (z, y1, y2, y3, y4) on the embedded
    log-curve, one per function z^m y1^b y2^c: z-powers use y4 = z^3 first,
    then a single factor z or y3 = z^2. Distinct entries give linearly
    independent functions on the curve."""
    out = []
    for j in range(D + 1):
        for b in range(j + 1):
            c = j - b
            for f in range(D - j + 1):
                for a, e in ((0, 0), (1, 0), (0, 1)):
                    if j + f + a + e <= D:
                        out.append((a, b, c, e, f))
    from .polycore import monomial_exponents
    order = {m: i for i, m in enumerate(monomial_exponents(5, D))}
    return sorted(set(out), key=order.__getitem__)


def taylor_columns(traj: Trajectory, monomials: Sequence, terms: int = TAYLOR_TERMS,
                   r=SMALLNESS_RADIUS) -> list:
    """Per monomial, its first ``terms`` Taylor coefficients along gamma times r^j."""
    r = mpf(r)
    old = ctx.prec
    ctx.prec = traj.precision + GUARD_BITS
    try:
        xs = [acb_series(q.coeffs(), prec=terms) for q in traj.polys]
        cache = {}

        def power(i, a):
            key = (i, a)
            if key not in cache:
                cache[key] = acb_series([1], prec=terms) if a == 0 else power(i, a - 1) * xs[i]
            return cache[key]

        cols = []
        rp = [r ** j for j in range(terms)]
        for e in monomials:
            s = acb_series([1], prec=terms)
            for i, a in enumerate(e):
                if a:
                    s = s * power(i, a)
            cs = list(s.coeffs()) + [acb(0)] * terms
            cols.append([to_mpc(cs[j]) * rp[j] for j in range(terms)])
        return cols
    finally:
        ctx.prec = old


_SIEGEL_CACHE: dict = {}


def build_pN(traj: Trajectory, witnesses: Sequence[WitnessPoint], N: int, budget: IdealBudget, *,
             n: int | None = None, degree_cap: int | None = DEGREE_CAP, require_count: bool = True,
             monomials: Sequence | None = None, smallness: bool = True):
    """Small integer polynomial through the witnesses with deg <= N/2 and
    log-height <= N/2. Returns (p, SiegelReport).

    ``require_count`` enforces the full witness count ceil(N^(n-k-alpha));
    ``degree_cap`` bounds the degree at desk scale.
    """
    n = n or traj.n
    k, alpha = budget.k, mpf(budget.alpha)
    need = int(mpmath.ceil(mpf(N) ** (n - k - alpha)))
    if require_count and len(witnesses) < need:
        raise PreconditionError(f"{len(witnesses)} witnesses supplied, {need} needed for N = {N}")
    bad = budget.check(N, n)
    if bad:
        raise PreconditionError("ideal budget violated: " + "; ".join(bad))
    threshold = pigeonhole_min_t(list(budget.t_values), n, k, budget.c)
    if N < threshold:
        raise InfeasibleError(f"N = {N} is below the pigeonhole threshold {threshold}", best_height=None)
    deg_bound = N // 2
    if degree_cap is not None:
        deg_bound = min(deg_bound, degree_cap)
    height_bound = mpf(N) / 2
    if monomials is None and n == 5 and traj.config.name.startswith("logcurve"):
        monomials = embedded_monomials(deg_bound)
    key = (id(traj), tuple((mpmath.nstr(w.z, 40), w.provenance) for w in witnesses),
           deg_bound, None if monomials is None else tuple(monomials), smallness, get_precision())
    got = _SIEGEL_CACHE.get(key)
    if got is None:
        cols = None
        if smallness:
            mons = monomials if monomials is not None else _all_monomials(n, deg_bound)
            cols = taylor_columns(traj, mons)
        got = siegel_search(witnesses, deg_bound, mpmath.inf, monomials=monomials,
                            smallness_columns=cols, smallness_weight_bits=SMALLNESS_BITS if smallness else 0)
        _SIEGEL_CACHE[key] = got
    p, rep = got
    if p.height() > height_bound:
        raise InfeasibleError(f"smallest constructed log-height {mpmath.nstr(p.height(), 8)} "
                              f"exceeds N/2 = {mpmath.nstr(height_bound, 8)}", best_height=p.height())
    return p, rep


def _all_monomials(n, d):
    from .polycore import monomial_exponents
    return monomial_exponents(n, d)


def iN_from_ord(ord_value, N: int, n: int) -> int:
    """Least integer i with i * ord > N^n."""
    ord_value = mpf(ord_value)
    if not ord_value > 0:
        raise DomainError("ord of p_N must be positive (p_N small on Gamma)")
    Nn = mpf(N) ** n
    q = Nn / ord_value
    i = int(mpmath.ceil(q))
    if i * ord_value <= Nn:
        i += 1
    while i > 1 and (i - 1) * ord_value > Nn:
        i -= 1
    return max(i, 1)


def compute_iN(traj: Trajectory, p_N: IntPolynomial, N: int, n: int, *, ord_value=None) -> int:
    """Least i with i * log max_Gamma |p_N| < -N^n. The ord estimate enters
    through its certified lower end (value - error)."""
    if ord_value is None:
        est = ord_gamma(traj, p_N)
        ord_value = est.value - est.error
    return iN_from_ord(ord_value, N, n)


@dataclass
class AuxiliaryFamily:
    N: int
    p_N: IntPolynomial
    i_N: int
    ord_pN: mpf
    A_N: DiskCover
    schedule: CriterionSchedule
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"N": str(self.N), "p_N": json.loads(self.p_N.to_text()), "i_N": str(self.i_N),
                "ord_pN": _num(self.ord_pN), "A_N": self.A_N.to_dict(), "checks": self.checks}


def _sandwich(traj, schedule: CriterionSchedule, N: int, i_N: int, ord_low, logs_off,
              A_max) -> dict:
    """Both sides of the Q_N bounds at the off-disk samples (log scale)."""
    s = schedule
    upper_ok = i_N * ord_low > s.U(N)
    lower = A_max * (s.delta(N) + s.tau(N)) - s.U(N - 1) * s.sigma(N) / 2
    worst = min(logs_off) if len(logs_off) else math.inf
    lower_ok = bool(i_N * mpf(worst) > lower) if len(logs_off) else True
    return {"upper_holds": bool(upper_ok), "lower_holds": lower_ok,
            "log_upper_bound": _num(-s.U(N), 20), "log_lower_bound": _num(lower, 20),
            "min_log_QN_off_disks": _num(i_N * mpf(worst), 20) if len(logs_off) else None,
            "max_log_QN": _num(-i_N * ord_low, 20)}


# ---------------------------------------------------------------------------
# census of the log-curve


LOG_CURVE_EMBEDDING = "y3 = z^2, y4 = z^3 appended to (z, log z, log(1+z))"


def log_curve_parameter(theta):
    """Trajectory parameter of the point with first coordinate theta (base point z = 1)."""
    return mpmath.log(2 * theta / (1 + theta))


def enumerate_log_curve_points(T: int, domain=None, *, dim: int = 5) -> list:
    """Roots of z^a = (1+z)^b, 1 <= a, b <= T, whose trajectory parameter lies
    in the disk domain = (center, radius) (default: |t| <= 1/e) and for which
    a log z = b log(1+z) holds with principal logarithms."""
    if T < 1:
        raise DomainError("T must be at least 1")
    if dim not in (3, 5):
        raise DomainError("dim must be 3 or 5")
    center, radius = domain if domain is not None else (0, inv_e())
    center, radius = mpmath.mpmathify(center), mpf(radius)
    prec = get_precision()
    tol = mpmath.ldexp(1, -prec // 2)
    found = {}
    for a in range(1, T + 1):
        for b in range(1, T + 1):
            if math.gcd(a, b) != 1:
                continue
            poly = fmpz_poly([0] * a + [1]) - fmpz_poly([1, 1]) ** b
            if poly.degree() < 1:
                continue
            _, factors = poly.factor()
            for P, _mult in factors:
                co = [int(c) for c in P.coeffs()]
                if len(co) < 2:
                    continue
                with mpmath.workprec(prec + 64):
                    roots = mpmath.polyroots(co[::-1], maxsteps=400, extraprec=2 * prec)
                for th in roots:
                    th = mpmath.mpc(th)
                    if abs(th) < tol or abs(1 + th) < tol:
                        continue
                    t = log_curve_parameter(th)
                    if abs(t - center) > radius:
                        continue
                    if abs(a * mpmath.log(th) - b * mpmath.log(1 + th)) > tol:
                        continue
                    if abs(mpmath.im(th)) < tol:
                        th = mpmath.mpc(mpmath.re(th))
                        t = mpmath.mpc(mpmath.re(t))
                    key = (mpmath.nstr(mpmath.re(th), 30), mpmath.nstr(mpmath.im(th), 30))
                    if key in found:
                        continue
                    found[key] = _log_witness(th, t, a, b, co, dim)
    return [found[k] for k in sorted(found, key=lambda k: (mpf(k[0]), mpf(k[1])))]


def _log_witness(th, t, a, b, minpoly, dim) -> WitnessPoint:
    omega = [th, mpmath.log(th), mpmath.log(1 + th)]
    coords = [Coordinate((0, 1)), Coordinate((), (1,)), Coordinate((), (Fraction(a, b),))]
    if dim == 5:
        omega += [th ** 2, th ** 3]
        coords += [Coordinate((0, 0, 1)), Coordinate((0, 0, 0, 1))]
    prov = ExactAlgebraic(tuple(minpoly), tuple(coords), ("log z",),
                          f"z^{a} = (1+z)^{b}; {a}*y1 = {b}*y2")
    return WitnessPoint(mpmath.mpc(t), tuple(mpmath.mpc(x) for x in omega), prov)


def witness_relation(w: WitnessPoint) -> tuple:
    """(a, b) read back from the provenance of a log-curve witness."""
    rel = w.provenance.relation
    left = rel.split(";")[0]
    a = int(left.split("^")[1].split()[0])
    b = int(left.split("^")[2])
    return a, b


def separation_check(points: Sequence[WitnessPoint], radius) -> bool:
    """True iff all pairwise sup-norm distances of the omegas exceed 2 radius."""
    r = radius if isinstance(radius, BigMagnitude) else BigMagnitude.from_value(radius)
    twice = r * 2
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d = max(abs(mpmath.mpmathify(x) - mpmath.mpmathify(y))
                    for x, y in zip(points[i].omega, points[j].omega))
            if d == 0 or BigMagnitude.from_value(d) <= twice:
                return False
    return True


# ---------------------------------------------------------------------------
# census of the exp-curve


def _exp_fits(m: int, n: int, T) -> bool:
    """m^(n-1) + (n-1) log m <= T, decided exactly for integer data."""
    lead = m ** (n - 1)
    if lead > T:
        return False
    if m == 1:
        return lead <= T
    slack = mpf(T) - lead
    with mpmath.workprec(128 + 4 * max(1, int(math.log2(max(2, T))))):
        return (n - 1) * mpmath.log(m) <= slack


def _fraction(x) -> Fraction:
    if isinstance(x, (int, float, str, Fraction)):
        return Fraction(x)
    x = mpf(x)
    sign, man, exp, _ = x._mpf_
    v = Fraction(int(man)) * (Fraction(2) ** int(exp))
    return -v if sign else v


def exp_curve_pairs(T, n: int, R) -> list:
    """Coprime (p, q), q >= 1, |p/q| <= R, with max(|p|, q) within the t-budget."""
    R = _fraction(R)
    out = []
    m = 1
    while _exp_fits(m, n, T):
        for q in range(1, m + 1):
            for p in range(-m, m + 1):
                if max(abs(p), q) != m or math.gcd(p, q) != 1:
                    continue
                if Fraction(abs(p), q) <= R:
                    out.append((p, q))
        m += 1
    return out


@dataclass(frozen=True)
class ExpCensus:
    count: int
    fitted_exponent: float | None
    sweep: tuple

    def __iter__(self):
        yield self.count
        yield self.fitted_exponent

    def to_dict(self) -> dict:
        return {"count": self.count, "fitted_exponent": self.fitted_exponent,
                "sweep": [list(x) for x in self.sweep]}


def count_exp_curve(T: int, n: int, R, *, sweep: Sequence | None = None) -> ExpCensus:
    """Census of rational-parameter points of the exp-curve with t-proxy <= T,
    and the least-squares slope of log count against log T over a sweep
    (default: 9 values geometrically spaced from T/100 to T)."""
    if n < 2:
        raise DomainError("n must be at least 2")
    count = len(exp_curve_pairs(T, n, R))
    if sweep is None:
        if T < 4:
            return ExpCensus(count, None, ((T, count),))
        lo = max(4, T / 100)
        sweep = sorted({int(round(lo * (T / lo) ** (i / 8))) for i in range(9)})
    pairs = tuple((int(t), len(exp_curve_pairs(t, n, R))) for t in sweep)
    use = [(math.log(t), math.log(c)) for t, c in pairs if c > 0 and t > 0]
    slope = None
    if len({x for x, _ in use}) >= 2:
        xs = np.array([x for x, _ in use])
        ys = np.array([y for _, y in use])
        slope = float(np.polyfit(xs, ys, 1)[0])
    return ExpCensus(count, slope, pairs)


# ---------------------------------------------------------------------------
# the cover


def theorem_budgets(schedule: CriterionSchedule, T, C_count=1, C_diam=H_CONSTANT) -> dict:
    """Disk-count and total-diameter budgets at T (diameter as a log)."""
    s = schedule
    T = mpf(T)
    e_count = s.c2 * (s.n - s.k - s.alpha + 1) * max(mpf(1), 1 / (s.c1 * s.alpha))
    count = mpf(C_count) * T ** e_count
    log_diam = -(T ** (s.theta * max(s.c1, 1 / s.alpha))) / mpf(C_diam)
    return {"count": count, "log_count": mpmath.log(count), "log_diameter": log_diam,
            "count_exponent": e_count, "diameter_exponent": s.theta * max(s.c1, 1 / s.alpha)}


def reindex_rho(schedule: CriterionSchedule, a) -> mpf:
    """Running the cover at T^a gives diameters e^(-T^rho / C) with this rho."""
    s = schedule
    return mpf(a) * s.theta * max(s.c1, 1 / s.alpha)


def n_range(schedule: CriterionSchedule, T) -> tuple:
    """(R, lowest N, log of the highest N) of the range [R^c1, R^c2]."""
    s = schedule
    T = mpf(T)
    R = max(T, T ** (1 / (s.c1 * s.alpha)))
    lo = int(mpmath.ceil(R ** s.c1))
    return R, max(lo, 2), s.c2 * mpmath.log(R)


@dataclass
class CoverReport:
    T: int
    cover: DiskCover
    families: list
    census: list
    contained: list
    budgets: dict
    constants: dict
    meta: dict

    @property
    def sound(self) -> bool:
        return all(self.contained)

    def to_dict(self) -> dict:
        return {"T": self.T, "meta": self.meta, "constants": self.constants,
                "budgets": self.budgets,
                "cover": self.cover.to_dict(),
                "families": [f.to_dict() for f in self.families],
                "census": [dict(w.to_dict(), inside=ok) for w, ok in zip(self.census, self.contained)],
                "sound": self.sound}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def cover_gamma(traj: Trajectory, schedule: CriterionSchedule, T: int, *, census=None,
                degree_cap: int = DEGREE_CAP, stages: int = 1, seed: int = 0) -> CoverReport:
    """Cover of the census points of Gamma(T) by exceptional disks.

    The witnesses are the census points themselves (exact provenance). N runs
    upward from ceil(R^c1) by factors 2^N_STEP_BITS until the Q_N bounds hold
    at every off-disk sample; ``stages`` consecutive admissible N are united.
    ``seed`` is recorded only: every step is deterministic.
    """
    s = schedule
    n, k = s.n, s.k
    if traj.n != n:
        raise DomainError(f"trajectory dimension {traj.n} differs from schedule n = {n}")
    if census is None:
        census = enumerate_log_curve_points(T, dim=n)
    R, N_lo, log_N_hi = n_range(s, T)
    t_values = tuple(mpf(max(witness_relation(w))) for w in census) or (mpf(1),)
    budget = IdealBudget(k, t_values, mpf(1), s.alpha)
    families = []
    cover = DiskCover()
    N = N_lo
    steps = 0
    last_error = None
    p = rep = None
    ord_low = None
    while len(families) < stages:
        if mpmath.log(N) > log_N_hi or steps > N_STEPS:
            raise InfeasibleError(f"no admissible N in [R^c1, R^c2] for T = {T}"
                                  + (f": {last_error}" if last_error else ""), best_height=None)
        steps += 1
        try:
            p, rep = build_pN(traj, census, N, budget, n=n, degree_cap=degree_cap, require_count=False)
        except (InfeasibleError, PreconditionError) as exc:
            last_error = f"N = {N}: {exc}"
            N <<= N_STEP_BITS
            continue
        if ord_low is None:
            est = ord_gamma(traj, p)
            ord_low = est.value - est.error
            ord_est = est
        i_N = compute_iN(traj, p, N, n, ord_value=ord_low)
        h = BigMagnitude.exp(-(mpf(N) ** s.theta) / H_CONSTANT)
        try:
            A_N = exceptional_disks(traj, p, h, power=i_N, ord_value=ord_est.value)
        except (CalibrationError, DomainError) as exc:
            last_error = f"N = {N}: {exc}"
            N <<= N_STEP_BITS
            continue
        logs_off = _off_disk_logs(traj, p, A_N)
        A_max = _a_omega_max(traj, s.c3)
        sandwich = _sandwich(traj, s, N, i_N, ord_low, logs_off, A_max)
        if not (sandwich["upper_holds"] and sandwich["lower_holds"]):
            last_error = f"N = {N}: Q_N bounds fail"
            N <<= N_STEP_BITS
            continue
        t_Q = i_N * (p.degree() + mpmath.log(mpmath.fsum(abs(c) for _, c in p.items())))
        checks = {"sandwich": sandwich, "t_pN": _num(t_of(p)[2], 20), "t_pN_le_N": bool(t_of(p)[2] <= N),
                  "log_t_QN_bound": _num(mpmath.log(t_Q), 20),
                  "C_tQ": _num(t_Q / mpf(N) ** (k + 1 + s.alpha), 12),
                  "C_iN": _num(mpf(i_N) / mpf(N) ** (k + s.alpha), 12),
                  "witnesses": len(census),
                  "witnesses_required": _num(mpmath.ceil(mpf(N) ** (n - k - s.alpha)), 12),
                  "disk_count_budget_C": _num(mpf(A_N.count) / mpf(N) ** (n - k - s.alpha), 12),
                  "siegel": rep.to_dict(), "ord_error": _num(ord_est.error, 10),
                  "A_omega_max": _num(A_max, 12)}
        families.append(AuxiliaryFamily(N, p, i_N, ord_est.value, A_N, s, checks))
        cover = cover.union(A_N)
        N <<= N_STEP_BITS
    cover.calibration = {"stages": [f.A_N.calibration for f in families]}
    contained = [cover.contains(w.z) for w in census if abs(w.z) <= inv_e()]
    inside = [w for w in census if abs(w.z) <= inv_e()]
    C_disk = max(f.A_N.calibration["C"] for f in families)
    budgets = theorem_budgets(s, T)
    total = cover.total_diameter
    realized_c = None
    if not total.is_zero and total.log_value < 0:
        realized_c = -(mpf(T) ** budgets["diameter_exponent"]) / total.log_value
    budget_report = {
        "count": cover.count,
        "count_budget": _num(budgets["count"], 12),
        "count_within": bool(cover.count <= budgets["count"]),
        "log_total_diameter": _num(total.log_value, 20) if not total.is_zero else None,
        "log_diameter_budget": _num(budgets["log_diameter"], 20),
        "diameter_within": bool(total.is_zero or total.log_value <= budgets["log_diameter"]),
        "realized_diameter_C": _num(realized_c, 12) if realized_c is not None else None,
    }
    constants = {"H_CONSTANT": H_CONSTANT, "disk_C": C_disk, "DEGREE_CAP": degree_cap,
                 "SMALLNESS_BITS": SMALLNESS_BITS, "TAYLOR_TERMS": TAYLOR_TERMS,
                 "SMALLNESS_RADIUS": _num(SMALLNESS_RADIUS, 6), "schedule": s.to_dict()}
    meta = {"curve": traj.config.name, "embedding": LOG_CURVE_EMBEDDING,
            "precision": get_precision(), "seed": seed, "R": _num(R, 20), "N_low": str(N_lo),
            "N_steps": steps, "log_N_high": _num(log_N_hi, 12)}
    return CoverReport(T, cover, families, inside, contained, budget_report, constants, meta)


def _off_disk_logs(traj, p, cover: DiskCover):
    f = compose_poly(traj, p)
    zs = _sample_grid(inv_e())
    logs = _log_abs_on(f, zs, inv_e())
    if not cover.disks:
        return list(logs)
    centers = np.array([complex(c) for c, _ in cover.disks])
    radii = np.array([float(r) for _, r in cover.disks])
    dist = np.abs(zs[:, None] - centers[None, :])
    off = np.all(dist > radii[None, :] * (1 + 1e-9), axis=1)
    return list(logs[off])


def _a_omega_max(traj, c3) -> mpf:
    """Upper bound for A(omega) over Gamma from the coefficient sums of gamma."""
    X = max(_abs_sum(q, inv_e()) for q in traj.polys) + traj.tail_bound.value()
    return a_omega([X] * traj.n, c3)
