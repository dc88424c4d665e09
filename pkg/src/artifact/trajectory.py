"""Trajectories of polynomial vector fields as certified power series.

The series solves x'(z) = rho * xi(x(z)) / den coefficient by coefficient.
The remainder bound is an a-posteriori Gronwall estimate: with residual
r = x_M' - rho xi(x_M) and a Lipschitz constant L of the field on a
neighbourhood of x_M(disk), |x - x_M| <= sup|r| (e^{L R} - 1) / L along
every ray of length R.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import re
import threading
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Sequence

import mpmath
import numpy as np
from flint import acb, acb_poly, acb_series, ctx
from mpmath import mpf

from .config import get_precision, rel_tol
from .errors import ConvergenceError, DegenerateInputError, DomainError
from .hp import mpf_to_arb, to_acb, to_mpc
from .magnitude import BigMagnitude
from .polycore import IntPolynomial, t_of
from .series import TruncatedSeries

GUARD_BITS = 32
DEFAULT_MARGIN = mpf("0.05")
DEFAULT_TRUNCATION = 160
MAX_TRUNCATION = 2560


def inv_e():
    return mpmath.exp(-1)


@dataclass(frozen=True)
class VectorField:
    """xi_i = components[i] / denominator."""

    components: tuple
    denominator: int = 1

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise DomainError("empty vector field")
        n = len(comps)
        for c in comps:
            if c.num_vars != n:
                raise DomainError("every component must use n variables")
        if self.denominator <= 0:
            raise DomainError("denominator must be positive")
        object.__setattr__(self, "components", comps)

    @property
    def n(self) -> int:
        return len(self.components)

    def to_dict(self) -> dict:
        return {"components": [c.to_dict() for c in self.components],
                "denominator": self.denominator}

    @classmethod
    def from_dict(cls, d) -> "VectorField":
        return cls(tuple(IntPolynomial.from_dict(c) for c in d["components"]),
                   int(d.get("denominator", 1)))


def expcurve_field(n: int) -> VectorField:
    """d/dz + sum_j j z^{j-1} y_j d/dy_j on (z, y_1..y_n)."""
    dim = n + 1
    comps = [IntPolynomial.constant(1, dim)]
    for j in range(1, n + 1):
        e = [0] * dim
        e[0] = j - 1
        e[j] = 1
        comps.append(IntPolynomial(dim, {tuple(e): j}))
    return VectorField(tuple(comps))


def logcurve_field(embed: bool = False) -> VectorField:
    """z(1+z) d/dz + (1+z) d/dy1 + z d/dy2, optionally with y3 = z^2, y4 = z^3."""
    dim = 5 if embed else 3

    def mono(**kw):
        e = [0] * dim
        for name, a in kw.items():
            e[{"z": 0, "y1": 1, "y2": 2, "y3": 3, "y4": 4}[name]] = a
        return tuple(e)

    comps = [IntPolynomial(dim, {mono(z=1): 1, mono(z=2): 1}),
             IntPolynomial(dim, {mono(): 1, mono(z=1): 1}),
             IntPolynomial(dim, {mono(z=1): 1})]
    if embed:
        # y3' = 2 z z' = 2 y3 (1+z), y4' = 3 y4 (1+z) on the invariant set
        comps.append(IntPolynomial(dim, {mono(y3=1): 2, mono(z=1, y3=1): 2}))
        comps.append(IntPolynomial(dim, {mono(y4=1): 3, mono(z=1, y4=1): 3}))
    return VectorField(tuple(comps))


@dataclass(frozen=True)
class CurveConfig:
    name: str
    field: VectorField
    base_point: tuple
    rho: mpf = mpf(1)
    margin: mpf = DEFAULT_MARGIN
    truncation: int = DEFAULT_TRUNCATION

    def canonical(self) -> dict:
        return {
            "name": self.name,
            "field": self.field.to_dict(),
            "base_point": [[_dec(mpmath.mpmathify(b).real), _dec(mpmath.mpmathify(b).imag)]
                           for b in self.base_point],
            "rho": _dec(self.rho),
            "margin": _dec(self.margin),
            "truncation": self.truncation,
        }

    def content_hash(self, precision: int | None = None) -> str:
        blob = json.dumps({"config": self.canonical(),
                           "precision": precision or get_precision()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


def _dec(x) -> str:
    return mpmath.nstr(mpf(x), 60, strip_zeros=True)


def builtin_curve(spec: str) -> CurveConfig:
    m = re.fullmatch(r"\s*expcurve\((\d+)\)\s*", spec)
    if m:
        n = int(m.group(1))
        return CurveConfig(f"expcurve({n})", expcurve_field(n),
                           tuple([mpf(0)] + [mpf(1)] * n))
    m = re.fullmatch(r"\s*logcurve(?:\((\d+)\))?\s*", spec)
    if m:
        dim = int(m.group(1) or 3)
        if dim not in (3, 5):
            raise DomainError("logcurve supports ambient dimension 3 or 5")
        base = [mpf(1), mpf(0), mpmath.log(2)]
        if dim == 5:
            base += [mpf(1), mpf(1)]
        return CurveConfig(f"logcurve({dim})" if dim == 5 else "logcurve",
                           logcurve_field(dim == 5), tuple(base))
    raise DomainError(f"unknown built-in curve {spec!r}")


def load_curve(spec: str) -> CurveConfig:
    """A built-in name such as expcurve(1), logcurve, logcurve(5), or a JSON file."""
    path = Path(spec)
    if path.exists():
        d = json.loads(path.read_text())
        n = int(d["n"])
        comps = tuple(IntPolynomial.from_dict(c) if isinstance(c, dict) else IntPolynomial.from_text(c)
                      for c in d["field"])
        fld = VectorField(comps, int(d.get("denominator", 1)))
        if fld.n != n:
            raise DomainError("field length disagrees with n")
        base = tuple(_parse_coordinate(b) for b in d["base_point"])
        return CurveConfig(d.get("name", path.stem), fld, base,
                           mpf(d.get("rho", "1")), mpf(d.get("margin", "0.05")),
                           int(d.get("truncation", DEFAULT_TRUNCATION)))
    return builtin_curve(spec)


def _parse_coordinate(b):
    """A decimal string, or a [re, im] pair of decimal strings."""
    if isinstance(b, (list, tuple)):
        re_, im_ = b
        return mpmath.mpc(mpf(re_), mpf(im_)) if mpf(im_) != 0 else mpf(re_)
    return mpf(b)


# ---------------------------------------------------------------------------
# series arithmetic helpers


def _eval_poly_series(p: IntPolynomial, xs: Sequence, length: int, cache: dict | None = None):
    """p(x_1(z), ..., x_n(z)) as an acb_series of the given length."""
    n = p.num_vars
    if cache is None:
        cache = {}
    powers = cache.setdefault("powers", [[acb_series([1], prec=length)] for _ in range(n)])
    monos = cache.setdefault("monos", {})
    one = acb_series([1], prec=length)

    def power(j, a):
        tab = powers[j]
        while len(tab) <= a:
            tab.append(tab[-1] * xs[j])
        return tab[a]

    def mono(key):
        # key covers variables 1..n-1 (variable 0 handled by Horner-free linear combination)
        if not any(key):
            return one
        got = monos.get(key)
        if got is None:
            j = max(i for i, a in enumerate(key) if a)
            rest = list(key)
            rest[j] = 0
            rest = tuple(rest)
            got = power(j + 1, key[j]) if not any(rest) else mono(rest) * power(j + 1, key[j])
            monos[key] = got
        return got

    groups: dict = {}
    for e, c in p.items():
        groups.setdefault(e[1:], []).append((e[0], c))
    total = acb_series([0], prec=length)
    for key in sorted(groups):
        inner = acb_series([0], prec=length)
        for a, c in groups[key]:
            inner = inner + power(0, a) * c
        total = total + (inner if not any(key) else inner * mono(key))
    return total


def _abs_sum(poly: acb_poly, r) -> mpf:
    r = mpf(r)
    total = mpf(0)
    rk = mpf(1)
    for c in poly.coeffs():
        total += mpmath.mpmathify(c.abs_upper()) * rk
        rk *= r
    return total


def _majorant_value(p: IntPolynomial, X: Sequence) -> mpf:
    return p.abs_evaluate(X)


def _lipschitz_inf(p: IntPolynomial, X: Sequence) -> mpf:
    """sum_j sup |d_j p| over the polydisk |x_j| <= X_j."""
    return mpmath.fsum(p.derivative(j).abs_evaluate(X) for j in range(p.num_vars))


# ---------------------------------------------------------------------------


class Trajectory:
    """Certified truncated series of a trajectory on |z| <= 1/e + margin."""

    def __init__(self, config: CurveConfig, polys: list, M: int, tail: BigMagnitude,
                 radius: mpf, residual_sup: mpf, lipschitz: mpf, precision: int):
        self.config = config
        self.field = config.field
        self.base_point = tuple(config.base_point)
        self.rho = mpf(config.rho)
        self.margin = mpf(config.margin)
        self.polys = polys
        self.M = M
        self.tail_bound = tail
        self.radius = radius
        self.residual_sup = residual_sup
        self.lipschitz = lipschitz
        self.precision = precision
        self._lock = threading.Lock()
        self._sample_cache: dict = {}
        self._compose_cache: dict = {}

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def series(self) -> list:
        return [TruncatedSeries(p, self.radius, self.tail_bound) for p in self.polys]

    def coefficient(self, i: int, k: int):
        cs = self.polys[i].coeffs()
        return to_mpc(cs[k]) if k < len(cs) else mpmath.mpc(0)

    def bounds(self, r) -> list:
        """Upper bounds for |x_j| on |z| <= r (series sum plus remainder)."""
        eps = self.tail_bound.value()
        return [_abs_sum(p, r) + eps for p in self.polys]

    def summary(self) -> dict:
        return {
            "curve": self.config.name,
            "n": self.n,
            "rho": _dec(self.rho),
            "margin": _dec(self.margin),
            "truncation_order": self.M,
            "certified_radius": _dec(self.radius),
            "tail_bound_log": self.tail_bound.to_json(),
            "residual_sup": mpmath.nstr(self.residual_sup, 12),
            "lipschitz": mpmath.nstr(self.lipschitz, 12),
            "precision": self.precision,
        }

    def __repr__(self):
        return (f"Trajectory({self.config.name}, M={self.M}, "
                f"tail=e^{mpmath.nstr(self.tail_bound.log_value, 6) if not self.tail_bound.is_zero else '-inf'})")


def _picard_coefficients(fld: VectorField, base: Sequence, rho: mpf, M: int) -> list:
    """Taylor coefficients 0..M of the solution, one new order per sweep."""
    n = fld.n
    b = [to_acb(x) for x in base]
    scale = to_acb(rho) / fld.denominator
    xs = [acb_series([bi], prec=1) for bi in b]
    for L in range(1, M + 1):
        cur = [acb_series(x.coeffs(), prec=L) for x in xs]
        cache: dict = {}
        new = []
        for i, comp in enumerate(fld.components):
            F = _eval_poly_series(comp, cur, L, cache) if not comp.is_zero() else acb_series([0], prec=L)
            g = (F * scale).integral()
            cs = g.coeffs()
            cs = (cs + [acb(0)] * (L + 1))[:L + 1]
            cs[0] = b[i]
            new.append(acb_series(cs, prec=L + 1))
        xs = new
    return [acb_poly(x.coeffs()) for x in xs]


def _extend_coefficients(fld, base, rho, polys, M_new):
    """Continue the sweep from an existing solution of lower order."""
    b = [to_acb(x) for x in base]
    scale = to_acb(rho) / fld.denominator
    M_old = polys[0].length() - 1
    xs = [acb_series(p.coeffs() + [acb(0)] * (M_old + 1 - p.length()), prec=M_old + 1) for p in polys]
    for L in range(M_old + 1, M_new + 1):
        cur = [acb_series(x.coeffs(), prec=L) for x in xs]
        cache: dict = {}
        new = []
        for i, comp in enumerate(fld.components):
            F = _eval_poly_series(comp, cur, L, cache) if not comp.is_zero() else acb_series([0], prec=L)
            g = (F * scale).integral()
            cs = g.coeffs()
            cs = (cs + [acb(0)] * (L + 1))[:L + 1]
            cs[0] = b[i]
            new.append(acb_series(cs, prec=L + 1))
        xs = new
    return [acb_poly(x.coeffs()) for x in xs]


def _residual_polys(fld: VectorField, rho: mpf, polys: list) -> list:
    """x_M' - rho xi(x_M) / den, computed to full degree."""
    longest = max(p.length() for p in polys)
    full = max(1, max(c.degree() if not c.is_zero() else 0 for c in fld.components)) * longest + 2
    xs = [acb_series(p.coeffs(), prec=full) for p in polys]
    scale = to_acb(rho) / fld.denominator
    cache: dict = {}
    out = []
    for i, comp in enumerate(fld.components):
        F = _eval_poly_series(comp, xs, full, cache) if not comp.is_zero() else acb_series([0], prec=full)
        r = acb_poly(polys[i].derivative().coeffs()) - acb_poly((F * scale).coeffs())
        out.append(r)
    return out


def _certify(fld: VectorField, rho: mpf, polys: list, residuals: list, R: mpf, s: mpf = mpf(1)):
    """Gronwall bound for the scaled problem z -> s z. Returns (eps, L, rsup) or None."""
    Rs = R * s
    rsup = max(_abs_sum(r, Rs) for r in residuals) * s
    X = [_abs_sum(p, Rs) for p in polys]
    eps0 = mpf(1)
    Xe = [x + eps0 for x in X]
    scale = abs(rho) * s / fld.denominator
    L = max(_lipschitz_inf(c, Xe) for c in fld.components) * scale
    if L == 0:
        eps = rsup * R
    else:
        eps = rsup * mpmath.expm1(L * R) / L
    if not eps < eps0:
        return None
    return eps, L, rsup


def solve_trajectory(config: CurveConfig | VectorField, base: Sequence | None = None,
                     rho=None, M: int | None = None, *, margin=None,
                     auto_extend: bool = True, use_cache: bool = False,
                     cache_dir: str | os.PathLike | None = None) -> Trajectory:
    """Solve x' = rho xi(x), x(0) = base, as a certified series on |z| <= 1/e + margin.

    M doubles (up to MAX_TRUNCATION) until the remainder bound drops below
    2^(-precision/2) unless auto_extend is False.
    """
    if isinstance(config, VectorField):
        if base is None:
            raise DomainError("base point required")
        config = CurveConfig("custom", config, tuple(mpmath.mpmathify(b) for b in base),
                             mpf(rho if rho is not None else 1),
                             mpf(margin if margin is not None else DEFAULT_MARGIN),
                             int(M or DEFAULT_TRUNCATION))
    else:
        kw = {}
        if base is not None:
            kw["base_point"] = tuple(mpmath.mpmathify(b) for b in base)
        if rho is not None:
            kw["rho"] = mpf(rho)
        if margin is not None:
            kw["margin"] = mpf(margin)
        if M is not None:
            kw["truncation"] = int(M)
        if kw:
            config = CurveConfig(config.name, config.field, kw.get("base_point", config.base_point),
                                 kw.get("rho", config.rho), kw.get("margin", config.margin),
                                 kw.get("truncation", config.truncation))
    if config.truncation < 8:
        raise DomainError("truncation order must be at least 8")
    if len(config.base_point) != config.field.n:
        raise DomainError("base point dimension does not match the field")
    if config.rho <= 0 or config.margin <= 0:
        raise DomainError("rho and margin must be positive")

    prec = get_precision()
    if use_cache:
        cached = _cache_load(config, prec, cache_dir)
        if cached is not None:
            return cached

    R = inv_e() + config.margin
    target = mpmath.ldexp(1, -prec // 2)
    old = ctx.prec
    ctx.prec = prec + GUARD_BITS
    try:
        Mcur = config.truncation
        polys = _picard_coefficients(config.field, config.base_point, config.rho, Mcur)
        while True:
            residuals = _residual_polys(config.field, config.rho, polys)
            cert = _certify(config.field, config.rho, polys, residuals, R)
            ok = cert is not None and cert[0] < target
            if ok or not auto_extend or Mcur >= MAX_TRUNCATION:
                break
            Mcur = min(2 * Mcur, MAX_TRUNCATION)
            polys = _extend_coefficients(config.field, config.base_point, config.rho, polys, Mcur)
    finally:
        ctx.prec = old

    if cert is None or (auto_extend and not cert[0] < target):
        s_best = _largest_scale(config, polys, residuals, R, target)
        raise ConvergenceError(
            f"remainder bound on |z| <= {mpmath.nstr(R, 8)} not certified for rho={mpmath.nstr(config.rho, 8)} "
            f"at truncation {Mcur}; largest admissible rho found: {mpmath.nstr(s_best * config.rho, 8)}",
            largest_rho=s_best * config.rho)
    eps, L, rsup = cert
    final_config = CurveConfig(config.name, config.field, config.base_point, config.rho,
                               config.margin, Mcur)
    traj = Trajectory(final_config, polys, Mcur, BigMagnitude.from_value(eps), R, rsup, L, prec)
    if use_cache:
        _cache_store(traj, config, cache_dir)
    return traj


def _largest_scale(config, polys, residuals, R, target) -> mpf:
    def good(s):
        c = _certify(config.field, config.rho, polys, residuals, R, s)
        return c is not None and c[0] < target

    lo, hi = mpf(0), mpf(1)
    if good(hi):
        return hi
    for _ in range(40):
        mid = (lo + hi) / 2
        if good(mid):
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# disk cache


def _cache_root(cache_dir) -> Path:
    root = cache_dir or os.environ.get("ARTIFACT_CACHE_DIR") or Path.home() / ".cache" / "artifact"
    return Path(root)


def _cache_load(config: CurveConfig, prec: int, cache_dir):
    path = _cache_root(cache_dir) / f"traj-{config.content_hash(prec)}.json"
    if not path.exists():
        return None
    d = json.loads(path.read_text())
    polys = [acb_poly([acb(_arb_from(c[0]), _arb_from(c[1])) for c in comp]) for comp in d["coeffs"]]
    # cached polys are midpoints; ball radii were folded into the stored tail
    cfg = CurveConfig(config.name, config.field, config.base_point, config.rho, config.margin, d["M"])
    return Trajectory(cfg, polys, d["M"], BigMagnitude(mpf(d["tail_log"])),
                      mpf(d["radius"]), mpf(d["residual_sup"]), mpf(d["lipschitz"]), prec)


def _arb_from(pair):
    from flint import arb, arf
    man, exp = int(pair[0]), int(pair[1])
    return arb(arf((man, exp)))


def _cache_store(traj: Trajectory, config: CurveConfig, cache_dir) -> None:
    root = _cache_root(cache_dir)
    root.mkdir(parents=True, exist_ok=True)
    path = root / f"traj-{config.content_hash(traj.precision)}.json"
    if path.exists():
        return
    ball = max((TruncatedSeries(p).ball_error(traj.radius) for p in traj.polys), default=mpf(0))
    tail = traj.tail_bound.value() + ball

    def pair(x):
        sign, man, exp, _ = mpf(mpmath.mpmathify(x))._mpf_
        return [str(-int(man) if sign else int(man)), int(exp)]

    d = {
        "config": config.canonical(),
        "M": traj.M,
        "coeffs": [[[pair(c.real.mid()), pair(c.imag.mid())] for c in p.coeffs()] for p in traj.polys],
        "tail_log": mpmath.nstr(mpmath.log(tail), 40),
        "radius": mpmath.nstr(traj.radius, 60),
        "residual_sup": mpmath.nstr(traj.residual_sup, 30),
        "lipschitz": mpmath.nstr(traj.lipschitz, 30),
    }
    tmp = path.with_suffix(f".tmp{os.getpid()}")
    tmp.write_text(json.dumps(d, sort_keys=True))
    try:
        os.link(tmp, path)  # exclusive create: first writer wins
    except FileExistsError:
        pass
    finally:
        tmp.unlink(missing_ok=True)


# ---------------------------------------------------------------------------
# evaluation


def eval_gamma(traj: Trajectory, z) -> tuple:
    z = mpmath.mpmathify(z)
    if abs(z) > traj.radius:
        raise DomainError(f"|z| = {mpmath.nstr(abs(z), 8)} outside certified radius {mpmath.nstr(traj.radius, 8)}")
    za = to_acb(z)
    return tuple(to_mpc(p(za)) for p in traj.polys)


def eval_gamma_derivative(traj: Trajectory, z) -> tuple:
    za = to_acb(z)
    return tuple(to_mpc(p.derivative()(za)) for p in traj.polys)


def gamma_samples(traj: Trajectory, zs: np.ndarray) -> np.ndarray:
    """gamma at many points in double precision, shape (len(zs), n)."""
    from . import kernels
    zs = np.ascontiguousarray(zs, dtype=np.complex128)
    out = np.empty((len(zs), traj.n), dtype=np.complex128)
    r = traj.radius
    for j in range(traj.n):
        s = TruncatedSeries(traj.polys[j], traj.radius, traj.tail_bound).scaled(r)
        out[:, j] = s.eval_unit(zs / float(r)) * 2.0 ** s.log2_scale
    return out


def compose_poly(traj: Trajectory, p: IntPolynomial, length: int | None = None) -> TruncatedSeries:
    """Series of p(gamma(z)) with a remainder bound on the certified disk."""
    if p.num_vars != traj.n:
        raise DomainError(f"polynomial has {p.num_vars} variables, trajectory has {traj.n}")
    if p.is_zero():
        raise DomainError("zero polynomial")
    key = (p, length)
    with traj._lock:
        got = traj._compose_cache.get(key)
    if got is not None:
        return got
    R = traj.radius
    eps = traj.tail_bound.value()
    d = p.degree()
    X = [_abs_sum(q, R) for q in traj.polys]
    lip_part = _lipschitz_inf(p, [x + eps for x in X]) * eps if d > 0 else mpf(0)
    full = d * traj.M + 1
    L = length or min(traj.M + 1, full)
    target = max(lip_part, mpmath.ldexp(1, -get_precision() // 2))
    old = ctx.prec
    ctx.prec = traj.precision + GUARD_BITS
    try:
        while True:
            xs = [acb_series(q.coeffs(), prec=L) for q in traj.polys]
            f = _eval_poly_series(p, xs, L)
            beyond = mpf(0) if L >= full else _beyond_bound(p, traj.polys, R, L)
            if beyond <= target or L >= full or length is not None:
                break
            L = min(2 * L, full)
    finally:
        ctx.prec = old
    tail = BigMagnitude.from_value(lip_part + beyond)
    out = TruncatedSeries(acb_poly(f.coeffs()), R, tail)
    with traj._lock:
        traj._compose_cache[key] = out
    return out


def _beyond_bound(p: IntPolynomial, polys: list, R: mpf, L: int) -> mpf:
    """Bound on sum_{k>=L} |[p(x_M)]_k| R^k via Cauchy estimates on larger circles."""
    best = mpmath.inf
    for f in (1.25, 1.5, 2, 3, 5, 10, 30):
        R2 = R * f
        X2 = [_abs_sum(q, R2) for q in polys]
        B2 = p.abs_evaluate(X2)
        q = 1 / mpf(f)
        bound = B2 * q ** L / (1 - q)
        best = min(best, bound)
    return best


# ---------------------------------------------------------------------------
# order along the curve


@dataclass(frozen=True)
class OrderEstimate:
    value: mpf
    error: mpf
    argmax: mpmath.mpc
    log_max: mpf
    samples: int

    def __float__(self):
        return float(self.value)


def boundary_maximum(f: TruncatedSeries, r, samples: int = 4096, brackets: int = 3):
    """log max |f| on |z| = r: FFT samples, golden-section refinement, final
    high-precision evaluation. Returns (log_max, theta, mesh_gap, noise)."""
    r = mpf(r)
    ss = f.scaled(r)
    vals = ss.circle(samples)
    mags = np.abs(vals)
    if not np.all(np.isfinite(mags)) or mags.max() == 0:
        raise DegenerateInputError("boundary samples are not usable")
    K = samples
    # local maxima of the cyclic sample sequence
    left = np.roll(mags, 1)
    right = np.roll(mags, -1)
    peaks = np.nonzero((mags >= left) & (mags >= right))[0]
    order = peaks[np.argsort(-mags[peaks], kind="stable")]
    chosen = list(order[:brackets]) or [int(np.argmax(mags))]
    h = 2 * math.pi / K
    best = (-1.0, 0.0)
    for j in chosen:
        t, v = _golden_max(ss, (j - 1) * h, (j + 1) * h)
        if v > best[0]:
            best = (v, t)
    sampled_max = float(mags.max())
    refined_max, theta = best
    if refined_max < sampled_max:
        refined_max, theta = sampled_max, float(np.argmax(mags)) * h
    z = r * mpmath.expjpi(mpf(theta) / mpmath.pi)
    val = abs(f.eval(z))
    if val == 0:
        raise DegenerateInputError("maximum evaluates to zero")
    log_max = mpmath.log(val)
    mesh_gap = math.log(refined_max / sampled_max) if sampled_max > 0 else math.inf
    # rounding in the double refinement, in units of the maximum
    noise = 1e-13 * max(1.0, ss.abs_total / refined_max)
    return log_max, mpf(theta), mesh_gap, noise


def _golden_max(ss, a: float, b: float, tol: float = 1e-12):
    g = (math.sqrt(5) - 1) / 2

    def F(t):
        return abs(ss.eval_unit(np.array([complex(math.cos(t), math.sin(t))]))[0])

    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = F(c), F(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = F(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = F(d)
    t = (a + b) / 2
    return t, F(t)


def ord_gamma(traj: Trajectory, p: IntPolynomial, samples: int = 4096) -> OrderEstimate:
    """-log max |p| over Gamma, via the maximum on |z| = 1/e."""
    f = compose_poly(traj, p)
    r = inv_e()
    err_abs = f.error_bound(r)
    ss = f.scaled(r)
    if ss.abs_total == 0 or mpmath.ldexp(ss.abs_total, ss.log2_scale) <= err_abs:
        raise DegenerateInputError("p vanishes identically on Gamma to working precision")
    log_max, theta, mesh_gap, noise = boundary_maximum(f, r, samples)
    if mpmath.exp(log_max) <= 2 * err_abs:
        raise DegenerateInputError("p vanishes identically on Gamma to working precision")
    rel_tail = err_abs / mpmath.exp(log_max)
    error = mpf(mesh_gap) + mpf(noise) + rel_tail
    return OrderEstimate(-log_max, error, r * mpmath.expjpi(theta / mpmath.pi), log_max, samples)


# ---------------------------------------------------------------------------
# hypersurface distance probe


@dataclass(frozen=True)
class HypersurfaceDescriptor:
    p: IntPolynomial
    deg: int = 0
    h: mpf = mpf(0)
    t: mpf = mpf(0)

    def __init__(self, p: IntPolynomial):
        if p.is_zero():
            raise DomainError("hypersurface needs a nonzero polynomial")
        d, h, t = t_of(p)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "deg", d)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "t", t)


def _poly_arrays(p: IntPolynomial):
    exps = np.array([e for e, _ in p.items()], dtype=np.int64).reshape(len(p), p.num_vars)
    coeffs = np.array([complex(c) for _, c in p.items()], dtype=np.complex128)
    return np.ascontiguousarray(exps), coeffs


def dprop_probe(traj: Trajectory, V: HypersurfaceDescriptor, samples: int = 512) -> mpf:
    """Upper estimate of -log max_{omega in Gamma} dist_inf(omega, V).

    Heuristic: per sample, Newton projection onto V gives a point at
    distance U, and dist >= min(U, |p(omega)| / Lip) with Lip the sum of
    derivative majorants on the box of radius U. The maximum of these
    lower bounds is reported through -log.
    """
    from . import kernels
    p = V.p
    if p.num_vars != traj.n:
        raise DomainError("dimension mismatch")
    if V.deg == 0:
        raise DomainError("probe needs a nonconstant polynomial")
    r = float(inv_e())
    nb = max(samples // 2, 8)
    zs = [r * np.exp(2j * np.pi * np.arange(nb) / nb)]
    rings = max(2, int(math.sqrt(samples - nb) / 2))
    for i in range(1, rings):
        rr = r * i / rings
        m = max(4, int((samples - nb) * i / sum(range(1, rings))))
        zs.append(rr * np.exp(2j * np.pi * (np.arange(m) + 0.5) / m))
    zs.append(np.array([0j]))
    zs = np.concatenate(zs)
    pts = gamma_samples(traj, zs)
    exps, coeffs = _poly_arrays(p)
    grads = [_poly_arrays(p.derivative(j)) if not p.derivative(j).is_zero() else None
             for j in range(p.num_vars)]
    dmaj = [p.derivative(j) for j in range(p.num_vars)]
    vals = kernels.poly_eval_many(exps, coeffs, pts)
    best = -math.inf
    for idx in range(len(zs)):
        omega = pts[idx]
        pv = abs(vals[idx])
        U = _newton_project(p, exps, coeffs, grads, omega)
        if U is None:
            U = 1.0 + float(np.max(np.abs(omega)))
        box = [float(abs(w)) + U for w in omega]
        lip = sum(float(q.abs_evaluate(box)) for q in dmaj if not q.is_zero())
        lower = min(U, pv / lip) if lip > 0 else U
        best = max(best, lower)
    if best <= 0:
        return mpmath.inf
    return -mpmath.log(best)


def _newton_project(p, exps, coeffs, grads, omega, iters: int = 60):
    from . import kernels
    x = np.array(omega, dtype=np.complex128)
    scale = 1.0 + float(np.max(np.abs(omega)))
    for _ in range(iters):
        v = kernels.poly_eval_many(exps, coeffs, x[None, :])[0]
        g = np.array([kernels.poly_eval_many(*gr, x[None, :])[0] if gr is not None else 0j
                      for gr in grads])
        gn = float(np.vdot(g, g).real)
        if gn == 0:
            return None
        step = v * np.conj(g) / gn
        x = x - step
        if np.max(np.abs(step)) < 1e-15 * scale:
            break
    v = kernels.poly_eval_many(exps, coeffs, x[None, :])[0]
    mag = sum(abs(c) for c in coeffs) * (1 + float(np.max(np.abs(x)))) ** p.degree()
    if abs(v) > 1e-10 * mag:
        return None
    return float(np.max(np.abs(x - omega)))
