"""Parameter schedules and derived quantities for the Philippon-type
algebraic independence criterion, and direct checks of its conditions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import mpmath
from mpmath import mpf

from .config import get_precision, rel_tol
from .errors import ArtifactError, CapError, DomainError, InfeasibleError
from .polycore import (HomogeneousPolynomial, ProjectivePoint, bombieri_norm, dehomogenize,
                       nonvanishing_radius, norm_at)

DEFAULT_HORIZON = 10 ** 4
DEFAULT_CAP = 10 ** 9
# position of gamma_1 inside (0, gamma_2); see validate_schedule
GAMMA1_FRACTION = mpf(1) / 3


def _dec(x) -> str:
    return mpmath.nstr(mpf(x), 40, strip_zeros=True)


@dataclass(frozen=True)
class CriterionSchedule:
    """Constants of the parameter chain and the functions they define:
    delta(x) = tau(x) = x^((n-eps)/(k+1)), sigma(x) = x^(eta/(k+1)), U(x) = x^n."""

    n: int
    k: int
    alpha: mpf
    eps: mpf
    eta: mpf
    gamma1: mpf
    gamma2: mpf
    gamma3: mpf
    theta: mpf
    c1: mpf
    c2: mpf
    c3: mpf
    a0: int | None = None

    @property
    def beta(self) -> mpf:
        return (self.n - self.eps) / (self.k + 1)

    def delta(self, x) -> mpf:
        return mpf(x) ** self.beta

    def tau(self, x) -> mpf:
        return mpf(x) ** self.beta

    def sigma(self, x) -> mpf:
        return mpf(x) ** (self.eta / (self.k + 1))

    def U(self, x) -> mpf:
        return mpf(x) ** self.n

    def chain(self) -> dict:
        """Each inequality of the parameter chain with its truth value."""
        n, k = self.n, self.k
        one = mpf(1)
        return {
            "alpha < n/(k+1) - (k+1)": 0 < self.alpha < mpf(n) / (k + 1) - (k + 1),
            "eps < n - (k+1)(k+1+alpha)": 0 < self.eps < n - (k + 1) * (k + 1 + self.alpha),
            "eta < min(eps, (n-eps)/(k+1))": 0 < self.eta < min(self.eps, (n - self.eps) / (k + 1)),
            "gamma2 = eps - eta": abs(self.gamma2 - (self.eps - self.eta)) <= rel_tol() * max(one, abs(self.gamma2)),
            "gamma1 < gamma2": 0 < self.gamma1 < self.gamma2,
            "gamma3 < 1/(k+1) - eps/(n(k+1))": 0 < self.gamma3 < one / (k + 1) - self.eps / (n * (k + 1)),
            "theta < eta/(k+1)": 0 < self.theta < self.eta / (k + 1),
            "c1 < gamma3/gamma2": 0 < self.c1 < self.gamma3 / self.gamma2,
            "c2 > 1/gamma1": self.c2 > 1 / self.gamma1,
            "c3 > 1": self.c3 > 1,
        }

    def violations(self) -> list:
        return [name for name, ok in self.chain().items() if not ok]

    def to_dict(self) -> dict:
        d = {name: _dec(getattr(self, name)) for name in
             ("alpha", "eps", "eta", "gamma1", "gamma2", "gamma3", "theta", "c1", "c2", "c3")}
        d.update(n=self.n, k=self.k, a0=self.a0,
                 functions={"delta": f"x^{_dec(self.beta)}", "tau": f"x^{_dec(self.beta)}",
                            "sigma": f"x^{_dec(self.eta / (self.k + 1))}", "U": f"x^{self.n}"})
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CriterionSchedule":
        kw = {name: mpf(d[name]) for name in
              ("alpha", "eps", "eta", "gamma1", "gamma2", "gamma3", "theta", "c1", "c2", "c3")}
        return cls(int(d["n"]), int(d["k"]), a0=d.get("a0"), **kw)


def validate_schedule(n: int, k: int, *, overrides: dict | None = None,
                      horizon: int = DEFAULT_HORIZON, find_a0: bool = True) -> CriterionSchedule:
    """Schedule with each constant in the middle of its open interval, taken
    in dependency order.

    Exceptions to the midpoint rule: gamma_1 sits at a third of (0, gamma_2)
    so that the growth assumption starts holding below the default horizon;
    c_2 and c_3 have unbounded intervals and are set to 2/gamma_1 and 2.
    Any constant may be overridden; the chain is re-checked afterwards.
    """
    if n < 2:
        raise DomainError("n must be at least 2")
    if k < 0:
        raise DomainError("k must be non-negative")
    if not k < math.sqrt(n) - 1:
        raise InfeasibleError(f"hypothesis k < sqrt(n) - 1 fails for n={n}, k={k} "
                              f"(sqrt({n}) - 1 = {math.sqrt(n) - 1:.6g})")
    ov = {key: mpf(v) for key, v in (overrides or {}).items() if key != "a0"}
    half = mpf(1) / 2

    def pick(name, value):
        return ov.get(name, value)

    alpha = pick("alpha", (mpf(n) / (k + 1) - (k + 1)) * half)
    eps = pick("eps", (n - (k + 1) * (k + 1 + alpha)) * half)
    eta = pick("eta", min(eps, (n - eps) / (k + 1)) * half)
    gamma2 = pick("gamma2", eps - eta)
    gamma1 = pick("gamma1", gamma2 * GAMMA1_FRACTION)
    gamma3 = pick("gamma3", (mpf(1) / (k + 1) - eps / (n * (k + 1))) * half)
    theta = pick("theta", eta / (k + 1) * half)
    c1 = pick("c1", gamma3 / gamma2 * half)
    c2 = pick("c2", 2 / gamma1)
    c3 = pick("c3", mpf(2))
    s = CriterionSchedule(n, k, alpha, eps, eta, gamma1, gamma2, gamma3, theta, c1, c2, c3)
    bad = s.violations()
    if bad:
        raise InfeasibleError("parameter chain violated: " + "; ".join(bad))
    a0 = (overrides or {}).get("a0")
    if a0 is not None:
        return replace(s, a0=int(a0))
    if find_a0:
        rep = check_assumptions(s, (1, horizon))
        return replace(s, a0=rep.a0)
    return s


@dataclass
class AssumptionReport:
    a_range: tuple
    a0: int | None
    violations: list = field(default_factory=list)   # (a, assumption number)

    @property
    def ok(self) -> bool:
        return self.a0 is not None

    def to_dict(self, limit: int = 50) -> dict:
        return {"a_range": list(self.a_range), "a0": self.a0,
                "violation_count": len(self.violations),
                "violations": [list(v) for v in self.violations[:limit]]}


def _assumptions_at(s: CriterionSchedule, a: int) -> list:
    """Numbers of the assumptions that fail at a."""
    la = mpmath.log(a)
    n, k = s.n, s.k
    lb = s.beta * la                      # log delta = log tau
    lsig = s.eta / (k + 1) * la
    bad = []
    # 1: sigma^{k+1} < tau + n delta
    if not (k + 1) * lsig < lb + mpmath.log(1 + n):
        bad.append(1)
    # 2: a^g1 < U / ((delta + tau) delta^k sigma^{k+1}) < a^g2
    lr = n * la - (mpmath.log(2) + lb) - k * lb - (k + 1) * lsig
    if not (s.gamma1 * la < lr < s.gamma2 * la):
        bad.append(2)
    # 3: U(ceil(a^g3)) <= tau(a)
    m = int(mpmath.ceil(mpf(a) ** s.gamma3))
    if not n * mpmath.log(m) <= lb:
        bad.append(3)
    return bad


def check_assumptions(s: CriterionSchedule, a_range=(1, DEFAULT_HORIZON)) -> AssumptionReport:
    """Evaluate the three growth assumptions for every integer a in the range.

    a0 in the report is the smallest a from which all three hold through
    the end of the range (None if they fail at the end).
    """
    lo, hi = int(a_range[0]), int(a_range[1])
    if lo < 1 or hi < lo:
        raise DomainError("a_range must be a non-empty interval of positive integers")
    violations = []
    last_bad = None
    # extra bits so that near-ties are decided for the rounded constants
    with mpmath.workprec(get_precision() + 64):
        for a in range(lo, hi + 1):
            bad = _assumptions_at(s, a)
            for b in bad:
                violations.append((a, b))
            if bad:
                last_bad = a
    if last_bad is None:
        a0 = lo
    elif last_bad == hi:
        a0 = None
    else:
        a0 = last_bad + 1
    return AssumptionReport((lo, hi), a0, violations)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CriterionQuadruple:
    delta0: mpf
    tau0: mpf
    sigma0: mpf
    U0: mpf
    i0: int
    T: mpf = mpf(0)
    a1: mpf = mpf(0)
    evaluations: int = 0
    const_lower: mpf = mpf(0)   # T^(1/gamma2) / i0
    const_upper: mpf = mpf(0)   # i0 / T^(1/gamma1)

    def preamble(self, k: int) -> bool:
        """delta0 >= 1, sigma0 >= 1 and sigma0^{k+1} < tau0 < U0."""
        return (self.delta0 >= 1 and self.sigma0 >= 1
                and self.sigma0 ** (k + 1) < self.tau0 < self.U0)

    def s_range(self, k: int) -> tuple:
        return self.tau0 / self.sigma0 ** (k + 1), self.U0 / self.sigma0 ** (k + 1)

    def to_dict(self) -> dict:
        return {"delta0": _dec(self.delta0), "tau0": _dec(self.tau0), "sigma0": _dec(self.sigma0),
                "U0": _dec(self.U0), "i0": str(self.i0), "T": _dec(self.T), "a1": _dec(self.a1),
                "evaluations": self.evaluations, "const_lower": _dec(self.const_lower),
                "const_upper": _dec(self.const_upper)}


def main_inequality(s: CriterionSchedule, T, i: int) -> bool:
    """2(k+1)T(delta + (k+1)(tau + n delta) + 3 log(n+1) delta) < U / (delta^k sigma^{k+1}) at i."""
    n, k = s.n, s.k
    d = s.delta(i)
    t = s.tau(i)
    lhs = 2 * (k + 1) * mpf(T) * (d + (k + 1) * (t + n * d) + 3 * mpmath.log(n + 1) * d)
    rhs = s.U(i) / (d ** k * s.sigma(i) ** (k + 1))
    return lhs < rhs


def a1_of(s: CriterionSchedule) -> mpf:
    if s.a0 is None:
        raise DomainError("schedule has no a0; run check_assumptions first")
    return mpf(s.a0) ** max(mpf(1), 1 / s.gamma3)


def compute_i0(s: CriterionSchedule, T, *, cap: int = DEFAULT_CAP) -> CriterionQuadruple:
    """Smallest integer i0 >= a1 = a0^max(1, 1/gamma3) satisfying the main inequality.

    For the schedule's power laws the inequality is monotone in i, so the
    search gallops upward and then bisects. ``cap`` bounds the number of
    inequality evaluations.
    """
    T = mpf(T)
    if T < 2:
        raise DomainError("T must be at least 2")
    start = int(mpmath.ceil(a1_of(s)))
    evals = 0

    def P(i):
        nonlocal evals
        evals += 1
        if evals > cap:
            raise CapError(f"i0 search exceeded {cap} evaluations")
        return main_inequality(s, T, i)

    if P(start):
        i0 = start
    else:
        lo, step = start, 1
        hi = start + step
        while not P(hi):
            lo = hi
            step *= 2
            hi = start + step
            if step.bit_length() > 4096:
                raise CapError("i0 search diverged (the main inequality never holds)")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if P(mid):
                hi = mid
            else:
                lo = mid
        i0 = hi
    n = s.n
    d0 = s.delta(i0)
    q = CriterionQuadruple(
        delta0=d0, tau0=s.tau(i0) + n * d0, sigma0=s.sigma(i0), U0=s.U(i0) / 2, i0=i0,
        T=T, a1=a1_of(s), evaluations=evals,
        const_lower=T ** (1 / s.gamma2) / i0,
        const_upper=mpf(i0) / T ** (1 / s.gamma1))
    return q


def compute_N0(q: CriterionQuadruple, s: CriterionSchedule, S) -> int:
    """Smallest N0 in (0, i0] with 2S <= U(N0) / sigma0^{k+1}.

    Comparisons at the endpoints use the relative tolerance
    2^-(precision-32), so S = U0/sigma0^{k+1} yields N0 = i0.
    """
    S = mpf(S)
    k = s.k
    lo, hi = q.s_range(k)
    tol = rel_tol()
    if not (S > lo and S <= hi * (1 + tol)):
        raise DomainError(f"S = {mpmath.nstr(S, 10)} outside ({mpmath.nstr(lo, 10)}, {mpmath.nstr(hi, 10)}]")
    sk = q.sigma0 ** (k + 1)
    target = 2 * S * sk

    def ok(N):
        return s.U(N) >= target * (1 - tol)

    N = max(1, int(mpmath.ceil(target ** (mpf(1) / s.n))))
    while N > 1 and ok(N - 1):
        N -= 1
    while not ok(N):
        N += 1
    N = min(N, q.i0)
    if not q.tau0 < s.U(N) / 2:
        raise ArtifactError("post-check tau0 < U(N0)/2 failed")
    if N > 1 and not s.U(N - 1) / sk < 2 * S:
        raise ArtifactError("post-check U(N0-1)/sigma0^{k+1} < 2S failed")
    return N


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhilipponCheck:
    cond1: bool
    cond2: bool
    cond3: bool
    cond4: str                 # "pass" or "not-certified"
    s_in_range: bool
    degree: int
    h1: mpf
    log_norm_ratio: mpf        # -inf when Q vanishes at x
    log_cond3_bound: mpf       # -S sigma0^{k+1}
    log_ball_radius: mpf       # -S sigma0^{k+2}
    log_certified_radius: mpf  # -inf when no certificate

    @property
    def all_pass(self) -> bool:
        return self.cond1 and self.cond2 and self.cond3 and self.cond4 == "pass"

    def to_dict(self) -> dict:
        def f(x):
            return mpmath.nstr(x, 25) if mpmath.isfinite(x) else str(x)
        return {"cond1": self.cond1, "cond2": self.cond2, "cond3": self.cond3, "cond4": self.cond4,
                "s_in_range": self.s_in_range, "degree": self.degree, "h1": f(self.h1),
                "log_norm_ratio": f(self.log_norm_ratio), "log_cond3_bound": f(self.log_cond3_bound),
                "log_ball_radius": f(self.log_ball_radius),
                "log_certified_radius": f(self.log_certified_radius)}


def check_philippon(Q: HomogeneousPolynomial, x: ProjectivePoint, q: CriterionQuadruple, S,
                    k: int, *, d=2) -> PhilipponCheck:
    """Conditions (1)-(4) for Q at x. Condition (4) is certified through the
    nonvanishing radius of the dehomogenized polynomial at the affine point
    (d plays the role of c_3); failing to certify is not a disproof."""
    if Q.is_zero():
        raise DomainError("Q must be nonzero")
    S = mpf(S)
    lo, hi = q.s_range(k)
    s_ok = bool(lo < S <= hi * (1 + rel_tol()))
    c1 = Q.degree <= q.delta0
    hq = bombieri_norm(Q).log()
    c2 = hq <= q.tau0
    na = norm_at(Q, x)
    ratio = -mpmath.inf if na.is_zero else na.log() - hq
    bound3 = -S * q.sigma0 ** (k + 1)
    c3 = bool(ratio <= bound3)
    need = -S * q.sigma0 ** (k + 2)
    cert_log = -mpmath.inf
    x0 = x.coords[0]
    if x0 != 0:
        omega = [c / x0 for c in x.coords[1:]]
        p = dehomogenize(Q)
        if not p.is_zero():
            # delta, tau default to max(1, deg) and max(1, h), the sharpest admissible
            cert = nonvanishing_radius(p, omega, d)
            if not cert.vanishes:
                cert_log = cert.radius.log()
    c4 = "pass" if cert_log >= need else "not-certified"
    return PhilipponCheck(c1, c2, c3, c4, s_ok, Q.degree, hq, ratio, bound3, need, cert_log)


def variety_condition_lhs(q: CriterionQuadruple, k: int, n: int, degV, hV) -> mpf:
    return ((k + 1) * (mpf(hV) * q.delta0 + mpf(degV) * ((k + 1) * q.tau0 + 3 * mpmath.log(n + 1) * q.delta0))
            * q.delta0 ** k * q.sigma0 ** (k + 1))


def check_variety_condition(q: CriterionQuadruple, k: int, n: int, degV, hV) -> bool:
    """(k+1)(hV delta0 + degV((k+1)tau0 + 3 log(n+1) delta0)) delta0^k sigma0^{k+1} < U0,
    evaluated with 64 extra bits."""
    if mpf(degV) < 0 or mpf(hV) < 0:
        raise DomainError("degV and hV must be non-negative")
    with mpmath.workprec(get_precision() + 64):
        return bool(variety_condition_lhs(q, k, n, degV, hV) < q.U0)
