"""Command-line entry point: ``artifact <command> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import mpmath
from mpmath import mpf

from . import kernels
from .config import DEFAULT_PRECISION, set_precision
from .errors import ArtifactError


def _num(x, digits=30):
    if x is None:
        return None
    if isinstance(x, (bool, int, str)):
        return x
    return mpmath.nstr(mpf(x), digits, strip_zeros=False)


def _poly(text: str, n: int):
    from .polycore import IntPolynomial
    path = Path(text)
    if path.exists():
        text = path.read_text()
    text = text.strip()
    if text.startswith("{"):
        return IntPolynomial.from_text(text)
    return _parse_infix(text, n)


def _parse_infix(text: str, n: int):
    """Polynomials like ``x1^2 - 3*x2 + 1`` with variables x1..xn."""
    import ast
    from .polycore import IntPolynomial

    tree = ast.parse(text.replace("^", "**"), mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.BinOp):
            a, b = ev(node.left), node.right
            if isinstance(node.op, ast.Add):
                return a + ev(b)
            if isinstance(node.op, ast.Sub):
                return a - ev(b)
            if isinstance(node.op, ast.Mult):
                return a * ev(b)
            if isinstance(node.op, ast.Pow) and isinstance(b, ast.Constant) and isinstance(b.value, int):
                return a ** b.value
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return IntPolynomial.constant(node.value, n)
        if isinstance(node, ast.Name) and node.id.startswith("x") and node.id[1:].isdigit():
            i = int(node.id[1:])
            if not 1 <= i <= n:
                raise ValueError(f"variable {node.id} outside x1..x{n}")
            return IntPolynomial.variable(i - 1, n)
        raise ValueError(f"cannot parse polynomial near {ast.dump(node)[:40]}")

    return ev(tree)


def _traj(spec: str):
    from .trajectory import load_curve, solve_trajectory
    return solve_trajectory(load_curve(spec))


def _emit(args, report: dict) -> None:
    text = json.dumps(report, sort_keys=True, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)


def _csv(args, name: str, header, rows) -> None:
    if not args.csv:
        return
    d = Path(args.csv)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / name, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------


def cmd_curve_check(args):
    t = _traj(args.curve)
    _emit(args, {"command": "curve check", "curve": t.config.name, "n": t.n, "M": t.M,
                 "log_tail_bound": _num(t.tail_bound.log_value, 20), "radius": _num(t.radius, 20),
                 "precision": args.precision})


def cmd_ord(args):
    from .trajectory import ord_gamma
    from .polycore import t_of
    t = _traj(args.curve)
    p = _poly(args.poly, t.n)
    est = ord_gamma(t, p)
    _emit(args, {"command": "ord", "curve": t.config.name, "poly": json.loads(p.to_text()),
                 "ord": _num(est.value), "error": _num(est.error, 10), "t": _num(t_of(p)[2], 20),
                 "argmax": [_num(est.argmax.real, 20), _num(est.argmax.imag, 20)]})
    _csv(args, "ord.csv", ["t", "ord"], [[_num(t_of(p)[2], 20), _num(est.value, 20)]])


def cmd_zeros(args):
    from .trajectory import compose_poly
    from .zerocount import count_zeros
    t = _traj(args.curve)
    p = _poly(args.poly, t.n)
    rep = count_zeros(compose_poly(t, p), mpf(args.radius) if args.radius else None)
    _emit(args, dict(rep.to_dict(), command="zeros", curve=t.config.name))


def cmd_siegel(args):
    from .smallpoly import NumericOnly, WitnessPoint, siegel_search
    from .trajectory import eval_gamma
    t = _traj(args.curve)
    data = json.loads(Path(args.witnesses).read_text())
    pts = []
    for z in data:
        zc = mpmath.mpc(mpf(z[0]), mpf(z[1])) if isinstance(z, list) else mpmath.mpc(mpf(z))
        pts.append(WitnessPoint(zc, eval_gamma(t, zc), NumericOnly(args.precision)))
    deg = args.N // 2
    if args.degree_cap is not None:
        deg = min(deg, args.degree_cap)
    p, rep = siegel_search(pts, deg, mpf(args.N) / 2)
    _emit(args, {"command": "siegel", "curve": t.config.name, "N": args.N,
                 "poly": json.loads(p.to_text()), "report": rep.to_dict(),
                 "witnesses": [w.to_dict() for w in pts]})


def _schedule(args):
    from .criterion import validate_schedule
    overrides = json.loads(args.overrides) if getattr(args, "overrides", None) else None
    return validate_schedule(args.n, args.k, overrides=overrides, horizon=args.horizon)


def cmd_criterion(args):
    from .criterion import check_assumptions, compute_i0, compute_N0
    s = _schedule(args)
    out = {"command": f"criterion {args.what}", "schedule": s.to_dict()}
    if args.what == "schedule":
        out["chain"] = {k: bool(v) for k, v in s.chain().items()}
    elif args.what == "sweep":
        rep = check_assumptions(s, (1, args.horizon))
        out["assumptions"] = rep.to_dict()
    elif args.what in ("i0", "N0"):
        q = compute_i0(s, mpf(args.T))
        out["quadruple"] = q.to_dict()
        if args.what == "N0":
            S = mpf(args.S) if args.S is not None else q.s_range(s.k)[1]
            out["S"] = _num(S, 20)
            out["N0"] = str(compute_N0(q, s, S))
    _emit(args, out)


def cmd_cover(args):
    from .criterion import validate_schedule
    from .pipeline import cover_gamma
    t = _traj(args.curve)
    s = validate_schedule(t.n, args.k)
    rep = cover_gamma(t, s, args.T, seed=args.seed)
    d = rep.to_dict()
    d["command"] = "cover"
    _emit(args, d)
    _csv(args, "disks.csv", ["re", "im", "log_radius"],
         [[c[0], c[1], r] for c, r in ((x["center"], x["log_radius"]) for x in d["cover"]["disks"])])


def cmd_census(args):
    from .pipeline import count_exp_curve, enumerate_log_curve_points, separation_check
    from .magnitude import BigMagnitude
    if args.family == "expcurve":
        res = count_exp_curve(args.T, args.n, args.R)
        _emit(args, dict(res.to_dict(), command="census expcurve", T=args.T, n=args.n, R=args.R))
        _csv(args, "census_expcurve.csv", ["T", "count"], [list(x) for x in res.sweep])
    else:
        pts = enumerate_log_curve_points(args.T, dim=args.dim)
        sep = separation_check(pts, BigMagnitude.exp(-args.T ** 2))
        _emit(args, {"command": "census logcurve", "T": args.T, "count": len(pts),
                     "separated": sep, "points": [w.to_dict() for w in pts]})


def build_parser() -> argparse.ArgumentParser:
    def flags(p, defaults: bool):
        d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
        p.add_argument("--precision", type=int, default=d(DEFAULT_PRECISION),
                       help="working precision in bits")
        p.add_argument("--seed", type=int, default=d(0))
        p.add_argument("--out", default=d(None), help="write the JSON report here")
        p.add_argument("--csv", default=d(None), help="directory for CSV emissions")

    ap = argparse.ArgumentParser(prog="artifact")
    flags(ap, True)
    common = argparse.ArgumentParser(add_help=False)
    flags(common, False)
    sub = ap.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name):
        return _add(name, parents=[common])
    sub.add_parser = add_parser

    c = sub.add_parser("curve")
    c.add_argument("action", choices=["check"])
    c.add_argument("curve")
    c.set_defaults(func=cmd_curve_check)

    for name, fn in (("ord", cmd_ord), ("zeros", cmd_zeros)):
        c = sub.add_parser(name)
        c.add_argument("curve")
        c.add_argument("poly", help="JSON polynomial, file, or infix like 'x1^2 - x2'")
        if name == "zeros":
            c.add_argument("--radius")
        c.set_defaults(func=fn)

    c = sub.add_parser("siegel")
    c.add_argument("curve")
    c.add_argument("witnesses", help="JSON list of parameters z (numbers or [re, im])")
    c.add_argument("--N", type=int, required=True)
    c.add_argument("--degree-cap", type=int)
    c.set_defaults(func=cmd_siegel)

    c = sub.add_parser("criterion")
    c.add_argument("what", choices=["schedule", "sweep", "i0", "N0"])
    c.add_argument("--n", type=int, default=5)
    c.add_argument("--k", type=int, default=1)
    c.add_argument("--T", default="1000")
    c.add_argument("--S")
    c.add_argument("--horizon", type=int, default=10 ** 4)
    c.add_argument("--overrides", help="JSON object of schedule constants")
    c.set_defaults(func=cmd_criterion)

    c = sub.add_parser("cover")
    c.add_argument("curve")
    c.add_argument("--T", type=int, required=True)
    c.add_argument("--k", type=int, default=1)
    c.set_defaults(func=cmd_cover)

    c = sub.add_parser("census")
    c.add_argument("family", choices=["expcurve", "logcurve"])
    c.add_argument("--T", type=int, required=True)
    c.add_argument("--n", type=int, default=3)
    c.add_argument("--R", default="10")
    c.add_argument("--dim", type=int, default=5)
    c.set_defaults(func=cmd_census)

    c = sub.add_parser("backend")
    c.set_defaults(func=lambda a: print(json.dumps({"backend": kernels.BACKEND})))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    set_precision(args.precision)
    try:
        args.func(args)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
