"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from artifact import kernels


def _cases(rng):
    deg = 400
    coeffs = rng.standard_normal(deg) + 1j * rng.standard_normal(deg)
    z = np.exp(2j * np.pi * rng.random(20000)) * 0.9
    r = np.abs(z)
    vals = np.exp(1j * np.cumsum(rng.normal(0, 0.3, 200000)))
    exps = rng.integers(0, 6, size=(60, 3)).astype(np.int64)
    pc = rng.standard_normal(60) + 0j
    pts = (rng.standard_normal((5000, 3)) + 1j * rng.standard_normal((5000, 3))) * 0.5
    return {
        "horner_many": (coeffs, z),
        "horner_abs_many": (np.abs(coeffs), r),
        "arg_increments": (vals,),
        "poly_eval_many": (exps, pc, pts),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    cases = _cases(np.random.default_rng(1))
    impls = kernels.backends()
    print(f"{'kernel':18s}" + "".join(f"{name:>14s}" for name in impls) + "   max |diff|")
    for name, argv in cases.items():
        times, outs = [], []
        for mod in impls.values():
            fn = getattr(mod, name)
            best = float("inf")
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                out = fn(*argv)
                best = min(best, time.perf_counter() - t0)
            times.append(best)
            outs.append(np.asarray(out))
        diff = max(float(np.max(np.abs(o - outs[0]))) for o in outs)
        print(f"{name:18s}" + "".join(f"{t * 1e3:12.2f}ms" for t in times) + f"   {diff:.2e}")


if __name__ == "__main__":
    main()
