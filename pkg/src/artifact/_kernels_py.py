"""NumPy versions of the compiled kernels, used when the extension is missing."""
from __future__ import annotations

import numpy as np


def horner_many(coeffs, z):
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    acc = np.zeros_like(z)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def horner_abs_many(abs_coeffs, r):
    abs_coeffs = np.asarray(abs_coeffs, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    acc = np.zeros_like(r)
    for c in abs_coeffs[::-1]:
        acc = acc * r + c
    return acc


def arg_increments(values):
    values = np.asarray(values, dtype=np.complex128)
    return np.angle(values[1:] * np.conj(values[:-1]))


def poly_eval_many(exps, coeffs, points):
    exps = np.asarray(exps, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    points = np.asarray(points, dtype=np.complex128)
    npts, nv = points.shape
    maxdeg = int(exps.max()) if exps.size else 0
    pw = np.ones((nv, maxdeg + 1, npts), dtype=np.complex128)
    for e in range(1, maxdeg + 1):
        pw[:, e, :] = pw[:, e - 1, :] * points.T
    out = np.zeros(npts, dtype=np.complex128)
    for t in range(exps.shape[0]):
        term = np.full(npts, coeffs[t])
        for v in range(nv):
            if exps[t, v]:
                term = term * pw[v, exps[t, v]]
        out += term
    return out
