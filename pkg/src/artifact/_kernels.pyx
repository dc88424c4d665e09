# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: complex Horner, argument increments, batch polynomial evaluation."""
import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, fabs, M_PI

cnp.import_array()


def horner_many(const double complex[::1] coeffs, const double complex[::1] z):
    cdef Py_ssize_t m = coeffs.shape[0], npts = z.shape[0], i, k
    out = np.empty(npts, dtype=np.complex128)
    cdef double complex[::1] o = out
    # points in the inner loop: one serial Horner chain per point is latency bound
    cdef double[::1] zr = np.ascontiguousarray(np.real(z))
    cdef double[::1] zi = np.ascontiguousarray(np.imag(z))
    cdef double[::1] ar = np.zeros(npts)
    cdef double[::1] ai = np.zeros(npts)
    cdef double cr, ci, t
    for k in range(m - 1, -1, -1):
        cr = coeffs[k].real
        ci = coeffs[k].imag
        for i in range(npts):
            t = ar[i] * zr[i] - ai[i] * zi[i] + cr
            ai[i] = ar[i] * zi[i] + ai[i] * zr[i] + ci
            ar[i] = t
    for i in range(npts):
        o[i] = ar[i] + 1j * ai[i]
    return out


def horner_abs_many(const double[::1] abs_coeffs, const double[::1] r):
    """Sum |c_k| r^k, the rounding scale of horner_many."""
    cdef Py_ssize_t m = abs_coeffs.shape[0], npts = r.shape[0], i, k
    out = np.zeros(npts, dtype=np.float64)
    cdef double[::1] o = out
    cdef double c
    for k in range(m - 1, -1, -1):
        c = abs_coeffs[k]
        for i in range(npts):
            o[i] = o[i] * r[i] + c
    return out


def arg_increments(const double complex[::1] values):
    """Wrapped arguments of values[j+1]/values[j], each in (-pi, pi]."""
    cdef Py_ssize_t n = values.shape[0], j
    out = np.empty(max(n - 1, 0), dtype=np.float64)
    cdef double[::1] o = out
    cdef double complex q
    cdef double a, b
    for j in range(n - 1):
        # a * conj(b) has the same argument as a / b without the division
        a = values[j + 1].real * values[j].real + values[j + 1].imag * values[j].imag
        b = values[j + 1].imag * values[j].real - values[j + 1].real * values[j].imag
        o[j] = atan2(b, a)
    return out


def poly_eval_many(const long long[:, ::1] exps, const double complex[::1] coeffs,
                   const double complex[:, ::1] points):
    cdef Py_ssize_t nterms = exps.shape[0], nv = exps.shape[1], npts = points.shape[0]
    cdef Py_ssize_t i, t, v, e, maxdeg = 0
    for t in range(nterms):
        for v in range(nv):
            if exps[t, v] > maxdeg:
                maxdeg = exps[t, v]
    out = np.empty(npts, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double[:, :, ::1] pr = np.empty((nv, maxdeg + 1, npts))
    cdef double[:, :, ::1] pi = np.empty((nv, maxdeg + 1, npts))
    cdef double[::1] accr = np.zeros(npts)
    cdef double[::1] acci = np.zeros(npts)
    cdef double[::1] tr = np.empty(npts)
    cdef double[::1] ti = np.empty(npts)
    cdef double xr, xi, u
    cdef long long ex
    for v in range(nv):
        for i in range(npts):
            xr = points[i, v].real
            xi = points[i, v].imag
            pr[v, 0, i] = 1.0
            pi[v, 0, i] = 0.0
            for e in range(1, maxdeg + 1):
                pr[v, e, i] = pr[v, e - 1, i] * xr - pi[v, e - 1, i] * xi
                pi[v, e, i] = pr[v, e - 1, i] * xi + pi[v, e - 1, i] * xr
    for t in range(nterms):
        for i in range(npts):
            tr[i] = coeffs[t].real
            ti[i] = coeffs[t].imag
        for v in range(nv):
            ex = exps[t, v]
            if ex == 0:
                continue
            for i in range(npts):
                u = tr[i] * pr[v, ex, i] - ti[i] * pi[v, ex, i]
                ti[i] = tr[i] * pi[v, ex, i] + ti[i] * pr[v, ex, i]
                tr[i] = u
        for i in range(npts):
            accr[i] += tr[i]
            acci[i] += ti[i]
    for i in range(npts):
        o[i] = accr[i] + 1j * acci[i]
    return out
