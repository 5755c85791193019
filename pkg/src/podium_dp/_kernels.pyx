# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; semantics match ``_kernels_py`` record for record."""
import numpy as np

from libc.math cimport exp, fabs, floor, fmax, log1p


def podium_sample(xs, u, double lo, double hi, double w, double d, double e_eps):
    cdef const double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[:, ::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double k = w * d * (e_eps - 1.0)
    cdef double t, p1, p12, y, v, r
    with nogil:
        for i in range(n):
            t = (2.0 * xv[i] - w * k) / (2.0 * k)
            if t < lo:
                t = lo
            elif t > hi - w:
                t = hi - w
            p1 = d * (t - lo)
            p12 = p1 + d * e_eps * w
            y = uv[i, 0]
            v = uv[i, 1]
            if y < p1:
                ov[i] = lo + v * (t - lo)
            elif y < p12:
                ov[i] = t + v * w
            else:
                r = t + w
                ov[i] = r + v * (hi - r)
    return out


def laplace_sample(xs, u, double scale):
    cdef const double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[:, ::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double sign
    with nogil:
        for i in range(n):
            # branch-free sign: random signs defeat the branch predictor
            sign = 2.0 * (uv[i, 0] >= 0.5) - 1.0
            ov[i] = xv[i] + sign * (-scale * log1p(-uv[i, 1]))
    return out


def staircase_sample(xs, u, double eps, double delta, double gamma):
    cdef const double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[:, ::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double q = exp(-eps)
    cdef double p_low = gamma / (gamma + q * (1.0 - gamma))
    cdef double g, inner, z
    with nogil:
        for i in range(n):
            g = floor(log1p(-uv[i, 1]) / -eps)
            if uv[i, 2] < p_low:
                inner = uv[i, 3] * gamma * delta
            else:
                inner = gamma * delta + uv[i, 3] * (1.0 - gamma) * delta
            z = g * delta + inner
            if uv[i, 0] < 0.5:
                ov[i] = xv[i] - z
            else:
                ov[i] = xv[i] + z
    return out


def pair_log_ratio_scan(logf, double eps, double tol):
    cdef const double[:, ::1] lv = np.ascontiguousarray(logf, dtype=np.float64)
    cdef Py_ssize_t n = lv.shape[0], m = lv.shape[1], i, j, k
    cdef double ad, max_abs = 0.0, limit = eps + tol
    cdef long long n_exceed = 0, n_uncl = 0
    cdef int any_off = 0, any_zero = 0, is_off, is_zero
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                # branch-free body so the compiler can vectorise it
                for k in range(m):
                    ad = fabs(lv[j, k] - lv[i, k])
                    max_abs = fmax(max_abs, ad)
                    n_exceed += ad > limit
                    is_zero = ad <= tol
                    is_off = fabs(ad - eps) <= tol
                    n_uncl += 1 - (is_zero | is_off)
                    any_zero |= is_zero
                    any_off |= is_off
    return max_abs, n_exceed, n_uncl, bool(any_off), bool(any_zero)
