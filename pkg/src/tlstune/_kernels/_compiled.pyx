# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the numeric hot kernels.

Same algorithms as _pure.py (same initialization, damping schedule, and
linear solves); differences are limited to float summation order.
"""

import math

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, isfinite, log, sqrt

cnp.import_array()

from tlstune.constants import ANGULAR_PER_GHZ_DETUNING

TAU_MIN = 1e-3  # us; lower clamp for the decay-time parameter

cdef double _ANG = ANGULAR_PER_GHZ_DETUNING
cdef int _MAX_ITER = 200
cdef int _MAX_RETRY = 40


def lorentzian_rate(qubit_freqs_ghz, tls_freqs_ghz, couplings_mhz,
                    linewidths_mhz, background_per_us):
    """Total relaxation rate (1/us) at each probe frequency.

    See _pure.lorentzian_rate for the formula and unit conventions.
    """
    f_arr = np.ascontiguousarray(np.atleast_1d(np.asarray(qubit_freqs_ghz)),
                                 dtype=np.float64)
    t_arr = np.ascontiguousarray(np.atleast_1d(np.asarray(tls_freqs_ghz)),
                                 dtype=np.float64)
    g_arr = np.ascontiguousarray(np.atleast_1d(np.asarray(couplings_mhz)),
                                 dtype=np.float64)
    w_arr = np.ascontiguousarray(np.atleast_1d(np.asarray(linewidths_mhz)),
                                 dtype=np.float64)
    out = np.full(f_arr.shape, float(background_per_us))
    if t_arr.size == 0:
        return out
    cdef double[::1] f = f_arr
    cdef double[::1] t = t_arr
    cdef double[::1] g = g_arr
    cdef double[::1] w = w_arr
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double d, acc
    for i in range(f.shape[0]):
        acc = 0.0
        for j in range(t.shape[0]):
            d = _ANG * (f[i] - t[j])
            acc = acc + 2.0 * g[j] * g[j] * w[j] / (w[j] * w[j] + d * d)
        o[i] = o[i] + acc
    return out


cdef int _solve3(double m00, double m01, double m02, double m11, double m12,
                 double m22, double r0, double r1, double r2,
                 double *d0, double *d1, double *d2):
    cdef double det = (m00 * (m11 * m22 - m12 * m12)
                       - m01 * (m01 * m22 - m12 * m02)
                       + m02 * (m01 * m12 - m11 * m02))
    if det == 0.0 or not isfinite(det):
        return 0
    d0[0] = (r0 * (m11 * m22 - m12 * m12)
             - m01 * (r1 * m22 - m12 * r2)
             + m02 * (r1 * m12 - m11 * r2)) / det
    d1[0] = (m00 * (r1 * m22 - r2 * m12)
             - r0 * (m01 * m22 - m12 * m02)
             + m02 * (m01 * r2 - r1 * m02)) / det
    d2[0] = (m00 * (m11 * r2 - r1 * m12)
             - m01 * (m01 * r2 - r1 * m02)
             + r0 * (m01 * m12 - m11 * m02)) / det
    return 1


cdef int _solve2(double m00, double m01, double m11, double r0, double r1,
                 double *d0, double *d1):
    cdef double det = m00 * m11 - m01 * m01
    if det == 0.0 or not isfinite(det):
        return 0
    d0[0] = (r0 * m11 - m01 * r1) / det
    d1[0] = (m00 * r1 - r0 * m01) / det
    return 1


cdef double _ssr_at(double[::1] t, double[::1] y, double a, double k,
                    double b):
    cdef Py_ssize_t i
    cdef double r, acc = 0.0
    for i in range(t.shape[0]):
        r = a * exp(-k * t[i]) + b - y[i]
        acc += r * r
    return acc


def fit_exp_decay(t, y, fit_offset=True, tau_max=1e4):
    """Fit a*exp(-t/tau) + b by damped (Levenberg) least squares.

    Same contract as _pure.fit_exp_decay: returns
    (a, tau, b, tau_stderr, converged).
    """
    t_arr = np.ascontiguousarray(t, dtype=np.float64)
    y_arr = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = t_arr.size
    cdef bint offset = bool(fit_offset)
    cdef int npar = 3 if offset else 2
    if n < npar:
        return 0.0, 0.0, 0.0, 0.0, False
    cdef double[::1] tv = t_arr
    cdef double[::1] yv = y_arr
    cdef double k_lo = 1.0 / tau_max
    cdef double k_hi = 1.0 / TAU_MIN

    # Initial guess: log-linear regression on baseline-subtracted data.
    cdef double b0 = 0.0, zmax = 0.0, z, thr
    cdef Py_ssize_t i, m
    cdef double sx, sw, sxx, sxw, denom, c0, c1
    cdef double a0, k0, span
    if offset:
        b0 = yv[0]
        for i in range(1, n):
            if yv[i] < b0:
                b0 = yv[i]
    for i in range(n):
        z = yv[i] - b0
        if z > zmax:
            zmax = z
    cdef double a = 0.0, k = k_lo, b = b0
    if zmax > 0.0:
        thr = 1e-3 * zmax
        m = 0
        sx = sw = sxx = sxw = 0.0
        for i in range(n):
            z = yv[i] - b0
            if z > thr:
                m += 1
                sx += tv[i]
                sw += log(z)
                sxx += tv[i] * tv[i]
                sxw += tv[i] * log(z)
        k0 = 0.0
        a0 = -1.0
        if m >= 2:
            denom = m * sxx - sx * sx
            if denom > 0.0:
                c1 = (m * sxw - sx * sw) / denom
                c0 = (sw - c1 * sx) / m
                if c1 < 0.0:
                    k0 = -c1
                    a0 = exp(c0)
        if a0 < 0.0:
            span = tv[n - 1] - tv[0]
            k0 = 2.0 / span if span > 0.0 else 1.0
            a0 = zmax
        if k0 < k_lo:
            k0 = k_lo
        if k0 > k_hi:
            k0 = k_hi
        a = a0
        k = k0

    cdef double ssr = _ssr_at(tv, yv, a, k, b)
    cdef double lam = 1e-3
    cdef bint converged = False
    cdef bint success
    cdef int it, retry
    cdef double e, jk, r
    cdef double h_aa, h_ak, h_kk, h_ab, h_kb, h_bb, g_a, g_k, g_b
    cdef double da, dk, db, a1, k1, b1, ssr1, rel
    for it in range(_MAX_ITER):
        h_aa = h_ak = h_kk = h_ab = h_kb = 0.0
        g_a = g_k = g_b = 0.0
        for i in range(n):
            e = exp(-k * tv[i])
            jk = -a * tv[i] * e
            r = a * e + b - yv[i]
            h_aa += e * e
            h_ak += e * jk
            h_kk += jk * jk
            g_a += e * r
            g_k += jk * r
            if offset:
                h_ab += e
                h_kb += jk
                g_b += r
        h_bb = <double>n
        success = False
        rel = 0.0
        for retry in range(_MAX_RETRY):
            if offset:
                if not _solve3(h_aa * (1.0 + lam), h_ak, h_ab,
                               h_kk * (1.0 + lam), h_kb, h_bb * (1.0 + lam),
                               -g_a, -g_k, -g_b, &da, &dk, &db):
                    lam = min(lam * 10.0, 1e12)
                    continue
            else:
                if not _solve2(h_aa * (1.0 + lam), h_ak, h_kk * (1.0 + lam),
                               -g_a, -g_k, &da, &dk):
                    lam = min(lam * 10.0, 1e12)
                    continue
                db = 0.0
            a1 = a + da
            k1 = k + dk
            if k1 < k_lo:
                k1 = k_lo
            if k1 > k_hi:
                k1 = k_hi
            b1 = b + db
            ssr1 = _ssr_at(tv, yv, a1, k1, b1)
            if isfinite(ssr1) and ssr1 <= ssr:
                rel = (ssr - ssr1) / ssr if ssr > 0.0 else 0.0
                a = a1
                k = k1
                b = b1
                ssr = ssr1
                lam = max(lam * 0.3, 1e-12)
                success = True
                break
            lam = min(lam * 10.0, 1e12)
        if not success:
            converged = it > 0
            break
        if rel <= 1e-12:
            converged = True
            break

    cdef double tau = 1.0 / k
    cdef double tau_stderr = math.inf
    cdef double sigma2, det, minor_kk, var_k
    if n > npar:
        h_aa = h_ak = h_kk = h_ab = h_kb = 0.0
        for i in range(n):
            e = exp(-k * tv[i])
            jk = -a * tv[i] * e
            h_aa += e * e
            h_ak += e * jk
            h_kk += jk * jk
            if offset:
                h_ab += e
                h_kb += jk
        h_bb = <double>n
        sigma2 = ssr / (n - npar)
        if offset:
            det = (h_aa * (h_kk * h_bb - h_kb * h_kb)
                   - h_ak * (h_ak * h_bb - h_kb * h_ab)
                   + h_ab * (h_ak * h_kb - h_kk * h_ab))
            minor_kk = h_aa * h_bb - h_ab * h_ab
        else:
            det = h_aa * h_kk - h_ak * h_ak
            minor_kk = h_aa
        if det > 0.0 and minor_kk > 0.0:
            var_k = sigma2 * minor_kk / det
            if var_k >= 0.0:
                tau_stderr = sqrt(var_k) / (k * k)
    return float(a), float(tau), float(b), float(tau_stderr), bool(converged)
