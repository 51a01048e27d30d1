"""Pure-numpy implementations of the numeric hot kernels.

Mirrors ``tlstune._kernels._compiled`` step for step (same initialization,
same damping schedule, same linear solves), so both backends follow the same
iteration path and agree up to floating-point summation order.
"""

import math

import numpy as np

from tlstune.constants import ANGULAR_PER_GHZ_DETUNING

TAU_MIN = 1e-3  # us; lower clamp for the decay-time parameter
_MAX_ITER = 200
_MAX_RETRY = 40


def lorentzian_rate(qubit_freqs_ghz, tls_freqs_ghz, couplings_mhz, linewidths_mhz,
                    background_per_us):
    """Total relaxation rate (1/us) at each probe frequency.

    Each defect contributes 2*g^2*G2 / (G2^2 + (2*pi*1e3*delta)^2) with
    delta = f_probe - f_tls in GHz; g and G2 in MHz are numerically rates in
    1/us, while the detuning enters as an angular frequency in rad/us.
    """
    f = np.atleast_1d(np.asarray(qubit_freqs_ghz, dtype=np.float64))
    tls = np.atleast_1d(np.asarray(tls_freqs_ghz, dtype=np.float64))
    g = np.atleast_1d(np.asarray(couplings_mhz, dtype=np.float64))
    g2 = np.atleast_1d(np.asarray(linewidths_mhz, dtype=np.float64))
    out = np.full(f.shape, float(background_per_us))
    if tls.size == 0:
        return out
    delta = ANGULAR_PER_GHZ_DETUNING * (f[:, None] - tls[None, :])
    excess = 2.0 * g * g * g2 / (g2 * g2 + delta * delta)
    out += excess.sum(axis=1)
    return out


def _solve3(m00, m01, m02, m11, m12, m22, r0, r1, r2):
    # Cramer solve of a symmetric 3x3 system; None when singular.
    det = (m00 * (m11 * m22 - m12 * m12)
           - m01 * (m01 * m22 - m12 * m02)
           + m02 * (m01 * m12 - m11 * m02))
    if det == 0.0 or not math.isfinite(det):
        return None
    d0 = (r0 * (m11 * m22 - m12 * m12)
          - m01 * (r1 * m22 - m12 * r2)
          + m02 * (r1 * m12 - m11 * r2)) / det
    d1 = (m00 * (r1 * m22 - r2 * m12)
          - r0 * (m01 * m22 - m12 * m02)
          + m02 * (m01 * r2 - r1 * m02)) / det
    d2 = (m00 * (m11 * r2 - r1 * m12)
          - m01 * (m01 * r2 - r1 * m02)
          + r0 * (m01 * m12 - m11 * m02)) / det
    return d0, d1, d2


def _solve2(m00, m01, m11, r0, r1):
    det = m00 * m11 - m01 * m01
    if det == 0.0 or not math.isfinite(det):
        return None
    return (r0 * m11 - m01 * r1) / det, (m00 * r1 - r0 * m01) / det


def _initial_guess(t, y, fit_offset, k_lo, k_hi):
    # Log-linear regression on baseline-subtracted data; baseline = min(y).
    b0 = float(np.min(y)) if fit_offset else 0.0
    z = y - b0
    zmax = float(np.max(z))
    if zmax <= 0.0:
        return 0.0, k_lo, b0
    sel = z > 1e-3 * zmax
    m = int(np.count_nonzero(sel))
    if m >= 2:
        x = t[sel]
        w = np.log(z[sel])
        sx = float(np.sum(x))
        sw = float(np.sum(w))
        sxx = float(np.sum(x * x))
        sxw = float(np.sum(x * w))
        denom = m * sxx - sx * sx
        if denom > 0.0:
            c1 = (m * sxw - sx * sw) / denom
            c0 = (sw - c1 * sx) / m
            if c1 < 0.0:
                k0 = min(max(-c1, k_lo), k_hi)
                return math.exp(c0), k0, b0
    span = float(t[-1] - t[0])
    k0 = 2.0 / span if span > 0.0 else 1.0
    return zmax, min(max(k0, k_lo), k_hi), b0


def fit_exp_decay(t, y, fit_offset=True, tau_max=1e4):
    """Fit a*exp(-t/tau) + b by damped (Levenberg) least squares.

    With ``fit_offset=False`` the offset is frozen at zero and only (a, tau)
    vary. tau is clamped to [TAU_MIN, tau_max].

    Returns ``(a, tau, b, tau_stderr, converged)``.
    """
    t = np.ascontiguousarray(t, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = t.size
    npar = 3 if fit_offset else 2
    if n < npar:
        return 0.0, 0.0, 0.0, 0.0, False
    k_lo = 1.0 / tau_max
    k_hi = 1.0 / TAU_MIN
    a, k, b = _initial_guess(t, y, fit_offset, k_lo, k_hi)

    def ssr_at(aa, kk, bb):
        r = aa * np.exp(-kk * t) + bb - y
        return float(np.dot(r, r))

    ssr = ssr_at(a, k, b)
    lam = 1e-3
    converged = False
    for it in range(_MAX_ITER):
        e = np.exp(-k * t)
        r = a * e + b - y
        jk = -a * t * e
        h_aa = float(np.dot(e, e))
        h_ak = float(np.dot(e, jk))
        h_kk = float(np.dot(jk, jk))
        g_a = float(np.dot(e, r))
        g_k = float(np.dot(jk, r))
        if fit_offset:
            h_ab = float(np.sum(e))
            h_kb = float(np.sum(jk))
            h_bb = float(n)
            g_b = float(np.sum(r))
        success = False
        rel = 0.0
        for _ in range(_MAX_RETRY):
            d_aa = h_aa * (1.0 + lam)
            d_kk = h_kk * (1.0 + lam)
            if fit_offset:
                step = _solve3(d_aa, h_ak, h_ab, d_kk, h_kb, h_bb * (1.0 + lam),
                               -g_a, -g_k, -g_b)
            else:
                step = _solve2(d_aa, h_ak, d_kk, -g_a, -g_k)
                if step is not None:
                    step = (step[0], step[1], 0.0)
            if step is None:
                lam = min(lam * 10.0, 1e12)
                continue
            da, dk, db = step
            a1 = a + da
            k1 = min(max(k + dk, k_lo), k_hi)
            b1 = b + db
            ssr1 = ssr_at(a1, k1, b1)
            if math.isfinite(ssr1) and ssr1 <= ssr:
                rel = (ssr - ssr1) / ssr if ssr > 0.0 else 0.0
                a, k, b = a1, k1, b1
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

    tau = 1.0 / k
    tau_stderr = math.inf
    if n > npar:
        e = np.exp(-k * t)
        jk = -a * t * e
        h_aa = float(np.dot(e, e))
        h_ak = float(np.dot(e, jk))
        h_kk = float(np.dot(jk, jk))
        sigma2 = ssr / (n - npar)
        if fit_offset:
            h_ab = float(np.sum(e))
            h_kb = float(np.sum(jk))
            h_bb = float(n)
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
                tau_stderr = math.sqrt(var_k) / (k * k)
    return a, tau, b, tau_stderr, converged
