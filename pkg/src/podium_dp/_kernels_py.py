"""Numpy reference kernels. Signatures mirror the compiled ``_kernels`` module.

All inputs are float64 arrays; ``u`` holds one row of pre-drawn uniforms on
[0, 1) per record. Range checks on ``xs`` happen in the callers.
"""
import numpy as np


def podium_sample(xs, u, lo, hi, w, d, e_eps):
    xs = np.asarray(xs, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    k = w * d * (e_eps - 1.0)
    t = (2.0 * xs - w * k) / (2.0 * k)
    t = np.clip(t, lo, hi - w)
    p1 = d * (t - lo)
    p12 = p1 + d * e_eps * w
    y, v = u[:, 0], u[:, 1]
    out = np.where(
        y < p1,
        lo + v * (t - lo),
        np.where(y < p12, t + v * w, (t + w) + v * (hi - (t + w))),
    )
    return out


def laplace_sample(xs, u, scale):
    xs = np.asarray(xs, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    sign = np.where(u[:, 0] < 0.5, -1.0, 1.0)
    return xs + sign * (-scale * np.log1p(-u[:, 1]))


def staircase_sample(xs, u, eps, delta, gamma):
    xs = np.asarray(xs, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    q = np.exp(-eps)
    p_low = gamma / (gamma + q * (1.0 - gamma))
    sign = np.where(u[:, 0] < 0.5, -1.0, 1.0)
    g = np.floor(np.log1p(-u[:, 1]) / -eps)
    inner = np.where(
        u[:, 2] < p_low,
        u[:, 3] * gamma * delta,
        gamma * delta + u[:, 3] * (1.0 - gamma) * delta,
    )
    return xs + sign * (g * delta + inner)


def pair_log_ratio_scan(logf, eps, tol):
    """Scan all unordered input pairs of a (n_inputs, n_outputs) log-density grid.

    Returns ``(max_abs, n_exceed, n_unclassified, seen_off, seen_zero)``. A log
    ratio is classified when it lies within ``tol`` of 0 or of +-eps;
    ``seen_off`` flags that some pair hit +-eps, ``seen_zero`` that some hit 0.
    """
    logf = np.ascontiguousarray(logf, dtype=np.float64)
    n = logf.shape[0]
    max_abs = 0.0
    n_exceed = n_uncl = 0
    seen_off = seen_zero = False
    for i in range(n - 1):
        ad = np.abs(logf[i + 1:] - logf[i])
        max_abs = max(max_abs, float(ad.max()))
        n_exceed += int(np.count_nonzero(ad > eps + tol))
        near_zero = ad <= tol
        near_off = np.abs(ad - eps) <= tol
        n_uncl += int(np.count_nonzero(~(near_zero | near_off)))
        seen_off = seen_off or bool(near_off.any())
        seen_zero = seen_zero or bool(near_zero.any())
    return max_abs, n_exceed, n_uncl, seen_off, seen_zero
