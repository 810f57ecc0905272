"""Inverse binomial CDF with real-valued trial counts.

Expected counts in this model are real numbers, so the quantile is defined
through the regularized incomplete beta form of the binomial CDF,
``P(X <= k) = I_{1-p}(n - k, k + 1)``, which extends smoothly to non-integer
``n``.  For integer ``n`` the result matches ``scipy.stats.binom.ppf``.
"""
from __future__ import annotations

import numpy as np
from scipy.special import bdtrik, betainc


def binom_cdf(k, n, p):
    """Binomial CDF P(X <= k) for real-valued n >= 0, elementwise."""
    k = np.asarray(k, dtype=float)
    n = np.asarray(n, dtype=float)
    p = np.asarray(p, dtype=float)
    below = k < 0.0
    above = k >= n
    a = np.maximum(n - k, 1e-300)
    b = np.maximum(k + 1.0, 1e-300)
    x = np.clip(1.0 - p, 0.0, 1.0)
    with np.errstate(all="ignore"):
        core = betainc(a, b, x)
    out = np.where(below, 0.0, np.where(above, 1.0, core))
    if out.ndim == 0:
        return float(out)
    return out


def binom_ppf(q, n, p):
    """Smallest integer k with P(X <= k) >= q, elementwise.

    Values are clipped to [0, n]; points where the underlying inversion is
    undefined fall back to 0, which in the leakage estimate is the
    conservative direction.
    """
    q = np.asarray(q, dtype=float)
    n = np.asarray(n, dtype=float)
    p = np.asarray(p, dtype=float)
    with np.errstate(all="ignore"):
        k = np.ceil(bdtrik(q, n, p))
    k = np.where(np.isfinite(k), k, 0.0)
    k = np.clip(k, 0.0, n)
    # bdtrik inverts the CDF continuously; step back where the previous
    # integer already satisfies the quantile condition
    k_prev = k - 1.0
    ok_prev = (k >= 1.0) & (binom_cdf(k_prev, n, p) >= q)
    out = np.where(ok_prev, k_prev, k)
    if out.ndim == 0:
        return float(out)
    return out
