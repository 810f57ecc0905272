"""Scalar numeric kernels for the decoy-state finite-key chain.

Everything here is straight-line float64 math so the functions behave the
same whether or not numba compiles them (see :mod:`fsqkd._accel`).  The
kernels are generalized to per-signal-state pulse intensities: each basis
uses the mean of its two signal states' detection/error statistics, while
the decoy estimation step uses the (possibly different) intensity pair
assumed by the receiver.  With all intensities equal this reduces exactly
to the plain three-intensity protocol chain.

Reason codes returned by ``bounds_ell_core``:
    0  positive key
    1  no detections
    2  vacuum+single-photon estimate degenerate (s_1 = 0 in either basis)
    3  key expression non-positive
"""
from __future__ import annotations

import math

from ._accel import njit

LN2 = 0.6931471805599453

REASON_OK = 0.0
REASON_ZERO_COUNTS = 1.0
REASON_NO_SINGLE_PHOTON = 2.0
REASON_NEGATIVE_KEY = 3.0


@njit
def db_to_transmittance(eta_loss_db):
    """Linear system transmittance from total loss in dB."""
    return 10.0 ** (-eta_loss_db / 10.0)


@njit
def detection_prob(k, p_d, p_ec, p_ap):
    """Per-pulse detection probability for mean photon number k."""
    return (1.0 + p_ap) * (1.0 - (1.0 - 2.0 * p_ec) * math.exp(-p_d * k))


@njit
def error_prob(k, p_d, p_ec, p_ap, qber_i):
    """Per-pulse error probability for mean photon number k."""
    d_k = detection_prob(k, p_d, p_ec, p_ap)
    return p_ec + 0.5 * p_ap * d_k + qber_i * (1.0 - math.exp(-p_d * k))


@njit
def binary_entropy(x):
    """Binary entropy in bits, with h(0) = h(1) = 0 by continuity."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -(x * math.log(x) + (1.0 - x) * math.log(1.0 - x)) / LN2


@njit
def chernoff_delta_plus(y, beta):
    """Upper-tail concentration correction for an expected count y."""
    return beta + math.sqrt(2.0 * beta * y + beta * beta)


@njit
def chernoff_delta_minus(y, beta):
    """Lower-tail concentration correction for an expected count y."""
    return 0.5 * beta + math.sqrt(2.0 * beta * y + 0.25 * beta * beta)


@njit
def poisson_tau(n, mu1, mu2, mu3, p1, p2, p3):
    """Probability that a transmitted pulse contains n photons (n in {0, 1})."""
    if n == 0:
        return p1 * math.exp(-mu1) + p2 * math.exp(-mu2) + p3 * math.exp(-mu3)
    return (p1 * math.exp(-mu1) * mu1
            + p2 * math.exp(-mu2) * mu2
            + p3 * math.exp(-mu3) * mu3)


@njit
def fluct_gamma(a, b, c, d):
    """Statistical-fluctuation term added to the single-photon error ratio."""
    if b <= 0.0 or b >= 1.0 or c <= 0.0 or d <= 0.0:
        return 0.0
    t1 = (c + d) * (1.0 - b) * b / (c * d * LN2)
    arg = ((c + d) / (c * d * (1.0 - b) * b)) * (21.0 / a) ** 2
    if arg <= 1.0:
        return 0.0
    v = t1 * math.log(arg) / LN2
    if v <= 0.0:
        return 0.0
    return math.sqrt(v)


@njit
def counts_core(pax, pbx,
                mu1_h, mu2_h, mu1_v, mu2_v,
                mu1_d, mu2_d, mu1_a, mu2_a,
                mu3, p1, p2, p3,
                p_d, p_ec, qber_i, p_ap, n_pulses):
    """Expected sifted detection and error counts per basis and intensity.

    Returns (n_x1, n_x2, n_x3, n_z1, n_z2, n_z3,
             m_x1, m_x2, m_x3, m_z1, m_z2, m_z3).
    """
    # per-basis detection / error statistics, averaged over the two signal
    # states of that basis (bit values are chosen uniformly)
    dx1 = 0.5 * (detection_prob(mu1_h, p_d, p_ec, p_ap) + detection_prob(mu1_v, p_d, p_ec, p_ap))
    dx2 = 0.5 * (detection_prob(mu2_h, p_d, p_ec, p_ap) + detection_prob(mu2_v, p_d, p_ec, p_ap))
    dz1 = 0.5 * (detection_prob(mu1_d, p_d, p_ec, p_ap) + detection_prob(mu1_a, p_d, p_ec, p_ap))
    dz2 = 0.5 * (detection_prob(mu2_d, p_d, p_ec, p_ap) + detection_prob(mu2_a, p_d, p_ec, p_ap))
    d3 = detection_prob(mu3, p_d, p_ec, p_ap)

    ex1 = 0.5 * (error_prob(mu1_h, p_d, p_ec, p_ap, qber_i) + error_prob(mu1_v, p_d, p_ec, p_ap, qber_i))
    ex2 = 0.5 * (error_prob(mu2_h, p_d, p_ec, p_ap, qber_i) + error_prob(mu2_v, p_d, p_ec, p_ap, qber_i))
    ez1 = 0.5 * (error_prob(mu1_d, p_d, p_ec, p_ap, qber_i) + error_prob(mu1_a, p_d, p_ec, p_ap, qber_i))
    ez2 = 0.5 * (error_prob(mu2_d, p_d, p_ec, p_ap, qber_i) + error_prob(mu2_a, p_d, p_ec, p_ap, qber_i))
    e3 = error_prob(mu3, p_d, p_ec, p_ap, qber_i)

    sift_x = pax * pbx * n_pulses
    sift_z = (1.0 - pax) * (1.0 - pbx) * n_pulses

    n_x1 = sift_x * p1 * dx1
    n_x2 = sift_x * p2 * dx2
    n_x3 = sift_x * p3 * d3
    n_z1 = sift_z * p1 * dz1
    n_z2 = sift_z * p2 * dz2
    n_z3 = sift_z * p3 * d3

    sum_pd_x = p1 * dx1 + p2 * dx2 + p3 * d3
    sum_pe_x = p1 * ex1 + p2 * ex2 + p3 * e3
    sum_pd_z = p1 * dz1 + p2 * dz2 + p3 * d3
    sum_pe_z = p1 * ez1 + p2 * ez2 + p3 * e3

    if sum_pd_x > 0.0:
        m_x_tot = (n_x1 + n_x2 + n_x3) * sum_pe_x / sum_pd_x
        m_x1 = m_x_tot * p1 * dx1 / sum_pd_x
        m_x2 = m_x_tot * p2 * dx2 / sum_pd_x
        m_x3 = m_x_tot * p3 * d3 / sum_pd_x
    else:
        m_x1 = 0.0
        m_x2 = 0.0
        m_x3 = 0.0
    if sum_pd_z > 0.0:
        m_z_tot = (n_z1 + n_z2 + n_z3) * sum_pe_z / sum_pd_z
        m_z1 = m_z_tot * p1 * dz1 / sum_pd_z
        m_z2 = m_z_tot * p2 * dz2 / sum_pd_z
        m_z3 = m_z_tot * p3 * d3 / sum_pd_z
    else:
        m_z1 = 0.0
        m_z2 = 0.0
        m_z3 = 0.0

    return (n_x1, n_x2, n_x3, n_z1, n_z2, n_z3,
            m_x1, m_x2, m_x3, m_z1, m_z2, m_z3)


@njit
def scaled_bounds_core(c1, c2, c3, mu1, mu2, mu3, p1, p2, p3, beta):
    """Concentration-corrected, intensity-rescaled counts.

    Returns (lo1, lo2, lo3, hi1, hi2, hi3); lower values floored at zero.
    """
    s1 = math.exp(mu1) / p1
    s2 = math.exp(mu2) / p2
    s3 = math.exp(mu3) / p3
    lo1 = s1 * (c1 - chernoff_delta_minus(c1, beta))
    lo2 = s2 * (c2 - chernoff_delta_minus(c2, beta))
    lo3 = s3 * (c3 - chernoff_delta_minus(c3, beta))
    hi1 = s1 * (c1 + chernoff_delta_plus(c1, beta))
    hi2 = s2 * (c2 + chernoff_delta_plus(c2, beta))
    hi3 = s3 * (c3 + chernoff_delta_plus(c3, beta))
    if lo1 < 0.0:
        lo1 = 0.0
    if lo2 < 0.0:
        lo2 = 0.0
    if lo3 < 0.0:
        lo3 = 0.0
    return lo1, lo2, lo3, hi1, hi2, hi3


@njit
def vacuum_bound_core(lo3, hi2, tau0, mu2, mu3, total):
    """Lower bound on vacuum-origin events, capped by the basis total."""
    s0 = tau0 * (mu2 * lo3 - mu3 * hi2) / (mu2 - mu3)
    if s0 < 0.0:
        s0 = 0.0
    if s0 > total:
        s0 = total
    return s0


@njit
def single_photon_bound_core(lo2, hi3, hi1, s0, tau0, tau1, mu1, mu2, mu3, total):
    """Lower bound on single-photon events, capped so s0 + s1 <= total."""
    den = mu1 * (mu2 - mu3) - mu2 * mu2 + mu3 * mu3
    num = lo2 - hi3 - ((mu2 * mu2 - mu3 * mu3) / (mu1 * mu1)) * (hi1 - s0 / tau0)
    s1 = tau1 * mu1 * num / den
    if s1 < 0.0:
        s1 = 0.0
    cap = total - s0
    if cap < 0.0:
        cap = 0.0
    if s1 > cap:
        s1 = cap
    return s1


@njit
def ec_leakage_core(n_x, qber_x, eps_c, ec_mode, f_ec, f_inv):
    """Reconciliation leakage in bits.

    ec_mode 0: finite-size estimate around the inverse binomial CDF value
    ``f_inv`` (precomputed by the caller); ec_mode 1: f_ec * n_X * h(Q).
    """
    if n_x <= 0.0:
        return 0.0
    q = qber_x
    if ec_mode == 1:
        return f_ec * n_x * binary_entropy(q)
    if q <= 0.0:
        return 0.0
    if q > 0.5:
        q = 0.5
    lr = math.log((1.0 - q) / q) / LN2
    lam = (n_x * binary_entropy(q) + n_x * (1.0 - q) * lr - (f_inv - 1.0) * lr
           - 0.5 * (math.log(n_x) / LN2) - (math.log(1.0 / eps_c) / LN2))
    if lam < 0.0:
        return 0.0
    if lam > n_x:
        return n_x
    return lam


@njit
def bounds_ell_core(n_x1, n_x2, n_x3, n_z1, n_z2, n_z3,
                    m_x1, m_x2, m_x3, m_z1, m_z2, m_z3,
                    mu1, mu2, mu3, p1, p2, p3,
                    beta, eps_s, eps_c, ec_mode, f_ec, f_inv):
    """Finite-key estimation chain from expected counts to key length.

    Returns (ell, raw, s_x0, s_x1, s_z0, s_z1, v_z1, phi_x, lam, qber_x,
    reason).  ``raw`` is the unfloored key expression (the optimization
    surrogate); ``ell`` is max(0, floor(raw)) or 0 on any failure reason.
    """
    n_x = n_x1 + n_x2 + n_x3
    n_z = n_z1 + n_z2 + n_z3
    m_x = m_x1 + m_x2 + m_x3

    const = 6.0 * (math.log(21.0 / eps_s) / LN2) + (math.log(2.0 / eps_c) / LN2)

    if n_x <= 0.0 or n_z <= 0.0:
        return (0.0, -const, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0,
                REASON_ZERO_COUNTS)

    nx_lo1, nx_lo2, nx_lo3, nx_hi1, nx_hi2, nx_hi3 = scaled_bounds_core(
        n_x1, n_x2, n_x3, mu1, mu2, mu3, p1, p2, p3, beta)
    nz_lo1, nz_lo2, nz_lo3, nz_hi1, nz_hi2, nz_hi3 = scaled_bounds_core(
        n_z1, n_z2, n_z3, mu1, mu2, mu3, p1, p2, p3, beta)
    mz_lo1, mz_lo2, mz_lo3, mz_hi1, mz_hi2, mz_hi3 = scaled_bounds_core(
        m_z1, m_z2, m_z3, mu1, mu2, mu3, p1, p2, p3, beta)

    tau0 = poisson_tau(0, mu1, mu2, mu3, p1, p2, p3)
    tau1 = poisson_tau(1, mu1, mu2, mu3, p1, p2, p3)

    s_x0 = vacuum_bound_core(nx_lo3, nx_hi2, tau0, mu2, mu3, n_x)
    s_z0 = vacuum_bound_core(nz_lo3, nz_hi2, tau0, mu2, mu3, n_z)
    s_x1 = single_photon_bound_core(nx_lo2, nx_hi3, nx_hi1, s_x0,
                                    tau0, tau1, mu1, mu2, mu3, n_x)
    s_z1 = single_photon_bound_core(nz_lo2, nz_hi3, nz_hi1, s_z0,
                                    tau0, tau1, mu1, mu2, mu3, n_z)

    v_z1 = tau1 * (mz_hi2 - mz_lo3) / (mu2 - mu3)
    if v_z1 < 0.0:
        v_z1 = 0.0

    qber_x = m_x / n_x

    reason = REASON_OK
    if s_x1 <= 0.0 or s_z1 <= 0.0:
        phi_x = 0.5
        reason = REASON_NO_SINGLE_PHOTON
    else:
        ratio = v_z1 / s_z1
        if ratio >= 0.5:
            phi_x = 0.5
        else:
            phi_x = ratio + fluct_gamma(eps_s + eps_c, ratio, s_z1, s_x1)
            if phi_x > 0.5:
                phi_x = 0.5

    lam = ec_leakage_core(n_x, qber_x, eps_c, ec_mode, f_ec, f_inv)

    raw = s_x0 + s_x1 * (1.0 - binary_entropy(phi_x)) - lam - const

    if reason == REASON_OK:
        ell = raw // 1.0
        if ell <= 0.0:
            ell = 0.0
            reason = REASON_NEGATIVE_KEY
    else:
        ell = 0.0

    return (ell, raw, s_x0, s_x1, s_z0, s_z1, v_z1, phi_x, lam, qber_x, reason)


@njit
def grid_counts_core(g, cand1, cand2, pax, pbx, mu3, p1, p2, p3,
                     p_d, p_ec, qber_i, p_ap, n_pulses,
                     n_x_out, qber_out):
    """Pass 1 of the worst-case grid: totals per true-intensity combination.

    The g^8 true combinations are indexed row-major over the dimensions
    (H:mu1, H:mu2, V:mu1, V:mu2, D:mu1, D:mu2, A:mu1, A:mu2).
    """
    n_true = g ** 8
    for t in range(n_true):
        r = t
        a2 = r % g; r //= g
        a1 = r % g; r //= g
        d2 = r % g; r //= g
        d1 = r % g; r //= g
        v2 = r % g; r //= g
        v1 = r % g; r //= g
        h2 = r % g; r //= g
        h1 = r
        (n_x1, n_x2, n_x3, _nz1, _nz2, _nz3,
         m_x1, m_x2, m_x3, _mz1, _mz2, _mz3) = counts_core(
            pax, pbx,
            cand1[h1], cand2[h2], cand1[v1], cand2[v2],
            cand1[d1], cand2[d2], cand1[a1], cand2[a2],
            mu3, p1, p2, p3, p_d, p_ec, qber_i, p_ap, n_pulses)
        n_x = n_x1 + n_x2 + n_x3
        n_x_out[t] = n_x
        if n_x > 0.0:
            qber_out[t] = (m_x1 + m_x2 + m_x3) / n_x
        else:
            qber_out[t] = 0.0


@njit
def grid_min_core(g, cand1, cand2, pax, pbx, mu3, p1, p2, p3,
                  p_d, p_ec, qber_i, p_ap, n_pulses,
                  beta, eps_s, eps_c, ec_mode, f_ec, f_inv_by_true):
    """Pass 2 of the worst-case grid: minimum key length over g^10 points.

    Grid points are visited row-major over (H:mu1, H:mu2, V:mu1, V:mu2,
    D:mu1, D:mu2, A:mu1, A:mu2, est:mu1, est:mu2); ties keep the first
    point encountered.  Returns (min_ell, argmin_flat_index, n_evals).
    """
    n_total = g ** 10
    g2 = g * g
    best = math.inf
    best_idx = -1
    evals = 0
    for j in range(n_total):
        t = j // g2
        rem = j % g2
        e1 = rem // g
        e2 = rem % g
        r = t
        a2 = r % g; r //= g
        a1 = r % g; r //= g
        d2 = r % g; r //= g
        d1 = r % g; r //= g
        v2 = r % g; r //= g
        v1 = r % g; r //= g
        h2 = r % g; r //= g
        h1 = r
        (n_x1, n_x2, n_x3, n_z1, n_z2, n_z3,
         m_x1, m_x2, m_x3, m_z1, m_z2, m_z3) = counts_core(
            pax, pbx,
            cand1[h1], cand2[h2], cand1[v1], cand2[v2],
            cand1[d1], cand2[d2], cand1[a1], cand2[a2],
            mu3, p1, p2, p3, p_d, p_ec, qber_i, p_ap, n_pulses)
        out = bounds_ell_core(
            n_x1, n_x2, n_x3, n_z1, n_z2, n_z3,
            m_x1, m_x2, m_x3, m_z1, m_z2, m_z3,
            cand1[e1], cand2[e2], mu3, p1, p2, p3,
            beta, eps_s, eps_c, ec_mode, f_ec, f_inv_by_true[t])
        evals += 1
        ell = out[0]
        if ell < best:
            best = ell
            best_idx = j
    return best, best_idx, evals
