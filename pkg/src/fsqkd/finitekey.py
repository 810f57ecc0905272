"""Finite-key secure key length for the three-intensity decoy protocol.

The estimation chain follows the composable security analysis of Lim,
Curty, Walenta, Xu and Zbinden, Phys. Rev. A 89, 032332 (2014), with
two-sided multiplicative concentration corrections on every observed
count.  Key bits are drawn from the X basis; the publicly disclosed Z
basis drives the vacuum / single-photon yield estimates and the phase
error.  Reconciliation leakage uses the finite-size estimate of
Tomamichel, Martinez-Mateo, Fung and Lutkenhaus (binomial-quantile form)
by default, or a plain efficiency-factor estimate.

The per-bound failure exponent defaults to ``beta = ln(21 / eps_s)``,
matching the 21-way failure-budget split that also produces the
``6 log2(21/eps_s)`` privacy-amplification constant in the key formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

from . import _kernels as k
from ._quantile import binom_ppf
from .channel import BlockCounts, ChannelConditions, ParameterError, ProtocolParams, expected_block_counts

EcMethod = Literal["binomial", "rate-factor"]

_REASONS = {
    k.REASON_ZERO_COUNTS: "zero-counts",
    k.REASON_NO_SINGLE_PHOTON: "no-single-photon-bound",
    k.REASON_NEGATIVE_KEY: "negative-key-expression",
}


class NoKeySignal(ArithmeticError):
    """Signals that an estimation step degenerated; callers map this to ell = 0."""


@dataclass(frozen=True)
class SecurityParams:
    """Composable security budget.

    ``beta`` is the exponent used in the concentration corrections; when
    not given it defaults to ``ln(21 / eps_s)`` (one 21st of the secrecy
    budget per bound application).  Tests of asymptotic behaviour may pass
    ``beta=0`` explicitly.
    """

    eps_s: float = 1e-9
    eps_c: float = 1e-15
    beta: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.eps_s < 1.0:
            raise ParameterError(f"eps_s must be in (0, 1), got {self.eps_s}")
        if not 0.0 < self.eps_c < 1.0:
            raise ParameterError(f"eps_c must be in (0, 1), got {self.eps_c}")
        if self.beta is None:
            object.__setattr__(self, "beta", math.log(21.0 / self.eps_s))
        elif self.beta < 0.0:
            raise ParameterError(f"beta must be >= 0, got {self.beta}")

    @property
    def eps(self) -> float:
        return self.eps_s + self.eps_c


@dataclass(frozen=True)
class KeyLengthResult:
    """Secure key length plus every intermediate estimate for diagnostics."""

    ell: int
    raw: float
    s_x0: float
    s_x1: float
    phi_x: float
    lambda_ec: float
    qber_x: float
    reason: str | None
    diagnostics: dict = field(default_factory=dict)


def binary_entropy(x: float) -> float:
    """Binary entropy in bits; h(0) = h(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ParameterError(f"entropy argument must be in [0, 1], got {x}")
    return k.binary_entropy(x)


def chernoff_delta(y: float, beta: float, side: str = "plus") -> float:
    """Two-sided concentration correction for an expected count y."""
    if y < 0.0:
        raise ParameterError(f"count must be >= 0, got {y}")
    if beta < 0.0:
        raise ParameterError(f"beta must be >= 0, got {beta}")
    if side == "plus":
        return k.chernoff_delta_plus(y, beta)
    if side == "minus":
        return k.chernoff_delta_minus(y, beta)
    raise ParameterError(f"side must be 'plus' or 'minus', got {side!r}")


def decoy_tau(n: int, params: ProtocolParams) -> float:
    """Probability that a transmitted pulse carries n photons (n in {0, 1})."""
    if n not in (0, 1):
        raise ParameterError(f"n must be 0 or 1, got {n}")
    mu1, mu2, mu3 = params.mu
    p1, p2, p3 = params.p_mu
    return k.poisson_tau(n, mu1, mu2, mu3, p1, p2, p3)


def scaled_count_bounds(counts: BlockCounts, params: ProtocolParams,
                        sec: SecurityParams) -> dict[str, tuple[float, float, float]]:
    """Concentration-corrected, intensity-rescaled counts for all observables.

    Returns a dict with keys ``n_x_minus``, ``n_x_plus``, ``n_z_minus``,
    ``n_z_plus``, ``m_x_minus``, ``m_x_plus``, ``m_z_minus``, ``m_z_plus``,
    each a per-intensity triple.  Lower bounds are floored at zero.
    """
    mu1, mu2, mu3 = params.mu
    p1, p2, p3 = params.p_mu
    out: dict[str, tuple[float, float, float]] = {}
    for name, trip in (("n_x", counts.n_x), ("n_z", counts.n_z),
                       ("m_x", counts.m_x), ("m_z", counts.m_z)):
        lo1, lo2, lo3, hi1, hi2, hi3 = k.scaled_bounds_core(
            trip[0], trip[1], trip[2], mu1, mu2, mu3, p1, p2, p3, sec.beta)
        out[f"{name}_minus"] = (lo1, lo2, lo3)
        out[f"{name}_plus"] = (hi1, hi2, hi3)
    return out


def vacuum_bound(n_minus: tuple[float, float, float],
                 n_plus: tuple[float, float, float],
                 params: ProtocolParams,
                 total: float | None = None) -> float:
    """Lower bound on vacuum-origin events in one basis.

    ``total`` optionally caps the bound at the basis detection total.
    """
    mu1, mu2, mu3 = params.mu
    if not mu2 > mu3:
        raise ParameterError(f"vacuum bound requires mu2 > mu3, got {params.mu}")
    tau0 = decoy_tau(0, params)
    cap = math.inf if total is None else total
    return k.vacuum_bound_core(n_minus[2], n_plus[1], tau0, mu2, mu3, cap)


def single_photon_bound(n_minus: tuple[float, float, float],
                        n_plus: tuple[float, float, float],
                        s_0: float, params: ProtocolParams,
                        total: float | None = None) -> float:
    """Lower bound on single-photon events in one basis."""
    mu1, mu2, mu3 = params.mu
    den = mu1 * (mu2 - mu3) - mu2 * mu2 + mu3 * mu3
    if den <= 0.0:
        raise ParameterError(f"degenerate decoy denominator for intensities {params.mu}")
    tau0 = decoy_tau(0, params)
    tau1 = decoy_tau(1, params)
    cap = math.inf if total is None else total
    return k.single_photon_bound_core(n_minus[1], n_plus[2], n_plus[0], s_0,
                                      tau0, tau1, mu1, mu2, mu3, cap)


def phase_error(s_z1: float, v_z1: float, s_x1: float, sec: SecurityParams) -> float:
    """Phase error rate of the single-photon X-basis events, clamped to 0.5.

    Raises :class:`NoKeySignal` when either single-photon bound vanishes.
    """
    if v_z1 < 0.0:
        raise ParameterError(f"v_z1 must be >= 0, got {v_z1}")
    if s_z1 <= 0.0 or s_x1 <= 0.0:
        raise NoKeySignal("single-photon bound is zero; no key can be extracted")
    ratio = v_z1 / s_z1
    if ratio >= 0.5:
        return 0.5
    return min(0.5, ratio + k.fluct_gamma(sec.eps, ratio, s_z1, s_x1))


def ec_leakage(n_x: float, qber_x: float, eps_c: float,
               method: EcMethod = "binomial", f_ec: float = 1.16) -> float:
    """Reconciliation leakage estimate in bits.

    ``binomial`` uses the finite-size estimate built on the inverse
    binomial CDF; ``rate-factor`` uses ``f_ec * n_x * h(qber_x)``.
    """
    if n_x < 0.0:
        raise ParameterError(f"n_x must be >= 0, got {n_x}")
    if not 0.0 <= qber_x <= 0.5:
        raise ParameterError(f"qber_x must be in [0, 0.5], got {qber_x}")
    if n_x == 0.0:
        return 0.0
    if method == "rate-factor":
        return k.ec_leakage_core(n_x, qber_x, eps_c, 1, f_ec, 0.0)
    if method != "binomial":
        raise ParameterError(f"unknown EC leakage method {method!r}")
    f_inv = _ec_quantile(n_x, qber_x, eps_c)
    return k.ec_leakage_core(n_x, qber_x, eps_c, 0, f_ec, f_inv)


def _ec_quantile(n_x: float, qber_x: float, eps_c: float) -> float:
    """Inverse binomial CDF term feeding the leakage estimate."""
    if n_x <= 0.0 or qber_x <= 0.0:
        return 0.0
    q = min(qber_x, 0.5)
    return binom_ppf(eps_c, n_x, 1.0 - q)


def secure_key_length(counts: BlockCounts, params: ProtocolParams,
                      sec: SecurityParams,
                      ec_method: EcMethod = "binomial",
                      f_ec: float = 1.16,
                      with_diagnostics: bool = True) -> KeyLengthResult:
    """Composable secure key length for one block of expected counts.

    Every failure mode (no detections, degenerate single-photon estimate,
    negative key expression) maps to ``ell = 0`` with a reason string.
    """
    mu1, mu2, mu3 = params.mu
    p1, p2, p3 = params.p_mu
    ec_mode = 0 if ec_method == "binomial" else 1
    if ec_method not in ("binomial", "rate-factor"):
        raise ParameterError(f"unknown EC leakage method {ec_method!r}")

    n_x = counts.n_x_total
    qber_x = counts.m_x_total / n_x if n_x > 0.0 else 0.0
    f_inv = _ec_quantile(n_x, qber_x, sec.eps_c) if ec_mode == 0 else 0.0

    out = k.bounds_ell_core(
        counts.n_x[0], counts.n_x[1], counts.n_x[2],
        counts.n_z[0], counts.n_z[1], counts.n_z[2],
        counts.m_x[0], counts.m_x[1], counts.m_x[2],
        counts.m_z[0], counts.m_z[1], counts.m_z[2],
        mu1, mu2, mu3, p1, p2, p3,
        sec.beta, sec.eps_s, sec.eps_c, ec_mode, f_ec, f_inv)
    (ell, raw, s_x0, s_x1, s_z0, s_z1, v_z1, phi_x, lam, qber_x_out, reason) = out

    diagnostics: dict = {}
    if with_diagnostics:
        diagnostics = dict(scaled_count_bounds(counts, params, sec))
        diagnostics.update(
            s_z0=s_z0, s_z1=s_z1, v_z1=v_z1,
            n_x_total=counts.n_x_total, n_z_total=counts.n_z_total,
            m_x_total=counts.m_x_total, m_z_total=counts.m_z_total,
            tau_0=decoy_tau(0, params), tau_1=decoy_tau(1, params),
            ec_quantile=f_inv, beta=sec.beta,
        )

    return KeyLengthResult(
        ell=int(ell), raw=raw, s_x0=s_x0, s_x1=s_x1, phi_x=phi_x,
        lambda_ec=lam, qber_x=qber_x_out,
        reason=_REASONS.get(reason), diagnostics=diagnostics)


def key_length_for_channel(params: ProtocolParams,
                           channel: ChannelConditions,
                           sec: SecurityParams,
                           ec_method: EcMethod = "binomial",
                           f_ec: float = 1.16,
                           with_diagnostics: bool = True) -> KeyLengthResult:
    """Expected-count evaluation of the secure key length for one window."""
    counts = expected_block_counts(params, channel)
    return secure_key_length(counts, params, sec, ec_method=ec_method,
                             f_ec=f_ec, with_diagnostics=with_diagnostics)


def _evaluate_flat(pax: float, pbx: float,
                   mu1: float, mu2: float, mu3: float,
                   p1: float, p2: float, p3: float,
                   p_d: float, p_ec: float, qber_i: float, p_ap: float,
                   n_pulses: float, beta: float, eps_s: float, eps_c: float,
                   ec_mode: int, f_ec: float) -> tuple:
    """Hot-path evaluation on plain floats; returns the kernel result tuple.

    Identical arithmetic to :func:`key_length_for_channel` (same kernels in
    the same order), without dataclass construction.
    """
    c = k.counts_core(pax, pbx, mu1, mu2, mu1, mu2, mu1, mu2, mu1, mu2,
                      mu3, p1, p2, p3, p_d, p_ec, qber_i, p_ap, n_pulses)
    f_inv = 0.0
    if ec_mode == 0:
        n_x = c[0] + c[1] + c[2]
        if n_x > 0.0:
            q = (c[6] + c[7] + c[8]) / n_x
            if q > 0.0:
                f_inv = binom_ppf(eps_c, n_x, 1.0 - min(q, 0.5))
    return k.bounds_ell_core(c[0], c[1], c[2], c[3], c[4], c[5],
                             c[6], c[7], c[8], c[9], c[10], c[11],
                             mu1, mu2, mu3, p1, p2, p3,
                             beta, eps_s, eps_c, ec_mode, f_ec, f_inv)
