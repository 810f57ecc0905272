"""Worst-case key length under bounded pulse-intensity uncertainty.

Each of the four signal states (H, V, D, A) may emit its two non-vacuum
intensities anywhere inside ``[mu_j (1 - f), mu_j (1 + f)]``, independently
per state, and the receiver-side estimation chain likewise only knows its
own candidate pair from the same intervals.  With the default three grid
points per dimension the search evaluates the key length on all 3^10
combinations of interval endpoints and midpoints and reports the minimum,
which is the length that privacy amplification must assume.

The vacuum intensity is not varied: fluctuations of an (ideally) empty
pulse are already covered by the extraneous-count probability.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from ._quantile import binom_ppf
from .channel import ChannelConditions, ParameterError, ProtocolParams
from .finitekey import SecurityParams

GRID_DIMS = ("h_mu1", "h_mu2", "v_mu1", "v_mu2", "d_mu1", "d_mu2",
             "a_mu1", "a_mu2", "est_mu1", "est_mu2")


@dataclass(frozen=True)
class IntensityUncertaintyModel:
    """Fractional intensity uncertainty around a nominal parameter point."""

    f: float
    nominal: ProtocolParams
    grid_points_per_dim: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.f < 0.5:
            raise ParameterError(f"fractional uncertainty must be in [0, 0.5), got {self.f}")
        if self.grid_points_per_dim < 2 and self.f > 0.0:
            raise ParameterError("need at least 2 grid points per dimension for f > 0")
        if self.grid_points_per_dim < 1:
            raise ParameterError("grid_points_per_dim must be >= 1")

    def candidates(self, mu: float) -> np.ndarray:
        """Candidate values for one intensity: endpoints and interior points.

        For an odd point count the exact nominal value sits in the middle.
        """
        g = self.grid_points_per_dim
        if g == 1 or self.f == 0.0:
            return np.full(max(g, 1), mu, dtype=float)
        fracs = 2.0 * np.arange(g) / (g - 1) - 1.0
        return mu * (1.0 + self.f * fracs)


@dataclass(frozen=True)
class WorstCaseResult:
    min_ell: int
    nominal_ell: int
    argmin: dict[str, float]
    argmin_index: int
    evaluations: int


def key_length_for_intensities(state_mu: dict[str, float],
                               params: ProtocolParams,
                               channel: ChannelConditions,
                               sec: SecurityParams,
                               ec_method: str = "binomial",
                               f_ec: float = 1.16) -> int:
    """Key length with explicit per-state true and estimator-side intensities.

    ``state_mu`` maps each name in ``GRID_DIMS`` to an intensity value;
    omitted names default to the nominal values in ``params``.
    """
    mu1, mu2, mu3 = params.mu
    vals = {"h_mu1": mu1, "v_mu1": mu1, "d_mu1": mu1, "a_mu1": mu1,
            "h_mu2": mu2, "v_mu2": mu2, "d_mu2": mu2, "a_mu2": mu2,
            "est_mu1": mu1, "est_mu2": mu2}
    for name, v in state_mu.items():
        if name not in vals:
            raise ParameterError(f"unknown intensity dimension {name!r}")
        vals[name] = float(v)
    p1, p2, p3 = params.p_mu
    c = k.counts_core(params.pax, params.pbx,
                      vals["h_mu1"], vals["h_mu2"], vals["v_mu1"], vals["v_mu2"],
                      vals["d_mu1"], vals["d_mu2"], vals["a_mu1"], vals["a_mu2"],
                      mu3, p1, p2, p3,
                      channel.transmittance, channel.p_ec, channel.qber_i,
                      channel.p_ap, channel.n_pulses)
    ec_mode = 0 if ec_method == "binomial" else 1
    f_inv = 0.0
    if ec_mode == 0:
        n_x = c[0] + c[1] + c[2]
        if n_x > 0.0:
            q = (c[6] + c[7] + c[8]) / n_x
            if q > 0.0:
                f_inv = binom_ppf(sec.eps_c, n_x, 1.0 - min(q, 0.5))
    out = k.bounds_ell_core(c[0], c[1], c[2], c[3], c[4], c[5],
                            c[6], c[7], c[8], c[9], c[10], c[11],
                            vals["est_mu1"], vals["est_mu2"], mu3, p1, p2, p3,
                            sec.beta, sec.eps_s, sec.eps_c, ec_mode, f_ec, f_inv)
    return int(out[0])


def decode_grid_index(index: int, g: int) -> tuple[int, ...]:
    """Flat row-major grid index -> per-dimension candidate indices."""
    digits = []
    r = index
    for _ in range(10):
        digits.append(r % g)
        r //= g
    return tuple(reversed(digits))


def worst_case_key_length(model: IntensityUncertaintyModel,
                          channel: ChannelConditions,
                          sec: SecurityParams,
                          ec_method: str = "binomial",
                          f_ec: float = 1.16) -> WorstCaseResult:
    """Minimum key length over the full intensity-uncertainty grid.

    The grid is visited row-major over ``GRID_DIMS``; ties in the minimum
    keep the first point encountered.  All g^10 points are evaluated and
    counted.
    """
    params = model.nominal
    mu1, mu2, mu3 = params.mu
    p1, p2, p3 = params.p_mu
    g = model.grid_points_per_dim
    cand1 = np.ascontiguousarray(model.candidates(mu1))
    cand2 = np.ascontiguousarray(model.candidates(mu2))
    p_d = channel.transmittance
    n_pulses = channel.n_pulses
    ec_mode = 0 if ec_method == "binomial" else 1

    n_true = g ** 8
    f_inv_by_true = np.zeros(n_true, dtype=float)
    if ec_mode == 0:
        n_x_arr = np.empty(n_true, dtype=float)
        q_arr = np.empty(n_true, dtype=float)
        k.grid_counts_core(g, cand1, cand2, params.pax, params.pbx, mu3,
                           p1, p2, p3, p_d, channel.p_ec, channel.qber_i,
                           channel.p_ap, n_pulses, n_x_arr, q_arr)
        mask = (n_x_arr > 0.0) & (q_arr > 0.0)
        if np.any(mask):
            qc = np.minimum(q_arr[mask], 0.5)
            f_inv_by_true[mask] = binom_ppf(sec.eps_c, n_x_arr[mask], 1.0 - qc)

    min_ell, argmin_idx, evals = k.grid_min_core(
        g, cand1, cand2, params.pax, params.pbx, mu3, p1, p2, p3,
        p_d, channel.p_ec, channel.qber_i, channel.p_ap, n_pulses,
        sec.beta, sec.eps_s, sec.eps_c, ec_mode, f_ec, f_inv_by_true)

    digits = decode_grid_index(int(argmin_idx), g)
    argmin = {}
    for name, digit in zip(GRID_DIMS, digits):
        cands = cand1 if name.endswith("mu1") else cand2
        argmin[name] = float(cands[digit])

    nominal_ell = key_length_for_intensities({}, params, channel, sec,
                                             ec_method=ec_method, f_ec=f_ec)
    return WorstCaseResult(min_ell=int(min_ell), nominal_ell=nominal_ell,
                           argmin=argmin, argmin_index=int(argmin_idx),
                           evaluations=int(evals))
