"""Benchmark the JIT-compiled kernels against the pure NumPy/Python path.

Usage::

    python benchmarks/bench_backends.py [--grid-points 3] [--repeats 2000]

Backend selection happens at import time through ``FSQKD_NUMBA``, so the
script measures the backend it was started with and, when that backend is
the JIT one, re-runs itself in a subprocess with ``FSQKD_NUMBA=0`` to get
the fallback numbers side by side.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import subprocess
import sys
import time

import numpy as np

from fsqkd import _kernels as k
from fsqkd._accel import using_numba
from fsqkd import (ChannelConditions, IntensityUncertaintyModel,
                   OptimizationSpec, ProtocolParams, Regime, SecurityParams,
                   optimize, worst_case_key_length)

CHAIN_ARGS_COUNTS = (0.7, 0.5, 0.5, 0.1, 0.5, 0.1, 0.5, 0.1, 0.5, 0.1,
                     1e-9, 0.8, 0.13, 0.07, 1e-3, 1e-6, 0.01, 1e-3, 6e9)
BETA = math.log(21.0 / 1e-9)

CHANNEL = ChannelConditions(eta_loss_db=30.0, p_ec=1e-6, qber_i=0.01,
                            integration_time_s=60.0)
PARAMS = ProtocolParams(pax=0.7, pbx=0.5, mu=(0.5, 0.1, 0.0),
                        p_mu=(0.8, 0.13, 0.07))
SEC = SecurityParams()


def chain_once() -> float:
    c = k.counts_core(*CHAIN_ARGS_COUNTS)
    out = k.bounds_ell_core(*c, 0.5, 0.1, 1e-9, 0.8, 0.13, 0.07,
                            BETA, 1e-9, 1e-15, 1, 1.16, 0.0)
    return out[0]


def measure(repeats: int, grid_points: int) -> dict:
    chain_once()  # warm (JIT compile or no-op)
    t0 = time.perf_counter()
    for _ in range(repeats):
        chain_once()
    chain = (time.perf_counter() - t0) / repeats

    model = IntensityUncertaintyModel(f=0.1, nominal=PARAMS,
                                      grid_points_per_dim=grid_points)
    worst_case_key_length(model, CHANNEL, SEC)  # warm
    t0 = time.perf_counter()
    worst_case_key_length(model, CHANNEL, SEC)
    grid = time.perf_counter() - t0

    spec = OptimizationSpec(regime=Regime.FIXED_PBX_AND_MU, pbx=0.5,
                            mu=(0.5, 0.1, 0.0), restarts=4, seed=1)
    optimize(spec, CHANNEL, SEC)  # warm
    t0 = time.perf_counter()
    res = optimize(spec, CHANNEL, SEC)
    opt = time.perf_counter() - t0

    return {"backend": "numba" if using_numba() else "python",
            "chain_us": chain * 1e6, "grid_s": grid, "optimize_s": opt,
            "optimize_ell": res.best_ell, "grid_pts": grid_points ** 10}


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid-points", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=2000)
    ap.add_argument("--emit-json", action="store_true",
                    help="print raw numbers only (used by the subprocess)")
    args = ap.parse_args()

    mine = measure(args.repeats, args.grid_points)
    if args.emit_json:
        print(json.dumps(mine))
        return

    rows = [mine]
    if using_numba():
        env = dict(os.environ, FSQKD_NUMBA="0")
        out = subprocess.run(
            [sys.executable, __file__, "--emit-json",
             "--grid-points", str(args.grid_points),
             "--repeats", str(max(args.repeats // 100, 20))],
            env=env, capture_output=True, text=True, check=True)
        rows.append(json.loads(out.stdout.strip().splitlines()[-1]))

    print(f"{'backend':8s} {'chain us/eval':>14s} {'grid s':>10s} "
          f"{'optimize s':>11s}")
    for r in rows:
        print(f"{r['backend']:8s} {r['chain_us']:14.2f} {r['grid_s']:10.3f} "
              f"{r['optimize_s']:11.3f}")
    if len(rows) == 2:
        a, b = rows
        assert a["optimize_ell"] == b["optimize_ell"], "backends disagree"
        print(f"speedup  {b['chain_us'] / a['chain_us']:14.1f} "
              f"{b['grid_s'] / a['grid_s']:10.1f} "
              f"{b['optimize_s'] / a['optimize_s']:11.1f}")
        print(f"identical optimization result on both backends: "
              f"ell = {a['optimize_ell']}")


if __name__ == "__main__":
    main()
