#!/usr/bin/env python3
"""Pulse demo: integrate a coupled mixture pulse and dump the diagnostics.

Writes energy.csv / power.csv / cesaro.csv / residuals.csv into --out and
prints a compact summary (energy drift, front speed vs c, P = E agreement).
"""

from __future__ import annotations

import argparse
import os

import numpy as np

import poromix as pm
from poromix import diagnostics as diag
from poromix import io as pio


def gaussian_vec(comp, center, width, amp):
    def fn(x):
        out = np.zeros((3,) + x.shape[1:])
        out[comp] = amp * np.exp(-((x[0] - center) ** 2) / (2 * width**2))
        return out

    return fn


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, default=401)
    ap.add_argument("--width", type=float, default=0.02)
    ap.add_argument("--out", default="out/pulse_demo")
    args = ap.parse_args()

    consts = pm.random_material(args.seed)
    grid = pm.Grid(dim=1, n=(args.n,), h=(1.0 / (args.n - 1),))
    boundary = pm.BoundaryPartition.uniform("natural", "natural", dim=1)
    initial = pm.InitialData(
        u1=gaussian_vec(0, 0.5, args.width, 1.0),
        v1=gaussian_vec(0, 0.5, args.width, 0.5),
    )
    probe = pm.ProblemSpec(grid=grid, consts=consts, boundary=boundary,
                           initial=initial, T=0.0)
    geom = diag.support_geometry(probe)
    speed = probe.speed()
    problem = pm.ProblemSpec(grid=grid, consts=consts, boundary=boundary,
                             initial=initial, T=0.8 * geom.L / speed.c, cfl=0.5)
    final, energy, traj = diag.record_run(problem, energy_every=2, snapshot_every=2)

    r_grid = diag.default_r_grid(geom)
    sps = diag.surface_power(traj, geom, r_grid, lam=problem.lam)
    front = diag.front_speed(traj, geom)
    cs = diag.cesaro_means(energy)
    ir = diag.identity_residuals(traj, problem.lam)

    os.makedirs(args.out, exist_ok=True)
    pio.write_energy_csv(os.path.join(args.out, "energy.csv"), energy)
    pio.write_power_csv(os.path.join(args.out, "power.csv"), sps)
    pio.write_cesaro_csv(os.path.join(args.out, "cesaro.csv"), cs)
    pio.write_residuals_csv(os.path.join(args.out, "residuals.csv"), ir)

    ref = np.max(np.abs(sps.E_vol))
    sel = np.abs(sps.E_vol) > 1e-2 * ref
    pe = np.max(np.abs(sps.P[sel] - sps.E_vol[sel]) / np.abs(sps.E_vol[sel]))
    print(f"steps to T={problem.T:.4f}: {len(energy.t) * 2 - 2}")
    print(f"energy drift:      {energy.max_relative_drift():.3e}")
    print(f"front speed / c:   {front.speed / speed.c:.4f}")
    print(f"max |P-E|/E:       {pe:.4f}")
    print(f"artifacts in {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
