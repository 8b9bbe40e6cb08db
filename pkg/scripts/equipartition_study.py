#!/usr/bin/env python3
"""Equipartition study: trace the Cesàro gap Kc(t) - Sc(t) over long runs.

Prints the gap trajectory for the pinned-wall case (expected to decay like
1/t toward 0) and the all-traction case with a rigid drift (expected to
approach the rigid kinetic offset).
"""

from __future__ import annotations

import argparse

import numpy as np

from poromix.verify import _equipartition_case_i, _equipartition_case_ii


def trace(label, rep, n_rows=12):
    print(f"== {label}: E0 = {rep.E0:.6f}, predicted offset = {rep.predicted_offset:.6f}")
    idx = np.unique(np.geomspace(1, len(rep.gap_t) - 1, n_rows).astype(int))
    for i in idx:
        print(f"   t = {rep.gap_t[i]:9.3f}   gap = {rep.gap[i]: .6e}")
    if rep.fit_exponent is not None:
        print(f"   envelope decay exponent: {rep.fit_exponent:.3f}")
    print(f"   final |gap - offset| / E0 = "
          f"{abs(rep.gap[-1] - rep.predicted_offset) / rep.E0:.3e}")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    trace("pinned walls", _equipartition_case_i(args.seed))
    trace("all-traction, rigid drift + residuals",
          _equipartition_case_ii(args.seed, "mixed"))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
