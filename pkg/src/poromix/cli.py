"""Command-line interface.

Subcommands::

    poromix material-check <file>
    poromix simulate --config <file> [--out <dir>]
    poromix verify --config <file> --suite <name> [--seed N]
    poromix decay-report --config <file> [--lambda-sweep]

Exit codes: 0 pass, 1 check failure, 2 usage/config error, 3 numerical
failure (non-finite field update).  POROMIX_THREADS caps suite parallelism.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import diagnostics as diag
from . import io as pio
from .config import load_config, resolve_material, build_problem, save_config
from .errors import (
    InvalidParameter,
    NonFinite,
    NotPositiveDefinite,
    ParseError,
    PoromixError,
    SchemaError,
)
from .materials import (
    assemble_quadratic_form,
    decoupled_material,
    elastic_moduli_bounds,
    identity_material,
    load_material,
    random_material,
    validate_symmetries,
    wave_speed,
)
from .verify import run_suite

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _load_material_arg(spec: str):
    if spec == "identity":
        return identity_material()
    if spec == "decoupled":
        return decoupled_material()
    if spec.startswith("random:"):
        return random_material(int(spec.split(":", 1)[1]))
    return load_material(spec)


def cmd_material_check(args) -> int:
    try:
        consts = _load_material_arg(args.file)
    except (OSError, InvalidParameter, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = validate_symmetries(consts)
    if not report.ok:
        print(f"symmetry check: FAIL ({report})")
        return EXIT_CHECK_FAILED
    print("symmetry check: ok")
    form = assemble_quadratic_form(consts)
    try:
        xi_min, xi_max = elastic_moduli_bounds(form)
    except NotPositiveDefinite as exc:
        print(f"admissibility: FAIL ({exc})")
        return EXIT_CHECK_FAILED
    speed = wave_speed(consts, xi_max, 1.0)
    print(f"xi_min = {xi_min:.12g}")
    print(f"xi_max = {xi_max:.12g}")
    print(f"m = {speed.m_inertia:.12g}")
    print(f"c = {speed.c:.12g}")
    print("admissibility: ok")
    return EXIT_PASS


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config)
        consts = resolve_material(cfg)
        problem = build_problem(cfg, consts)
    except (OSError, ParseError, SchemaError, InvalidParameter) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out or cfg.output
    if not os.path.isabs(out_dir):
        out_dir = os.path.join(cfg.base_dir, out_dir)
    os.makedirs(out_dir, exist_ok=True)
    snap_dir = os.path.join(out_dir, "snapshots")
    os.makedirs(snap_dir, exist_ok=True)
    try:
        final, energy, traj = diag.record_run(problem)
    except NonFinite as exc:
        print(f"numerical failure: {exc} (step {exc.step})", file=sys.stderr)
        return EXIT_NUMERIC
    paths = []
    p_energy = os.path.join(out_dir, "energy.csv")
    pio.write_energy_csv(p_energy, energy)
    paths.append(p_energy)

    geom = diag.support_geometry(problem)
    r_grid = diag.default_r_grid(geom)
    sps = diag.surface_power(traj, geom, r_grid, lam=problem.lam)
    p_power = os.path.join(out_dir, "power.csv")
    pio.write_power_csv(p_power, sps)
    paths.append(p_power)

    if len(energy.t) >= 2:
        cs = diag.cesaro_means(energy)
        p_ces = os.path.join(out_dir, "cesaro.csv")
        pio.write_cesaro_csv(p_ces, cs)
        paths.append(p_ces)
    if len(traj) >= 3:
        ir = diag.identity_residuals(traj, problem.lam)
        p_res = os.path.join(out_dir, "residuals.csv")
        pio.write_residuals_csv(p_res, ir)
        paths.append(p_res)
    for idx, state in enumerate(traj.states):
        p_snap = os.path.join(snap_dir, f"snap_{idx:06d}.bin")
        pio.write_snapshot(p_snap, state)
        paths.append(p_snap)

    canon = os.path.join(out_dir, "config.canonical")
    save_config(cfg, canon)
    paths.append(canon)
    entries = {os.path.relpath(p, out_dir): pio.file_sha256(p) for p in paths}
    entries["config"] = pio.file_sha256(args.config)
    if cfg.material.startswith("file:"):
        mat_path = cfg.material.split(":", 1)[1]
        if not os.path.isabs(mat_path):
            mat_path = os.path.join(cfg.base_dir, mat_path)
        entries["material"] = pio.file_sha256(mat_path)
    pio.write_manifest(os.path.join(out_dir, "manifest.txt"), entries)
    print(f"wrote {len(paths)} artifacts to {out_dir}")
    return EXIT_PASS


def cmd_verify(args) -> int:
    try:
        cfg = load_config(args.config)
    except (OSError, ParseError, SchemaError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else cfg.seed
    suites = [args.suite] if args.suite else list(cfg.suites)
    print(f"seed = {seed}")
    out_dir = os.path.join(cfg.base_dir, cfg.output)
    os.makedirs(out_dir, exist_ok=True)
    try:
        config_consts = resolve_material(cfg)
    except (OSError, InvalidParameter, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    all_pass = True
    try:
        for name in suites:
            report = run_suite(name, seed=seed, tol_h=cfg.tol_h, config_consts=config_consts)
            print(report.to_text())
            base = os.path.join(out_dir, f"verify_{name}")
            with open(base + ".txt", "w", newline="\n") as fh:
                fh.write(report.to_text() + "\n")
            with open(base + ".csv", "w", newline="\n") as fh:
                for row in report.to_csv_rows():
                    fh.write(",".join(row) + "\n")
            all_pass = all_pass and report.passed
    except NonFinite as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_PASS if all_pass else EXIT_CHECK_FAILED


def cmd_decay_report(args) -> int:
    try:
        cfg = load_config(args.config)
        consts = resolve_material(cfg)
        problem = build_problem(cfg, consts)
    except (OSError, ParseError, SchemaError, InvalidParameter) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        final, energy, traj = diag.record_run(problem)
    except NonFinite as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    geom = diag.support_geometry(problem)
    r_grid = diag.default_r_grid(geom)
    speed = problem.speed()
    length = max(problem.grid.extent())
    lams = [m * speed.c / length for m in (0.5, 1.0, 2.0)] if args.lambda_sweep else [problem.lam]
    ok = True
    for lam in lams:
        sps = diag.surface_power(traj, geom, r_grid, lam=lam)
        sp = wave_speed(problem.consts, speed.c**2 * speed.m_inertia, lam)
        t_final = float(sps.t_grid[-1])
        try:
            drep = diag.decay_report(sps, sp, t=t_final, tol_h=cfg.tol_h)
            print(
                f"lambda={lam:.6g}: slope={drep.slope:.6g} "
                f"(envelope rate {-lam / sp.c:.6g}), bound_ok={drep.bound_ok}, "
                f"max_ratio={drep.max_bound_ratio:.6g}"
            )
            ok = ok and drep.bound_ok
        except PoromixError as exc:
            print(f"lambda={lam:.6g}: degenerate ({exc})")
            ok = False
    return EXIT_PASS if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poromix", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("material-check", help="validate a material file and print its moduli")
    p.add_argument("file", help="material file path, or identity|decoupled|random:SEED")
    p.set_defaults(func=cmd_material_check)

    p = sub.add_parser("simulate", help="run a configuration and write CSV/snapshot artifacts")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--config", required=True)
    p.add_argument("--suite", default=None,
                   choices=["constitutive", "identities", "decay", "influence",
                            "equipartition", "uniqueness", "all"])
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("decay-report", help="decay envelope report, optionally sweeping lambda")
    p.add_argument("--config", required=True)
    p.add_argument("--lambda-sweep", action="store_true")
    p.set_defaults(func=cmd_decay_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
