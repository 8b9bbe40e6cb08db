"""Verification suites: run simulations and check the theory's claims.

Each suite returns a :class:`VerifyReport` whose checks carry a measured
value, its bound/target, the tolerance, and a pass flag.  Tolerances are
fixed here, not calibrated at runtime.  Suites are deterministic for a
fixed seed; independent simulations inside a suite may run on worker
threads capped by the POROMIX_THREADS environment variable.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as diag
from .errors import Degenerate
from .materials import (
    MaterialConstants,
    assemble_quadratic_form,
    decoupled_material,
    elastic_moduli_bounds,
    random_material,
    reduced_constants,
    wave_speed,
    worst_stress_energy_ratio,
)
from .materials import validate_symmetries as pm_validate
from .pointwise import (
    PointState,
    generalized_stress,
    power_identity_residuals,
    reduced_generalized_stress,
    strain_vector,
    stress_magnitude,
    traction,
)
from .solver import (
    BoundaryPartition,
    Grid,
    InitialData,
    ProblemSpec,
    rigid_decompose,
    simulate,
)

SUITE_NAMES = ("constitutive", "identities", "decay", "influence", "equipartition", "uniqueness")


@dataclass(frozen=True)
class CheckResult:
    """One verified claim: measured value against its bound at a tolerance."""

    name: str
    claim: str
    measured: float
    target: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = (
            f"[{status}] {self.name}: measured {self.measured:.6g} "
            f"vs target {self.target:.6g} (tol {self.tol:.3g}) :: {self.claim}"
        )
        return out + (f" [{self.detail}]" if self.detail else "")


@dataclass
class VerifyReport:
    """All checks of one suite invocation."""

    suite: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def extend(self, other: "VerifyReport") -> None:
        self.checks.extend(other.checks)

    def to_text(self) -> str:
        lines = [c.line() for c in self.checks]
        lines.append(f"suite {self.suite}: {'PASS' if self.passed else 'FAIL'} "
                     f"({sum(c.passed for c in self.checks)}/{len(self.checks)} checks)")
        return "\n".join(lines)

    def to_csv_rows(self):
        yield ["name", "claim", "measured", "target", "tol", "passed"]
        for c in self.checks:
            yield [c.name, c.claim, "%.17g" % c.measured, "%.17g" % c.target,
                   "%.17g" % c.tol, str(int(c.passed))]


def worker_count() -> int:
    env = os.environ.get("POROMIX_THREADS", "")
    try:
        n = int(env)
    except ValueError:
        n = 0
    return max(1, n) if n else min(4, os.cpu_count() or 1)


def _parallel(jobs):
    """Run zero-arg callables, preserving order; thread cap from the env."""
    workers = worker_count()
    if workers == 1 or len(jobs) == 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# Shared scenario builders.
# ---------------------------------------------------------------------------


def _scalar_pulse(center, width, amplitude):
    c = np.asarray(center, dtype=float)

    def fn(x):
        r2 = sum((x[a] - c[a]) ** 2 for a in range(len(c)))
        return amplitude * np.exp(-r2 / (2.0 * width**2))

    return fn


def _vector_pulse(comp, center, width, amplitude):
    bump = _scalar_pulse(center, width, amplitude)

    def fn(x):
        out = np.zeros((3,) + x.shape[1:])
        out[comp] = bump(x)
        return out

    return fn


def _rigid_field(translation, rotation):
    t = np.asarray(translation, dtype=float)
    r = np.asarray(rotation, dtype=float)

    def fn(x):
        out = np.zeros((3,) + x.shape[1:])
        out[0] = t[0] + r[1] * x[2] - r[2] * x[1]
        out[1] = t[1] + r[2] * x[0] - r[0] * x[2]
        out[2] = t[2] + r[0] * x[1] - r[1] * x[0]
        return out

    return fn


def _sum_fields(*fns):
    fns = [f for f in fns if f is not None]
    if not fns:
        return None

    def fn(x):
        acc = fns[0](x)
        for f in fns[1:]:
            acc = acc + f(x)
        return acc

    return fn


def _random_states(rng: np.random.Generator, count: int):
    """Batch of random point states as stacked arrays."""
    return {
        "G1": rng.standard_normal((count, 3, 3)),
        "G2": rng.standard_normal((count, 3, 3)),
        "u1": rng.standard_normal((count, 3)),
        "u2": rng.standard_normal((count, 3)),
        "phi1": rng.standard_normal(count),
        "phi2": rng.standard_normal(count),
        "gp1": rng.standard_normal((count, 3)),
        "gp2": rng.standard_normal((count, 3)),
    }


def _point_state(batch, i) -> PointState:
    return PointState(
        grad_u1=batch["G1"][i],
        grad_u2=batch["G2"][i],
        u1=batch["u1"][i],
        u2=batch["u2"][i],
        phi1=float(batch["phi1"][i]),
        phi2=float(batch["phi2"][i]),
        grad_phi1=batch["gp1"][i],
        grad_phi2=batch["gp2"][i],
    )


# ---------------------------------------------------------------------------
# Suite: constitutive algebra.
# ---------------------------------------------------------------------------


def suite_constitutive(seed: int = 0, n_materials: int = 500, states_per: int = 20,
                       extra_consts: MaterialConstants | None = None) -> VerifyReport:
    """Pointwise algebra on seeded random admissible materials and states.

    Covers the eigen-bound envelope, the static/rate power identities, the
    dual constitutive forms, the stress-energy bound with its ratio report,
    and the traction bound.  ``extra_consts`` (e.g. the configured material)
    additionally gets the material-independent identity checks, plus an
    informational report of its operator stress-energy ratio; the bound
    itself is gated on the certified sampled family, where it is a theorem.
    """
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst_env = 0.0
    worst_static = 0.0
    worst_rate = 0.0
    worst_dual = 0.0
    worst_ok = 0.0
    worst_okok = 0.0
    worst_operator = 0.0
    for _ in range(n_materials):
        consts = random_material(rng)
        form = assemble_quadratic_form(consts)
        xi_min, xi_max = elastic_moduli_bounds(form)
        red = reduced_constants(consts, validate=False)
        worst_operator = max(worst_operator, worst_stress_energy_ratio(consts, form))
        batch = _random_states(rng, states_per)
        for i in range(states_per):
            ps = _point_state(batch, i)
            ps_dot = _point_state(batch, (i + 1) % states_per)
            ev = strain_vector(ps)
            two_w = float(ev.vec @ form.matrix @ ev.vec)
            n2 = float(ev.vec @ ev.vec)
            worst_env = max(
                worst_env,
                (xi_min * n2 - two_w) / (xi_max * n2),
                (two_w - xi_max * n2) / (xi_max * n2),
            )
            scale = 1.0 + n2
            r_static, r_rate = power_identity_residuals(consts, ps, ps_dot, form=form)
            worst_static = max(worst_static, r_static / scale)
            worst_rate = max(worst_rate, r_rate / scale)
            s_lit = generalized_stress(consts, ev, validate=False)
            s_red = reduced_generalized_stress(consts, red, ps)
            dual = max(
                float(np.max(np.abs(s_lit.S1 - s_red.S1))),
                float(np.max(np.abs(s_lit.S2 - s_red.S2))),
                abs(s_lit.g1 - s_red.g1),
                abs(s_lit.g2 - s_red.g2),
                float(np.max(np.abs(s_lit.p - s_red.p))),
                float(np.max(np.abs(s_lit.h1 - s_red.h1))),
                float(np.max(np.abs(s_lit.h2 - s_red.h2))),
            )
            worst_dual = max(worst_dual, dual / (1.0 + np.sqrt(n2)))
            smag2 = stress_magnitude(s_lit) ** 2
            if two_w > 0:
                worst_ok = max(worst_ok, smag2 / (2.0 * xi_max * 0.5 * two_w))
            nrm = rng.standard_normal(3)
            nrm /= np.linalg.norm(nrm)
            tr = traction(s_lit, nrm)
            lhs = float(tr.s1 @ tr.s1 + tr.s2 @ tr.s2 + tr.h1**2 + tr.h2**2)
            if smag2 > 0:
                worst_okok = max(worst_okok, lhs / smag2)
    elapsed = time.perf_counter() - t0
    rep = VerifyReport(suite="constitutive")
    rep.checks += [
        CheckResult("eigen_envelope", "xi_min|E|^2 <= 2W <= xi_max|E|^2",
                    worst_env, 0.0, 1e-9, worst_env <= 1e-9),
        CheckResult("power_identity_static", "2W equals the stress power pairing",
                    worst_static, 0.0, 1e-10, worst_static <= 1e-10),
        CheckResult("power_identity_rate", "dW/dt equals the stress power pairing",
                    worst_rate, 0.0, 1e-10, worst_rate <= 1e-10),
        CheckResult("dual_constitutive_forms", "strain-measure and gradient forms agree",
                    worst_dual, 0.0, 1e-12, worst_dual <= 1e-12),
        CheckResult("stress_energy_bound", "|S|^2 <= 2 xi_max W (state-sampled max ratio)",
                    worst_ok, 1.0, 1e-9, worst_ok <= 1.0 + 1e-9,
                    detail=f"operator bound {worst_operator:.12g}"),
        CheckResult("traction_bound", "sum(s.s + h^2) <= |S|^2",
                    worst_okok, 1.0, 1e-12, worst_okok <= 1.0 + 1e-12),
        CheckResult("runtime_constitutive", "constitutive sweep wall time (s)",
                    elapsed, 10.0, 0.0, elapsed < 10.0),
    ]
    if worst_ok > 1.0 + 1e-9:
        rep.checks.append(CheckResult(
            "stress_energy_violation_log",
            "ratio above 1+1e-9 logged verbatim for the bookkeeping question",
            worst_ok, 1.0, 1e-9, False,
            detail=f"max |S|^2/(2 xi_max W) = {worst_ok!r}",
        ))
    if extra_consts is not None:
        form_x = assemble_quadratic_form(extra_consts)
        red_x = reduced_constants(extra_consts, validate=False)
        batch = _random_states(rng, states_per)
        worst_id = 0.0
        worst_dual_x = 0.0
        for i in range(states_per):
            ps = _point_state(batch, i)
            ps_dot = _point_state(batch, (i + 1) % states_per)
            ev = strain_vector(ps)
            scale = 1.0 + float(ev.vec @ ev.vec)
            r_static, r_rate = power_identity_residuals(extra_consts, ps, ps_dot, form=form_x)
            worst_id = max(worst_id, r_static / scale, r_rate / scale)
            s_lit = generalized_stress(extra_consts, ev, validate=False)
            s_red = reduced_generalized_stress(extra_consts, red_x, ps)
            worst_dual_x = max(
                worst_dual_x,
                float(np.max(np.abs(s_lit.S1 - s_red.S1))) / scale,
                float(np.max(np.abs(s_lit.S2 - s_red.S2))) / scale,
            )
        ratio_x = worst_stress_energy_ratio(extra_consts, form_x)
        rep.checks += [
            CheckResult("config_material_symmetries", "configured material relations hold",
                        0.0 if pm_validate(extra_consts).ok else 1.0, 0.0, 0.0,
                        pm_validate(extra_consts).ok),
            CheckResult("config_material_identities",
                        "power identities and dual forms on the configured material",
                        max(worst_id, worst_dual_x), 0.0, 1e-10,
                        max(worst_id, worst_dual_x) <= 1e-10),
            CheckResult("config_material_ok_ratio",
                        "operator stress-energy ratio of the configured material (reported)",
                        ratio_x, 1.0, 1e-9, True,
                        detail=("logged: ratio above 1+1e-9 = " + repr(ratio_x))
                        if ratio_x > 1.0 + 1e-9 else ""),
        ]
    return rep


# ---------------------------------------------------------------------------
# Suite: conservation and integral identities.
# ---------------------------------------------------------------------------


def conservation_problem(seed: int, n: int = 400, cfl: float = 0.5) -> ProblemSpec:
    """1-D coupled pulse run with traction-free walls (conserved energy)."""
    consts = random_material(seed)
    grid = Grid(dim=1, n=(n,), h=(1.0 / (n - 1),))
    boundary = BoundaryPartition.uniform("natural", "natural", dim=1)
    width = 0.06
    initial = InitialData(
        u1=_vector_pulse(0, [0.45], width, 1.0),
        u2=_vector_pulse(1, [0.55], width, 0.7),
        v1=_vector_pulse(2, [0.5], width, 0.4),
        phi1=_scalar_pulse([0.5], width, 0.5),
        psi2=_scalar_pulse([0.42], width, 0.3),
    )
    return ProblemSpec(grid=grid, consts=consts, boundary=boundary, initial=initial,
                       cfl=cfl, T=1.0)


def _drift_run(seed: int, n: int, steps: int):
    problem = conservation_problem(seed, n=n)
    speed = problem.speed()
    dt = 0.5 * min(problem.grid.h) / speed.c
    problem = ProblemSpec(
        grid=problem.grid, consts=problem.consts, boundary=problem.boundary,
        initial=problem.initial, cfl=problem.cfl, T=steps * dt,
    )
    ctx = diag.RunContext(problem)
    erec = diag.EnergyRecorder(ctx, every=10)
    simulate(problem, recorders=(erec,), n_steps=steps)
    return erec.series().max_relative_drift()


def suite_identities(seed: int = 0) -> VerifyReport:
    """Energy conservation with refinement, plus identity-residual orders."""
    rep = VerifyReport(suite="identities")
    t0 = time.perf_counter()
    drift_base, drift_fine = _parallel([
        lambda: _drift_run(seed, 400, 2000),
        lambda: _drift_run(seed, 799, 4000),
    ])
    elapsed = time.perf_counter() - t0
    rep.checks += [
        CheckResult("energy_conservation", "relative energy drift over 2000 steps",
                    drift_base, 1e-4, 0.0, drift_base <= 1e-4),
        CheckResult("energy_drift_refinement", "drift shrinks >= 3x under (h,dt)/2",
                    drift_base / max(drift_fine, 1e-300), 3.0, 0.0,
                    drift_base >= 3.0 * drift_fine),
        CheckResult("runtime_conservation", "conservation runs wall time (s)",
                    elapsed, 30.0, 0.0, elapsed < 30.0),
    ]

    consts = random_material(seed + 1)
    lam = 1.0
    T = 0.25
    form = assemble_quadratic_form(consts)
    _, xi_max = elastic_moduli_bounds(form)
    c = wave_speed(consts, xi_max, lam).c
    n0 = 100
    base_steps = int(np.ceil(T * c / (0.45 * (1.0 / n0)))) + 1

    def residual_run(level: int):
        n = n0 * 2**level + 1
        grid = Grid(dim=1, n=(n,), h=(1.0 / (n - 1),))
        initial = InitialData(
            u1=_vector_pulse(0, [0.5], 0.07, 1.0),
            v2=_vector_pulse(1, [0.45], 0.07, 0.6),
            phi2=_scalar_pulse([0.55], 0.07, 0.5),
        )
        problem = ProblemSpec(
            grid=grid, consts=consts, lam=lam,
            boundary=BoundaryPartition.uniform("natural", "natural", dim=1),
            initial=initial, T=T,
        )
        _, _, traj = diag.record_run(problem, energy_every=10**9,
                                     snapshot_every=2,
                                     n_steps=base_steps * 2**level)
        ir = diag.identity_residuals(traj, lam)
        return (
            float(np.max(ir.res_energy_balance)),
            float(np.max(ir.res_virial)),
            float(np.max(ir.res_two_time)),
            ir.scale,
        )

    levels = _parallel([lambda lv=lv: residual_run(lv) for lv in range(3)])
    names = ("res_energy_balance", "res_virial", "res_two_time")
    for i, name in enumerate(names):
        r = [levels[lv][i] for lv in range(3)]
        scale = max(levels[lv][3] for lv in range(3))
        if max(r) <= 1e-13 * scale:
            # Residual is roundoff-limited at every level; the identity holds
            # exactly in the discrete system, which is stronger than any order.
            rep.checks.append(CheckResult(
                f"order_{name}", "identity residual converges (roundoff-limited)",
                max(r) / scale, 0.0, 1e-13, True,
                detail=f"residuals {r[0]:.3e} -> {r[1]:.3e} -> {r[2]:.3e}",
            ))
            continue
        orders = [np.log2(r[j] / max(r[j + 1], 1e-300)) for j in range(2)]
        measured = float(np.mean(orders))
        rep.checks.append(CheckResult(
            f"order_{name}", "identity residual converges at order >= 1.5",
            measured, 1.5, 0.0, measured >= 1.5,
            detail=f"residuals {r[0]:.3e} -> {r[1]:.3e} -> {r[2]:.3e}",
        ))
    return rep


# ---------------------------------------------------------------------------
# Suite: surface power structure and spatial decay.
# ---------------------------------------------------------------------------


def _pulse_trajectory(consts: MaterialConstants, n: int, lam: float, width: float = 0.02,
                      cadence: int = 2):
    grid = Grid(dim=1, n=(n,), h=(1.0 / (n - 1),))
    initial = InitialData(
        u1=_vector_pulse(0, [0.5], width, 1.0),
        v1=_vector_pulse(0, [0.5], width, 0.5),
        phi1=_scalar_pulse([0.5], width, 0.4),
    )
    problem = ProblemSpec(
        grid=grid, consts=consts, lam=lam,
        boundary=BoundaryPartition.uniform("natural", "natural", dim=1),
        initial=initial, T=0.0, cfl=0.5,
    )
    speed = problem.speed()
    geom = diag.support_geometry(problem)
    t_total = 0.85 * geom.L / speed.c
    dt = 0.5 * min(grid.h) / speed.c
    steps = int(np.ceil(t_total / (cadence * dt))) * cadence
    problem = ProblemSpec(
        grid=grid, consts=consts, lam=lam, boundary=problem.boundary,
        initial=initial, T=steps * dt, cfl=0.5,
    )
    _, _, traj = diag.record_run(problem, energy_every=10**9, snapshot_every=cadence,
                                 n_steps=steps)
    return problem, geom, traj, speed


def _power_error(sps, floor: float = 1e-2) -> float:
    """Worst relative |P − E| where E carries at least ``floor`` of its peak."""
    ref = float(np.max(np.abs(sps.E_vol)))
    sel = np.abs(sps.E_vol) > floor * ref
    if not sel.any():
        return 0.0
    return float(np.max(np.abs(sps.P[sel] - sps.E_vol[sel]) / np.abs(sps.E_vol[sel])))


def suite_decay(seed: int = 0, tol_h: float = 0.05) -> VerifyReport:
    """Surface-power positivity/monotonicity, P = E agreement, decay bounds."""
    rep = VerifyReport(suite="decay")
    consts = random_material(seed + 2)

    def run(n, cadence):
        problem, geom, traj, speed = _pulse_trajectory(consts, n, lam=1.0, cadence=cadence)
        r_grid = diag.default_r_grid(geom, count=28)
        ctx = diag.RunContext(problem)
        sps = diag.surface_power(traj, geom, r_grid, lam=1.0, ctx=ctx)
        return problem, geom, traj, speed, r_grid, ctx, sps

    (base, fine) = _parallel([lambda: run(401, 2), lambda: run(801, 4)])
    problem, geom, traj, speed, r_grid, ctx, sps = base
    p_ref = max(float(sps.P[0, -1]), 1e-300)

    worst_neg = float(np.min(sps.P)) / p_ref
    rep.checks.append(CheckResult(
        "power_nonnegative", "P(r,t) >= -1e-9 * P(0,T)",
        worst_neg, 0.0, 1e-9, worst_neg >= -1e-9))
    mono = float(np.max(np.diff(sps.P, axis=0))) / p_ref
    rep.checks.append(CheckResult(
        "power_monotone", "P non-increasing in r (discretization tolerance)",
        mono, 0.0, 1e-6, mono <= 1e-6))

    err_base = _power_error(sps)
    err_fine = _power_error(fine[6])
    rep.checks += [
        CheckResult("power_equals_energy", "P(r,t) = E(r,t) within 3% relative",
                    err_base, 0.03, 0.0, err_base <= 0.03),
        CheckResult("power_equals_energy_refined", "P = E error improves under refinement",
                    err_fine, err_base, 0.0, err_fine < err_base),
    ]

    # Discrete radial differential inequality (lambda/c)|P| + dP/dr <= tol,
    # with forward differences between consecutive distinct interface radii.
    dr = np.diff(sps.r_grid)[:, None]
    lhs = (sps.lam / speed.c) * np.abs(sps.P[:-1]) + np.diff(sps.P, axis=0) / dr
    sel = sps.P[0] > 1e-8 * p_ref
    viol = float(np.max(lhs[:, sel])) / ((sps.lam / speed.c) * p_ref)
    rep.checks.append(CheckResult(
        "radial_inequality", "(lambda/c)|P| + dP/dr <= tol_h at interior radii",
        viol, tol_h, 0.0, viol <= tol_h))

    # Decay envelopes for the lambda sweep.
    length = problem.grid.extent()[0]
    for mult in (0.5, 1.0, 2.0):
        lam = mult * speed.c / length
        sps_l = diag.surface_power(traj, geom, r_grid, lam=lam, ctx=ctx)
        speed_l = wave_speed(consts, speed.c**2 * speed.m_inertia, lam)
        p0 = sps_l.P[0]
        t_sel = np.where(p0 > 1e-8 * max(np.max(p0), 1e-300))[0]
        worst_ratio = 0.0
        for j in t_sel:
            try:
                drep = diag.decay_report(sps_l, speed_l, t=float(sps_l.t_grid[j]), tol_h=tol_h)
            except Degenerate:
                continue
            worst_ratio = max(worst_ratio, drep.max_bound_ratio)
        rep.checks.append(CheckResult(
            f"decay_bound_lam_{mult:g}",
            "P(r,t) <= P(0,t) exp(-lambda r / c) (1 + tol_h) on 0 <= r <= ct",
            worst_ratio, 1.0, tol_h, 0.0 < worst_ratio <= 1.0))
    return rep


# ---------------------------------------------------------------------------
# Suite: domain of influence (front speed).
# ---------------------------------------------------------------------------


def _fast_mode_initial(consts: MaterialConstants, width: float, center: float):
    """Single right-going fast-mode pulse of the 1-D longitudinal pair."""
    red = reduced_constants(consts, validate=False)
    kmat = np.array([
        [red.a[0, 0, 0, 0] / consts.rho1, red.b[0, 0, 0, 0] / consts.rho1],
        [red.b[0, 0, 0, 0] / consts.rho2, red.d[0, 0, 0, 0] / consts.rho2],
    ])
    eigvals, eigvecs = np.linalg.eig(kmat)
    fast = int(np.argmax(eigvals.real))
    v_fast = float(np.sqrt(eigvals.real[fast]))
    mode = eigvecs[:, fast].real
    mode /= np.max(np.abs(mode))

    def bump(x):
        return np.exp(-((x[0] - center) ** 2) / (2.0 * width**2))

    def dbump(x):
        return -(x[0] - center) / width**2 * bump(x)

    def u1(x):
        out = np.zeros((3,) + x.shape[1:])
        out[0] = mode[0] * bump(x)
        return out

    def u2(x):
        out = np.zeros((3,) + x.shape[1:])
        out[0] = mode[1] * bump(x)
        return out

    def v1(x):
        out = np.zeros((3,) + x.shape[1:])
        out[0] = -v_fast * mode[0] * dbump(x)
        return out

    def v2(x):
        out = np.zeros((3,) + x.shape[1:])
        out[0] = -v_fast * mode[1] * dbump(x)
        return out

    return InitialData(u1=u1, u2=u2, v1=v1, v2=v2), v_fast


def _peak_speed(traj) -> float:
    """Slope of the u1 pulse-peak trajectory (parabolic sub-cell refinement)."""
    grid = traj.problem.grid
    xs = grid.axes()[0]
    ts, peaks = [], []
    for state in traj.states:
        prof = np.abs(state.u1[0])
        k = int(np.argmax(prof))
        if 0 < k < len(xs) - 1:
            denom = prof[k - 1] - 2 * prof[k] + prof[k + 1]
            shift = 0.5 * (prof[k - 1] - prof[k + 1]) / denom if denom != 0 else 0.0
            ts.append(state.t)
            peaks.append(xs[k] + shift * grid.h[0])
    return float(np.polyfit(ts, peaks, 1)[0])


def _front_run(consts: MaterialConstants, n: int, threshold: float = 1e-6,
               fast_mode: bool = True):
    grid = Grid(dim=1, n=(n,), h=(1.0 / (n - 1),))
    width = 0.02
    if fast_mode:
        initial, v_analytic = _fast_mode_initial(consts, width, 0.5)
    else:
        initial = InitialData(
            u1=_vector_pulse(0, [0.5], width, 1.0),
            v2=_vector_pulse(0, [0.5], width, 0.5),
            phi1=_scalar_pulse([0.5], width, 0.4),
        )
        v_analytic = None
    problem = ProblemSpec(
        grid=grid, consts=consts,
        boundary=BoundaryPartition.uniform("natural", "natural", dim=1),
        initial=initial, T=0.0,
    )
    speed = problem.speed()
    geom = diag.support_geometry(problem)
    t_total = 0.8 * geom.L / speed.c
    problem = ProblemSpec(
        grid=grid, consts=consts, boundary=problem.boundary,
        initial=initial, T=t_total, cfl=0.5,
    )
    _, _, traj = diag.record_run(problem, energy_every=10**9, snapshot_every=4)
    front = diag.front_speed(traj, geom, threshold=threshold)
    v_peak = _peak_speed(traj) if fast_mode else None
    return front.speed, speed.c, v_analytic, traj, geom, v_peak


def suite_influence(seed: int = 0) -> VerifyReport:
    """Front speed stays below c for decoupled and fully coupled materials."""
    rep = VerifyReport(suite="influence")
    dec = decoupled_material()
    cpl = random_material(seed + 3)
    results = _parallel([
        lambda: _front_run(dec, 201),
        lambda: _front_run(dec, 401),
        lambda: _front_run(cpl, 201, fast_mode=False),
        lambda: _front_run(cpl, 401, fast_mode=False),
    ])
    labels = ("decoupled_base", "decoupled_refined", "coupled_base", "coupled_refined")
    tols = (1.05, 1.02, 1.05, 1.02)
    for (measured, c, v_analytic, traj, geom, v_peak), label, tol in zip(results, labels, tols):
        rep.checks.append(CheckResult(
            f"front_speed_{label}", "measured front speed <= c * tol",
            measured / c, tol, 0.0, measured <= c * tol))
    measured, c, v_analytic, traj, geom, v_peak = results[1]
    rep.checks.append(CheckResult(
        "pulse_speed_vs_analytic", "decoupled pulse-peak speed within 2% of the mode speed",
        abs(v_peak - v_analytic) / v_analytic, 0.02, 0.0,
        abs(v_peak - v_analytic) <= 0.02 * v_analytic))

    # Quiet zone beyond r = c t at the final time.
    state = traj.states[-1]

    def state_mag(s):
        return np.sqrt(
            np.einsum("i...,i...->...", s.u1, s.u1)
            + np.einsum("i...,i...->...", s.u2, s.u2)
            + s.phi1**2 + s.phi2**2
        )

    mag = state_mag(state)
    peak = max(float(np.max(state_mag(s))) for s in traj.states)
    margin = 8 * traj.problem.grid.h[0]
    quiet = geom.dist > c * state.t + margin
    leak = float(np.max(mag[quiet])) / peak if quiet.any() else 0.0
    rep.checks.append(CheckResult(
        "influence_quiet_zone", "state magnitude beyond r = c t is <= 1e-8 of peak",
        leak, 0.0, 1e-8, leak <= 1e-8))
    return rep


# ---------------------------------------------------------------------------
# Suite: equipartition and rigid decomposition.
# ---------------------------------------------------------------------------


def _transits(problem: ProblemSpec, count: float) -> float:
    speed = problem.speed()
    return count * problem.grid.extent()[0] / speed.c


def _equipartition_case_i(seed: int):
    consts = random_material(seed + 4)
    n = 201
    grid = Grid(dim=1, n=(n,), h=(1.0 / (n - 1),))
    initial = InitialData(
        u1=_vector_pulse(0, [0.5], 0.05, 1.0),
        u2=_vector_pulse(1, [0.4], 0.05, 0.6),
        phi1=_scalar_pulse([0.6], 0.05, 0.5),
    )
    problem = ProblemSpec(
        grid=grid, consts=consts,
        boundary=BoundaryPartition.uniform("dirichlet", "dirichlet", dim=1),
        initial=initial, T=1.0, cfl=0.5,
    )
    problem = ProblemSpec(
        grid=grid, consts=consts, boundary=problem.boundary, initial=initial,
        T=_transits(problem, 50.0), cfl=0.5,
    )
    ctx = diag.RunContext(problem)
    erec = diag.EnergyRecorder(ctx, every=4)
    simulate(problem, recorders=(erec,))
    series = erec.series()
    return diag.equipartition_report(series, problem)


def _odd_pulse(comp, center, width, amplitude):
    """Odd-about-center profile on one vector component: zero mean, and with
    the component along the grid axis, zero moment of momentum as well."""

    def fn(x):
        out = np.zeros((3,) + x.shape[1:])
        s = (x[0] - center) / width
        out[comp] = amplitude * s * np.exp(-0.5 * s * s)
        return out

    return fn


def _equipartition_case_ii(seed: int, scenario: str):
    """All-traction boundary scenarios.

    'pure': common translation velocity, 1-D (an exact zero-strain drift).
    'rotation2d': common translation + in-plane rotation on a 2-D grid (the
        rotational zero mode the sampled kinematics actually has; rotations
        out of the sampled plane carry strain through the unsampled
        coordinates and are ordinary oscillating modes).
    'mixed': 1-D translation drift plus per-constituent residuals that are
        odd in x on the axial component, so each constituent's rigid fit is
        exactly the common translation.
    """
    consts = random_material(seed + 5)
    if scenario == "rotation2d":
        n = (25, 25)
        grid = Grid(dim=2, n=n, h=(1.0 / (n[0] - 1), 1.0 / (n[1] - 1)))
        rigid_v = _rigid_field([0.3, 0.1, 0.05], [0.0, 0.0, 0.4])
        extra = InitialData(v1=rigid_v, v2=rigid_v)
        transits = 5.0
    elif scenario == "pure":
        grid = Grid(dim=1, n=(201,), h=(1.0 / 200.0,))
        rigid_v = _rigid_field([0.3, 0.1, 0.2], [0.0, 0.0, 0.0])
        extra = InitialData(v1=rigid_v, v2=rigid_v)
        transits = 5.0
    else:
        grid = Grid(dim=1, n=(201,), h=(1.0 / 200.0,))
        rigid_v = _rigid_field([0.3, 0.1, 0.0], [0.0, 0.0, 0.0])
        extra = InitialData(
            v1=_sum_fields(rigid_v, _odd_pulse(0, 0.5, 0.04, 0.5)),
            v2=_sum_fields(rigid_v, _odd_pulse(0, 0.45, 0.04, 0.4)),
            phi1=_scalar_pulse([0.55] * grid.dim, 0.05, 0.2),
        )
        transits = 50.0
    boundary = BoundaryPartition.uniform("natural", "natural", dim=grid.dim)
    problem = ProblemSpec(grid=grid, consts=consts, boundary=boundary,
                          initial=extra, T=1.0, cfl=0.5)
    from .solver import initialize

    state0 = initialize(problem)
    rigid = rigid_decompose(state0.u1, state0.v1, state0.u2, state0.v2, consts, grid)
    problem = ProblemSpec(
        grid=grid, consts=consts, boundary=boundary, initial=extra,
        T=_transits(problem, transits), cfl=0.5,
    )
    ctx = diag.RunContext(problem)
    erec = diag.EnergyRecorder(ctx, every=4)
    simulate(problem, recorders=(erec,))
    series = erec.series()
    return diag.equipartition_report(series, problem, rigid=rigid)


def suite_equipartition(seed: int = 0) -> VerifyReport:
    """Cesàro equipartition in both boundary cases, plus rigid normalization."""
    rep = VerifyReport(suite="equipartition")
    t0 = time.perf_counter()
    rep_i, rep_pure, rep_rot, rep_mixed = _parallel([
        lambda: _equipartition_case_i(seed),
        lambda: _equipartition_case_ii(seed, "pure"),
        lambda: _equipartition_case_ii(seed, "rotation2d"),
        lambda: _equipartition_case_ii(seed, "mixed"),
    ])
    elapsed = time.perf_counter() - t0
    rep.checks += [
        CheckResult("equipartition_gap_dirichlet", "|Kc - Sc| / E0 at T = 50 transits",
                    abs(rep_i.gap_final) / rep_i.E0, 5e-2, 0.0,
                    abs(rep_i.gap_final) <= 5e-2 * rep_i.E0),
        CheckResult("equipartition_decay_exponent", "gap envelope decays like t^p, p <= -0.8",
                    rep_i.fit_exponent, -0.8, 0.0, rep_i.fit_exponent <= -0.8),
        CheckResult("equipartition_rigid_exact", "pure rigid drift: gap equals the offset",
                    abs(rep_pure.gap_final - rep_pure.predicted_offset) / rep_pure.E0,
                    0.0, 1e-9,
                    abs(rep_pure.gap_final - rep_pure.predicted_offset) <= 1e-9 * rep_pure.E0),
        CheckResult("equipartition_rigid_exact_2d",
                    "pure rigid drift with in-plane rotation (2-D): gap equals the offset",
                    abs(rep_rot.gap_final - rep_rot.predicted_offset) / rep_rot.E0,
                    0.0, 1e-9,
                    abs(rep_rot.gap_final - rep_rot.predicted_offset) <= 1e-9 * rep_rot.E0),
        CheckResult("equipartition_free_offset", "|gap(T) - rigid kinetic offset| <= 5e-2 E0",
                    abs(rep_mixed.gap_final - rep_mixed.predicted_offset) / rep_mixed.E0,
                    5e-2, 0.0,
                    abs(rep_mixed.gap_final - rep_mixed.predicted_offset) <= 5e-2 * rep_mixed.E0),
        CheckResult("runtime_equipartition", "equipartition suite wall time (s)",
                    elapsed, 300.0, 0.0, elapsed < 300.0),
    ]

    rng = np.random.default_rng(seed + 6)
    worst = 0.0
    for k in range(100):
        dim = 1 if k % 2 == 0 else 2
        if dim == 1:
            grid = Grid(dim=1, n=(int(rng.integers(16, 64)),), h=(float(rng.uniform(0.01, 0.1)),))
        else:
            grid = Grid(dim=2, n=(int(rng.integers(8, 20)), int(rng.integers(8, 20))),
                        h=(float(rng.uniform(0.02, 0.1)), float(rng.uniform(0.02, 0.1))))
        consts = random_material(rng, certify=False)
        shape = grid.shape
        fld = lambda: rng.standard_normal((3,) + shape)
        dec = rigid_decompose(fld(), fld(), fld(), fld(), consts, grid)
        worst = max(worst, dec.worst_residual_moment)
    rep.checks.append(CheckResult(
        "rigid_normalization", "residual momenta/moments below 1e-10 of scale",
        worst, 0.0, 1e-10, worst <= 1e-10))
    return rep


# ---------------------------------------------------------------------------
# Suite: uniqueness / determinism.
# ---------------------------------------------------------------------------


def suite_uniqueness(seed: int = 0) -> VerifyReport:
    """Null data stay exactly null; identical runs are bit-identical."""
    rep = VerifyReport(suite="uniqueness")
    consts = random_material(seed + 7)
    grid = Grid(dim=1, n=(201,), h=(1.0 / 200.0,))
    problem = ProblemSpec(
        grid=grid, consts=consts,
        boundary=BoundaryPartition.uniform("dirichlet", "natural", dim=1),
        initial=InitialData(), T=1.0, cfl=0.5,
    )
    final = simulate(problem, n_steps=1000)
    rep.checks.append(CheckResult(
        "null_data_null_solution", "max |state| after 1000 steps from null data",
        final.max_abs(), 0.0, 0.0, final.max_abs() == 0.0))

    pulse = ProblemSpec(
        grid=grid, consts=consts, boundary=problem.boundary,
        initial=InitialData(u1=_vector_pulse(0, [0.5], 0.05, 1.0)),
        T=0.05, cfl=0.5,
    )

    def run_bytes():
        ctx = diag.RunContext(pulse)
        erec = diag.EnergyRecorder(ctx, every=1)
        final = simulate(pulse, recorders=(erec,))
        series = erec.series()
        blob = series.t.tobytes() + series.total.tobytes() + final.u1.tobytes()
        return blob

    same = run_bytes() == run_bytes()
    rep.checks.append(CheckResult(
        "determinism", "identical configurations produce bit-identical output",
        1.0 if same else 0.0, 1.0, 0.0, same))
    return rep


SUITE_FUNCS = {
    "constitutive": suite_constitutive,
    "identities": suite_identities,
    "decay": suite_decay,
    "influence": suite_influence,
    "equipartition": suite_equipartition,
    "uniqueness": suite_uniqueness,
}


def run_suite(name: str, seed: int = 0, tol_h: float = 0.05,
              config_consts: MaterialConstants | None = None) -> VerifyReport:
    """Run one named suite (or 'all'), returning the merged report."""
    if name == "all":
        merged = VerifyReport(suite="all")
        for sub in SUITE_NAMES:
            merged.extend(run_suite(sub, seed=seed, tol_h=tol_h, config_consts=config_consts))
        return merged
    if name not in SUITE_FUNCS:
        raise ValueError(f"unknown suite {name!r}")
    if name == "decay":
        return suite_decay(seed=seed, tol_h=tol_h)
    if name == "constitutive":
        return suite_constitutive(seed=seed, extra_consts=config_consts)
    return SUITE_FUNCS[name](seed=seed)
