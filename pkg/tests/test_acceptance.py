"""Acceptance criteria, one test per criterion, at their stated tolerances.

Each criterion prints a single PASS/FAIL line (visible with ``pytest -s``;
also embedded in assertion messages).  The heavyweight verification suites
run once per module and are shared across the criterion tests.

Criteria:
  1  constitutive algebra on seeded random admissible materials/states
  2  stress-energy and traction bounds with ratio reporting
  3  energy conservation at CFL 0.5 with refinement factor >= 3
  4  integral-identity residual convergence at order >= 1.5
  5  measured front speeds below c (decoupled and fully coupled)
  6  surface-power positivity, monotonicity, and P = E agreement
  7  spatial decay envelopes for the lambda sweep
  8  uniqueness of the null solution and bit-exact determinism
  9  asymptotic equipartition in both boundary cases
 10  rigid-decomposition normalization residuals
"""

from __future__ import annotations

import pytest

from poromix import verify

SEED = 0


@pytest.fixture(scope="module")
def constitutive_report():
    return verify.suite_constitutive(SEED)



@pytest.fixture(scope="module")
def identities_report():
    return verify.suite_identities(SEED)


@pytest.fixture(scope="module")
def decay_report():
    return verify.suite_decay(SEED, tol_h=0.05)


@pytest.fixture(scope="module")
def influence_report():
    return verify.suite_influence(SEED)


@pytest.fixture(scope="module")
def equipartition_report():
    return verify.suite_equipartition(SEED)


@pytest.fixture(scope="module")
def uniqueness_report():
    return verify.suite_uniqueness(SEED)


def _criterion(number: int, label: str, report, names: list[str]) -> None:
    checks = {c.name: c for c in report.checks}
    missing = [n for n in names if n not in checks]
    assert not missing, f"criterion {number}: missing checks {missing}"
    selected = [checks[n] for n in names]
    ok = all(c.passed for c in selected)
    print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {label}")
    for c in selected:
        print(f"    {c.line()}")
    assert ok, f"criterion {number} failed:\n" + "\n".join(c.line() for c in selected)


def test_criterion_01_constitutive_algebra(constitutive_report):
    _criterion(
        1, "constitutive algebra on 10^4 seeded material/state pairs (< 10 s)",
        constitutive_report,
        ["eigen_envelope", "power_identity_static", "power_identity_rate",
         "dual_constitutive_forms", "runtime_constitutive"],
    )


def test_criterion_02_stress_energy_bounds(constitutive_report):
    _criterion(
        2, "stress-energy bound |S|^2 <= 2 xi_M W and traction bound (ratios reported)",
        constitutive_report,
        ["stress_energy_bound", "traction_bound"],
    )


def test_criterion_03_energy_conservation(identities_report):
    _criterion(
        3, "energy conservation <= 1e-4 over 2000 steps; drift shrinks >= 3x (< 30 s)",
        identities_report,
        ["energy_conservation", "energy_drift_refinement", "runtime_conservation"],
    )


def test_criterion_04_identity_residual_orders(identities_report):
    _criterion(
        4, "integral-identity residuals converge at order >= 1.5 over three levels",
        identities_report,
        ["order_res_energy_balance", "order_res_virial", "order_res_two_time"],
    )


def test_criterion_05_domain_of_influence(influence_report):
    _criterion(
        5, "front speed <= 1.05c (baseline) and <= 1.02c (refined), both materials",
        influence_report,
        ["front_speed_decoupled_base", "front_speed_decoupled_refined",
         "front_speed_coupled_base", "front_speed_coupled_refined",
         "pulse_speed_vs_analytic", "influence_quiet_zone"],
    )


def test_criterion_06_surface_power_structure(decay_report):
    _criterion(
        6, "P >= 0, non-increasing in r, P = E within 3% improving under refinement",
        decay_report,
        ["power_nonnegative", "power_monotone", "power_equals_energy",
         "power_equals_energy_refined"],
    )


def test_criterion_07_decay_envelopes(decay_report):
    _criterion(
        7, "P(r,t) <= P(0,t) exp(-lambda r/c) (1.05) for the lambda sweep",
        decay_report,
        ["decay_bound_lam_0.5", "decay_bound_lam_1", "decay_bound_lam_2",
         "radial_inequality"],
    )


def test_criterion_08_uniqueness_and_determinism(uniqueness_report):
    _criterion(
        8, "null data give the exactly null solution; runs are bit-identical",
        uniqueness_report,
        ["null_data_null_solution", "determinism"],
    )


def test_criterion_09_equipartition(equipartition_report):
    _criterion(
        9, "Cesàro equipartition: pinned-wall decay and all-traction offset (< 5 min)",
        equipartition_report,
        ["equipartition_gap_dirichlet", "equipartition_decay_exponent",
         "equipartition_rigid_exact", "equipartition_rigid_exact_2d",
         "equipartition_free_offset", "runtime_equipartition"],
    )


def test_criterion_10_rigid_decomposition(equipartition_report):
    _criterion(
        10, "rigid-decomposition residual moments <= 1e-10 scale on 100 seeded fields",
        equipartition_report,
        ["rigid_normalization"],
    )
