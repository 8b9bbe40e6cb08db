"""Simulator and verification harness for binary porous elastic mixtures.

Layout:
    materials    constitutive constants, the 29×29 quadratic form, moduli, speed
    pointwise    per-point kinematics, stresses, tractions, power identities
    fields       vectorized strain/stress evaluation on grids
    solver       explicit leapfrog integration with mixed boundary conditions
    diagnostics  energy, surface power, decay/front reports, Cesàro means
    verify       theorem-verification suites
    config, cli  run configuration and the command-line entry points
"""

from .materials import (
    MaterialConstants,
    QuadraticForm,
    ReducedConstants,
    SpeedParams,
    assemble_quadratic_form,
    decoupled_material,
    elastic_moduli_bounds,
    identity_material,
    load_material,
    random_material,
    reduced_constants,
    save_material,
    validate_symmetries,
    wave_speed,
)
from .pointwise import (
    GeneralizedStress,
    PointState,
    StrainVector,
    TractionSample,
    generalized_stress,
    internal_energy_density,
    power_identity_residuals,
    strain_magnitude,
    strain_vector,
    stress_magnitude,
    traction,
)
from .solver import (
    BoundaryPartition,
    Grid,
    InitialData,
    ProblemSpec,
    RigidDecomposition,
    SideCondition,
    StateField,
    initialize,
    rigid_decompose,
    simulate,
    stable_timestep,
    step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
