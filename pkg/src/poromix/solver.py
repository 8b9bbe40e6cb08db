"""Explicit integration of the mixture equations of motion.

Scheme: collocated uniform grid, second-order differences in space, leapfrog
(kick-drift-kick) in time.  The spatial force is assembled as the exact
gradient of the discrete stored energy  Σ_k w_k W(E_k(U))  with trapezoid
node weights w, so the semi-discrete operator is exactly symmetric and the
discrete energy has bounded O(dt²) oscillation instead of secular drift.
Natural boundary conditions enter variationally (one-sided boundary strain
stencils plus a boundary-work term for prescribed tractions); Dirichlet
conditions pin nodal values.  Balance laws integrated per constituent α::

    ρᵅ üᵅ_i   = Sᵅ_ji,j + (−1)ᵅ p_i + ρᵅ fᵅ_i
    ρᵅ χᵅ φ̈ᵅ = hᵅ_i,i + gᵅ + ρᵅ ℓᵅ
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParameter, NonFinite, SingularInertia
from .fields import StressEvaluator, gradient_adjoint, strain_fields
from .materials import (
    MaterialConstants,
    SpeedParams,
    assemble_quadratic_form,
    elastic_moduli_bounds,
    wave_speed,
)

AXIS_NAMES = ("x", "y")


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian grid with nodes on the domain boundary.

    ``dim`` spatial axes are sampled (1 or 2); fields are independent of the
    unsampled coordinates but all vectors/tensors stay 3-D.
    """

    dim: int
    n: tuple[int, ...]
    h: tuple[float, ...]
    origin: tuple[float, ...] = ()

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidParameter(f"dim must be 1 or 2, got {self.dim}")
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        h = tuple(float(v) for v in np.atleast_1d(self.h))
        origin = tuple(float(v) for v in np.atleast_1d(self.origin)) if self.origin else (0.0,) * self.dim
        if len(n) != self.dim or len(h) != self.dim or len(origin) != self.dim:
            raise InvalidParameter("n, h, origin must each have one entry per dimension")
        if any(v < 4 for v in n):
            raise InvalidParameter("need at least 4 nodes per sampled dimension")
        if any(v <= 0.0 for v in h):
            raise InvalidParameter("grid spacing must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "origin", origin)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    def axes(self) -> list[np.ndarray]:
        return [self.origin[a] + self.h[a] * np.arange(self.n[a]) for a in range(self.dim)]

    def positions(self) -> np.ndarray:
        """Node coordinates as a (3, *shape) array; unsampled coords are 0."""
        x = np.zeros((3,) + self.shape)
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        for a in range(self.dim):
            x[a] = mesh[a]
        return x

    def weights(self) -> np.ndarray:
        """Trapezoid quadrature node weights (volume measure)."""
        w = np.ones(self.shape)
        for a in range(self.dim):
            tw = np.ones(self.n[a])
            tw[0] = tw[-1] = 0.5
            shape = [1] * self.dim
            shape[a] = self.n[a]
            w = w * (self.h[a] * tw).reshape(shape)
        return w

    def extent(self) -> tuple[float, ...]:
        return tuple((self.n[a] - 1) * self.h[a] for a in range(self.dim))

    @property
    def diameter(self) -> float:
        return float(np.sqrt(sum(e * e for e in self.extent())))

    def sides(self) -> list[tuple[int, int]]:
        return [(a, end) for a in range(self.dim) for end in (0, 1)]

    def side_slicer(self, axis: int, end: int) -> tuple:
        idx = [slice(None)] * self.dim
        idx[axis] = 0 if end == 0 else -1
        return tuple(idx)

    def side_weights(self, axis: int) -> np.ndarray:
        """Boundary (surface) quadrature weights over the transverse axes."""
        if self.dim == 1:
            return np.ones(())
        other = 1 - axis
        tw = np.ones(self.n[other])
        tw[0] = tw[-1] = 0.5
        return self.h[other] * tw


@dataclass(frozen=True)
class SideCondition:
    """Boundary condition on one grid side for one field family.

    kind "dirichlet": values pinned (``value(x)`` static, or homogeneous 0).
    kind "natural": traction/flux prescribed (``value(x, t)``, default 0).
    """

    kind: str
    value: Callable | None = None

    def __post_init__(self):
        if self.kind not in ("dirichlet", "natural"):
            raise InvalidParameter(f"unknown boundary kind {self.kind!r}")


@dataclass(frozen=True)
class BoundaryPartition:
    """Per-side conditions for the displacement and volume-fraction families.

    One partition applies to both constituents of a family.  A node covered
    by any Dirichlet side is pinned (Dirichlet wins at junctions).
    """

    u: dict[str, SideCondition]
    phi: dict[str, SideCondition]

    @staticmethod
    def uniform(u_kind: str = "natural", phi_kind: str = "natural", grid: Grid | None = None,
                dim: int | None = None) -> "BoundaryPartition":
        d = grid.dim if grid is not None else (dim or 1)
        keys = [f"{AXIS_NAMES[a]}{end}" for a in range(d) for end in (0, 1)]
        return BoundaryPartition(
            u={k: SideCondition(u_kind) for k in keys},
            phi={k: SideCondition(phi_kind) for k in keys},
        )

    def side(self, family: str, axis: int, end: int) -> SideCondition:
        table = self.u if family == "u" else self.phi
        key = f"{AXIS_NAMES[axis]}{end}"
        if key not in table:
            raise InvalidParameter(f"missing boundary condition {family}.{key}")
        return table[key]

    def dirichlet_mask(self, family: str, grid: Grid) -> np.ndarray:
        mask = np.zeros(grid.shape, dtype=bool)
        for axis, end in grid.sides():
            if self.side(family, axis, end).kind == "dirichlet":
                mask[grid.side_slicer(axis, end)] = True
        return mask

    def meas_sigma1_zero(self, grid: Grid) -> bool:
        """True when no displacement Dirichlet side exists (all-traction boundary)."""
        return all(self.side("u", a, e).kind != "dirichlet" for a, e in grid.sides())


@dataclass(frozen=True)
class InitialData:
    """Initial fields as callables of the (3, *shape) node positions."""

    u1: Callable | None = None
    u2: Callable | None = None
    v1: Callable | None = None
    v2: Callable | None = None
    phi1: Callable | None = None
    phi2: Callable | None = None
    psi1: Callable | None = None
    psi2: Callable | None = None


@dataclass(frozen=True)
class ProblemSpec:
    """Grid, material, initial/boundary data, sources and run controls."""

    grid: Grid
    consts: MaterialConstants
    boundary: BoundaryPartition
    initial: InitialData = field(default_factory=InitialData)
    lam: float = 1.0
    T: float = 1.0
    cfl: float = 0.5
    f: Callable | None = None  # f(x, t) -> (f1, f2), bulk force densities
    ell: Callable | None = None  # ell(x, t) -> (l1, l2)
    energy_every: int = 1
    snapshot_every: int = 10

    def __post_init__(self):
        if self.T < 0.0:
            raise InvalidParameter("T must be nonnegative")
        if not 0.0 < self.cfl <= 1.0:
            raise InvalidParameter("CFL factor must lie in (0, 1]")
        if self.lam <= 0.0:
            raise InvalidParameter("lambda must be positive")

    def quadratic_form(self):
        return assemble_quadratic_form(self.consts)

    def speed(self) -> SpeedParams:
        form = self.quadratic_form()
        _, xi_max = elastic_moduli_bounds(form)
        return wave_speed(self.consts, xi_max, self.lam)


@dataclass
class StateField:
    """Grid-sampled solution and its time derivatives at time t."""

    t: float
    u1: np.ndarray
    u2: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray

    def copy(self) -> "StateField":
        return StateField(
            t=self.t,
            u1=self.u1.copy(),
            u2=self.u2.copy(),
            phi1=self.phi1.copy(),
            phi2=self.phi2.copy(),
            v1=self.v1.copy(),
            v2=self.v2.copy(),
            psi1=self.psi1.copy(),
            psi2=self.psi2.copy(),
        )

    def max_abs(self) -> float:
        return max(
            float(np.max(np.abs(a)))
            for a in (self.u1, self.u2, self.phi1, self.phi2, self.v1, self.v2, self.psi1, self.psi2)
        )


def stable_timestep(grid: Grid, speed: SpeedParams, cfl: float) -> float:
    """dt = cfl · min(h) / (c √dim); c is the bounding signal speed."""
    if not 0.0 < cfl <= 1.0:
        raise InvalidParameter(f"CFL factor must lie in (0, 1], got {cfl}")
    if speed.c <= 0.0:
        raise InvalidParameter("characteristic speed must be positive")
    return cfl * min(grid.h) / (speed.c * math.sqrt(grid.dim))


def initialize(problem: ProblemSpec) -> StateField:
    """Sample the initial data at the grid nodes (t = 0)."""
    grid = problem.grid
    x = grid.positions()
    shape = grid.shape

    def vec(fn):
        if fn is None:
            return np.zeros((3,) + shape)
        out = np.array(fn(x), dtype=float)
        if out.shape != (3,) + shape:
            raise InvalidParameter(f"initial vector field has shape {out.shape}")
        return out

    def scal(fn):
        if fn is None:
            return np.zeros(shape)
        out = np.array(fn(x), dtype=float)
        if out.shape != shape:
            raise InvalidParameter(f"initial scalar field has shape {out.shape}")
        return out

    ini = problem.initial
    return StateField(
        t=0.0,
        u1=vec(ini.u1),
        u2=vec(ini.u2),
        phi1=scal(ini.phi1),
        phi2=scal(ini.phi2),
        v1=vec(ini.v1),
        v2=vec(ini.v2),
        psi1=scal(ini.psi1),
        psi2=scal(ini.psi2),
    )


class Workspace:
    """Precomputed grid/material context for the force evaluation."""

    def __init__(self, problem: ProblemSpec):
        grid = problem.grid
        self.problem = problem
        self.grid = grid
        self.x = grid.positions()
        self.w = grid.weights()
        self.stress = StressEvaluator(problem.consts)
        self.mask_u = problem.boundary.dirichlet_mask("u", grid)
        self.mask_phi = problem.boundary.dirichlet_mask("phi", grid)
        self.pin_u1, self.pin_u2 = self._pinned_vectors()
        self.pin_phi1, self.pin_phi2 = self._pinned_scalars()
        self.natural_u, self.natural_phi = self._natural_sides()

    def _pinned_vectors(self):
        grid = self.grid
        pin1 = np.zeros((3,) + grid.shape)
        pin2 = np.zeros((3,) + grid.shape)
        for axis, end in grid.sides():
            side = self.problem.boundary.side("u", axis, end)
            if side.kind == "dirichlet" and side.value is not None:
                sl = grid.side_slicer(axis, end)
                v1, v2 = side.value(self.x[(slice(None),) + sl])
                pin1[(slice(None),) + sl] = v1
                pin2[(slice(None),) + sl] = v2
        return pin1, pin2

    def _pinned_scalars(self):
        grid = self.grid
        pin1 = np.zeros(grid.shape)
        pin2 = np.zeros(grid.shape)
        for axis, end in grid.sides():
            side = self.problem.boundary.side("phi", axis, end)
            if side.kind == "dirichlet" and side.value is not None:
                sl = grid.side_slicer(axis, end)
                p1, p2 = side.value(self.x[(slice(None),) + sl])
                pin1[sl] = p1
                pin2[sl] = p2
        return pin1, pin2

    def _natural_sides(self):
        grid = self.grid
        nat_u, nat_phi = [], []
        for axis, end in grid.sides():
            for family, bucket in (("u", nat_u), ("phi", nat_phi)):
                side = self.problem.boundary.side(family, axis, end)
                if side.kind == "natural" and side.value is not None:
                    bucket.append(
                        (axis, end, grid.side_slicer(axis, end), grid.side_weights(axis), side.value)
                    )
        return nat_u, nat_phi


def acceleration(ws: Workspace, u1, u2, phi1, phi2, t: float):
    """Accelerations of all four field families at the given configuration."""
    problem = ws.problem
    grid = ws.grid
    k = problem.consts
    sb = strain_fields(u1, u2, phi1, phi2, grid.dim, grid.h)
    s1, s2, g1v, g2v, p, h1, h2 = ws.stress(sb)
    w = ws.w

    f_u1 = -w * p
    f_u2 = w * p
    for j in range(grid.dim):
        for i in range(3):
            f_u1[i] -= gradient_adjoint(w * s1[i, j], j, grid.h[j])
            f_u2[i] -= gradient_adjoint(w * s2[i, j], j, grid.h[j])
    f_p1 = w * g1v
    f_p2 = w * g2v
    for j in range(grid.dim):
        f_p1 -= gradient_adjoint(w * h1[j], j, grid.h[j])
        f_p2 -= gradient_adjoint(w * h2[j], j, grid.h[j])

    for axis, end, sl, bw, value in ws.natural_u:
        t1, t2 = value(ws.x[(slice(None),) + sl], t)
        f_u1[(slice(None),) + sl] += bw * np.asarray(t1)
        f_u2[(slice(None),) + sl] += bw * np.asarray(t2)
    for axis, end, sl, bw, value in ws.natural_phi:
        q1, q2 = value(ws.x[(slice(None),) + sl], t)
        f_p1[sl] += bw * np.asarray(q1)
        f_p2[sl] += bw * np.asarray(q2)

    a_u1 = f_u1 / (w * k.rho1)
    a_u2 = f_u2 / (w * k.rho2)
    a_p1 = f_p1 / (w * k.rho1 * k.chi1)
    a_p2 = f_p2 / (w * k.rho2 * k.chi2)

    if problem.f is not None:
        b1, b2 = problem.f(ws.x, t)
        a_u1 = a_u1 + np.asarray(b1)
        a_u2 = a_u2 + np.asarray(b2)
    if problem.ell is not None:
        # balance carries ρℓ against ρχφ̈, so the acceleration gets ℓ/χ
        l1, l2 = problem.ell(ws.x, t)
        a_p1 = a_p1 + np.asarray(l1) / k.chi1
        a_p2 = a_p2 + np.asarray(l2) / k.chi2

    a_u1[:, ws.mask_u] = 0.0
    a_u2[:, ws.mask_u] = 0.0
    a_p1[ws.mask_phi] = 0.0
    a_p2[ws.mask_phi] = 0.0
    return a_u1, a_u2, a_p1, a_p2


def step(
    state: StateField,
    consts: MaterialConstants,
    problem: ProblemSpec,
    dt: float,
    ws: Workspace | None = None,
    accel_cache=None,
    step_index: int | None = None,
) -> tuple[StateField, tuple]:
    """One kick-drift-kick update; returns the new state and its acceleration.

    Raises:
        NonFinite: if any updated value is not finite (instability signal).
    """
    if ws is None:
        ws = Workspace(problem)
    a = accel_cache or acceleration(ws, state.u1, state.u2, state.phi1, state.phi2, state.t)
    half = 0.5 * dt
    v1 = state.v1 + half * a[0]
    v2 = state.v2 + half * a[1]
    q1 = state.psi1 + half * a[2]
    q2 = state.psi2 + half * a[3]
    u1 = state.u1 + dt * v1
    u2 = state.u2 + dt * v2
    p1 = state.phi1 + dt * q1
    p2 = state.phi2 + dt * q2
    u1[:, ws.mask_u] = ws.pin_u1[:, ws.mask_u]
    u2[:, ws.mask_u] = ws.pin_u2[:, ws.mask_u]
    p1[ws.mask_phi] = ws.pin_phi1[ws.mask_phi]
    p2[ws.mask_phi] = ws.pin_phi2[ws.mask_phi]
    t_new = state.t + dt
    a_new = acceleration(ws, u1, u2, p1, p2, t_new)
    v1 = v1 + half * a_new[0]
    v2 = v2 + half * a_new[1]
    q1 = q1 + half * a_new[2]
    q2 = q2 + half * a_new[3]
    v1[:, ws.mask_u] = 0.0
    v2[:, ws.mask_u] = 0.0
    q1[ws.mask_phi] = 0.0
    q2[ws.mask_phi] = 0.0
    for arr in (u1, u2, p1, p2, v1, v2, q1, q2):
        if not np.all(np.isfinite(arr)):
            raise NonFinite(f"non-finite value at t = {t_new:.6g}", step=step_index)
    new_state = StateField(t=t_new, u1=u1, u2=u2, phi1=p1, phi2=p2, v1=v1, v2=v2, psi1=q1, psi2=q2)
    return new_state, a_new


def simulate(
    problem: ProblemSpec,
    recorders: tuple = (),
    dt: float | None = None,
    n_steps: int | None = None,
) -> StateField:
    """Integrate the problem to T, invoking each recorder every step.

    Deterministic for fixed inputs.  The step count is chosen so the run
    lands exactly on T; an explicit ``dt``/``n_steps`` overrides the CFL
    default (the caller then owns stability).
    """
    form = problem.quadratic_form()
    elastic_moduli_bounds(form)
    speed = problem.speed()
    state = initialize(problem)
    ws = Workspace(problem)
    for rec in recorders:
        rec.record(0, state)
    if problem.T <= 0.0:
        return state
    if n_steps is None:
        base = dt if dt is not None else stable_timestep(problem.grid, speed, problem.cfl)
        n_steps = max(1, math.ceil(problem.T / base - 1e-12))
    dt_eff = problem.T / n_steps
    cache = None
    for k in range(1, n_steps + 1):
        state, cache = step(state, problem.consts, problem, dt_eff, ws=ws, accel_cache=cache, step_index=k)
        for rec in recorders:
            rec.record(k, state)
    return state


# ---------------------------------------------------------------------------
# Rigid decomposition of initial data (all-traction boundary configurations).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RigidMotion:
    """u(x) = translation + rotation × x."""

    translation: np.ndarray
    rotation: np.ndarray

    def field(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        t = self.translation
        r = self.rotation
        out[0] = t[0] + r[1] * x[2] - r[2] * x[1]
        out[1] = t[1] + r[2] * x[0] - r[0] * x[2]
        out[2] = t[2] + r[0] * x[1] - r[1] * x[0]
        return out


@dataclass(frozen=True)
class RigidDecomposition:
    """Rigid parts and normalized residuals of per-constituent initial data.

    Residuals carry zero momentum and zero moment of momentum in the uniform
    (midpoint) node quadrature used for the fit.
    """

    motion_a1: RigidMotion
    motion_adot1: RigidMotion
    motion_a2: RigidMotion
    motion_adot2: RigidMotion
    residual_a1: np.ndarray
    residual_adot1: np.ndarray
    residual_a2: np.ndarray
    residual_adot2: np.ndarray
    worst_residual_moment: float


def _cross_matrix(v: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def _fit_rigid(u: np.ndarray, rho: float, x: np.ndarray, wq: float):
    """Least-squares rigid motion with zero-momentum/zero-moment residual."""
    mass = rho * wq * float(np.prod(u.shape[1:]))
    mom1 = rho * wq * x.reshape(3, -1).sum(axis=1)
    xf = x.reshape(3, -1)
    uf = u.reshape(3, -1)
    lin = rho * wq * uf.sum(axis=1)
    ang = rho * wq * np.cross(xf.T, uf.T).sum(axis=0)
    r2 = np.einsum("ik,ik->k", xf, xf)
    inertia = rho * wq * (np.sum(r2) * np.eye(3) - xf @ xf.T)
    K = np.zeros((6, 6))
    K[:3, :3] = mass * np.eye(3)
    K[:3, 3:] = -_cross_matrix(mom1)
    K[3:, :3] = _cross_matrix(mom1)
    K[3:, 3:] = inertia
    rhs = np.concatenate([lin, ang])
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    motion = RigidMotion(translation=sol[:3].copy(), rotation=sol[3:].copy())
    residual = u - motion.field(x)
    rf = residual.reshape(3, -1)
    res_lin = rho * wq * rf.sum(axis=1)
    res_ang = rho * wq * np.cross(xf.T, rf.T).sum(axis=0)
    scale = max(1.0, float(np.max(np.abs(uf))) if uf.size else 1.0)
    geom = max(1.0, float(np.max(np.abs(xf))))
    worst = max(
        float(np.max(np.abs(res_lin))) / (mass * scale),
        float(np.max(np.abs(res_ang))) / (mass * scale * geom),
    )
    return motion, residual, worst


def rigid_decompose(
    a1: np.ndarray,
    adot1: np.ndarray,
    a2: np.ndarray,
    adot2: np.ndarray,
    consts: MaterialConstants,
    grid: Grid,
    tol: float = 1e-9,
) -> RigidDecomposition:
    """Split each constituent's initial fields into rigid motion + residual.

    Intended for all-traction (measure-zero Dirichlet) configurations.  The
    6×6 momentum/moment system is solved by least squares; on 1-D grids the
    rotation about the grid line is unobservable and the minimum-norm
    solution sets it to zero.

    Raises:
        SingularInertia: if the residual momenta/moments fail the tolerance,
            i.e. the system was genuinely inconsistent.
    """
    x = grid.positions()
    wq = float(np.prod(grid.h))
    out = {}
    worst = 0.0
    for name, (data, rho) in {
        "a1": (a1, consts.rho1),
        "adot1": (adot1, consts.rho1),
        "a2": (a2, consts.rho2),
        "adot2": (adot2, consts.rho2),
    }.items():
        motion, residual, w = _fit_rigid(np.asarray(data, dtype=float), rho, x, wq)
        out[name] = (motion, residual)
        worst = max(worst, w)
    if worst > tol:
        raise SingularInertia(
            f"rigid fit left residual moments at {worst:.3e} (tol {tol:.1e}); "
            "degenerate node geometry"
        )
    return RigidDecomposition(
        motion_a1=out["a1"][0],
        motion_adot1=out["adot1"][0],
        motion_a2=out["a2"][0],
        motion_adot2=out["adot2"][0],
        residual_a1=out["a1"][1],
        residual_adot1=out["adot1"][1],
        residual_a2=out["a2"][1],
        residual_adot2=out["adot2"][1],
        worst_residual_moment=worst,
    )
