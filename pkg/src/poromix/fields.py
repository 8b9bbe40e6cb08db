"""Vectorized field kinematics on structured grids.

Second-order difference stencils (central interior, one-sided 3-point at the
ends), their exact adjoints, and batched evaluation of strains, stresses and
energy density over whole node arrays.  Grid axes are the trailing axes of
every array; component axes lead.  All constitutive algebra stays full 3-D
regardless of how many spatial axes are sampled.
"""

from __future__ import annotations

import numpy as np

from .materials import MaterialConstants, QuadraticForm


def _idx(nd: int, ax: int, s) -> tuple:
    out = [slice(None)] * nd
    out[ax] = s
    return tuple(out)


def central_gradient(f: np.ndarray, ax: int, h: float) -> np.ndarray:
    """d/dx along axis ``ax``: central interior, one-sided 3-point at the ends."""
    nd = f.ndim
    g = np.empty_like(f)
    g[_idx(nd, ax, slice(1, -1))] = (
        f[_idx(nd, ax, slice(2, None))] - f[_idx(nd, ax, slice(0, -2))]
    ) / (2.0 * h)
    g[_idx(nd, ax, 0)] = (
        -3.0 * f[_idx(nd, ax, 0)] + 4.0 * f[_idx(nd, ax, 1)] - f[_idx(nd, ax, 2)]
    ) / (2.0 * h)
    g[_idx(nd, ax, -1)] = (
        3.0 * f[_idx(nd, ax, -1)] - 4.0 * f[_idx(nd, ax, -2)] + f[_idx(nd, ax, -3)]
    ) / (2.0 * h)
    return g


def gradient_adjoint(q: np.ndarray, ax: int, h: float) -> np.ndarray:
    """Exact adjoint of :func:`central_gradient` in the plain dot product.

    Satisfies  sum(central_gradient(f)·q) == sum(f·gradient_adjoint(q))
    to roundoff for every f, q; the force assembly relies on this being the
    *exact* transpose so the semi-discrete operator is exactly symmetric.
    """
    nd = q.ndim
    out = np.zeros_like(q)
    inner = q[_idx(nd, ax, slice(1, -1))] / (2.0 * h)
    out[_idx(nd, ax, slice(2, None))] += inner
    out[_idx(nd, ax, slice(0, -2))] -= inner
    q0 = q[_idx(nd, ax, 0)] / (2.0 * h)
    out[_idx(nd, ax, 0)] += -3.0 * q0
    out[_idx(nd, ax, 1)] += 4.0 * q0
    out[_idx(nd, ax, 2)] += -q0
    qn = q[_idx(nd, ax, -1)] / (2.0 * h)
    out[_idx(nd, ax, -1)] += 3.0 * qn
    out[_idx(nd, ax, -2)] += -4.0 * qn
    out[_idx(nd, ax, -3)] += qn
    return out


class StrainBundle:
    """Nodal strain measures of a sampled state (trailing axes = grid)."""

    __slots__ = ("G1", "G2", "e", "g", "d", "gp1", "gp2", "phi1", "phi2")

    def __init__(self, G1, G2, e, g, d, gp1, gp2, phi1, phi2):
        self.G1, self.G2 = G1, G2
        self.e, self.g, self.d = e, g, d
        self.gp1, self.gp2 = gp1, gp2
        self.phi1, self.phi2 = phi1, phi2


def vector_gradient(u: np.ndarray, dim: int, h: tuple[float, ...]) -> np.ndarray:
    """Full 3×3 gradient G[i, j] = ∂u_i/∂x_j of a (3, *grid) field.

    Derivatives along unsampled directions are zero (fields are independent
    of the unsampled coordinates).
    """
    shape = u.shape[1:]
    G = np.zeros((3, 3) + shape)
    for j in range(dim):
        for i in range(3):
            G[i, j] = central_gradient(u[i], j, h[j])
    return G


def scalar_gradient(phi: np.ndarray, dim: int, h: tuple[float, ...]) -> np.ndarray:
    """(3, *grid) gradient of a scalar field; unsampled components zero."""
    G = np.zeros((3,) + phi.shape)
    for j in range(dim):
        G[j] = central_gradient(phi, j, h[j])
    return G


def strain_fields(u1, u2, phi1, phi2, dim, h) -> StrainBundle:
    """All strain measures of the sampled state in one pass."""
    G1 = vector_gradient(u1, dim, h)
    G2 = vector_gradient(u2, dim, h)
    e = 0.5 * (G1 + np.swapaxes(G1, 0, 1))
    g = np.swapaxes(G1, 0, 1) + G2
    return StrainBundle(
        G1=G1,
        G2=G2,
        e=e,
        g=g,
        d=u1 - u2,
        gp1=scalar_gradient(phi1, dim, h),
        gp2=scalar_gradient(phi2, dim, h),
        phi1=phi1,
        phi2=phi2,
    )


class StressEvaluator:
    """Batched constitutive law; caches the coefficient tensors.

    ``__call__`` returns (S1, S2, g1, g2, p, h1, h2) with the same storage
    convention as the pointwise API: S[i, j] = S_ji, traction = S·n.
    """

    def __init__(self, consts: MaterialConstants):
        A, B, C = consts.A, consts.B, consts.C
        self.ce1 = A.transpose(1, 0, 2, 3) + B.transpose(3, 2, 0, 1)
        self.cg1 = B + C.transpose(1, 0, 2, 3)
        self.ce2 = B.transpose(2, 3, 0, 1)
        self.cg2 = C
        self.f1 = consts.D + consts.M
        self.f2 = consts.E + consts.N
        self.consts = consts

    def __call__(self, sb: StrainBundle):
        k = self.consts
        s1 = (
            np.einsum("ijrs,rs...->ij...", self.ce1, sb.e)
            + np.einsum("ijrs,rs...->ij...", self.cg1, sb.g)
            + np.multiply.outer(self.f1, sb.phi1)
            + np.multiply.outer(self.f2, sb.phi2)
        )
        s2 = (
            np.einsum("ijrs,rs...->ij...", self.ce2, sb.e)
            + np.einsum("ijrs,rs...->ij...", self.cg2, sb.g)
            + np.multiply.outer(k.M, sb.phi1)
            + np.multiply.outer(k.N, sb.phi2)
        )
        g1 = (
            -np.einsum("ij,ij...->...", k.D, sb.e)
            - np.einsum("ij,ij...->...", k.M, sb.g)
            - k.zeta * sb.phi1
            - k.tau * sb.phi2
        )
        g2 = (
            -np.einsum("ij,ij...->...", k.E, sb.e)
            - np.einsum("ij,ij...->...", k.N, sb.g)
            - k.tau * sb.phi1
            - k.mu * sb.phi2
        )
        p = (
            np.einsum("ij,j...->i...", k.a, sb.d)
            + np.einsum("ij,j...->i...", k.b, sb.gp1)
            + np.einsum("ij,j...->i...", k.c, sb.gp2)
        )
        h1 = (
            np.einsum("ij,j...->i...", k.alpha, sb.gp1)
            + np.einsum("ij,j...->i...", k.beta, sb.gp2)
            + np.einsum("ji,j...->i...", k.b, sb.d)
        )
        h2 = (
            np.einsum("ji,j...->i...", k.beta, sb.gp1)
            + np.einsum("ij,j...->i...", k.gamma, sb.gp2)
            + np.einsum("ji,j...->i...", k.c, sb.d)
        )
        return s1, s2, g1, g2, p, h1, h2


def stack_strain(sb: StrainBundle) -> np.ndarray:
    """Assemble the (29, *grid) strain-slot field from a bundle."""
    shape = sb.phi1.shape
    out = np.empty((29,) + shape)
    out[0:9] = sb.e.reshape((9,) + shape)
    out[9:18] = sb.g.reshape((9,) + shape)
    out[18] = sb.phi1
    out[19] = sb.phi2
    out[20:23] = sb.d
    out[23:26] = sb.gp1
    out[26:29] = sb.gp2
    return out


def energy_density_field(form: QuadraticForm, sb: StrainBundle) -> np.ndarray:
    """Nodal stored-energy density W = ½ E·𝒜E over the grid."""
    ev = stack_strain(sb)
    conj = np.einsum("KL,L...->K...", form.matrix, ev)
    return 0.5 * np.einsum("K...,K...->...", ev, conj)
