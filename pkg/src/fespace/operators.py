"""
Linear operators of the DG0 and lowest-order Raviart-Thomas spaces.

Every operator is available in two forms: a per-entity function that mirrors the
mathematical definition (`scalar_jump`, `rt_local`, ...) and a sparse matrix on
coefficient vectors (`FeOperators`), which is what the split Bregman solver consumes.

Local RT algebra runs in each triangle's intrinsic frame with the representation
w(x) = a' + c (x - x_c), x_c the centroid. The outward flux of T through its edge E
is sigma * dofs[E], sigma = +1 when T is t_plus of E and -1 otherwise.
"""
from functools import lru_cache
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from ..mesh.trimesh import TriMesh
from .fields import CellMatrixField, Dg0Field, EdgeScalarField, EdgeVectorP1Field, Rt1Field


class FeOperators:
    """
    Sparse operators on one mesh.

    Row layouts (entity-major):
        jump          (nI, nT)    [u] on interior edges
        normal_trace  (nI, nE)    <w, mu_plus> = dof / |E| on interior edges
        local         (3 nT, nE)  (a'_1, a'_2, c) per triangle
        gradient      (4 nT, nE)  row-major 2x2 matrix c * I per triangle
        divergence    (nT, nE)    2c per triangle
        endpoint_jump (4 nI, nE)  [w](X_{E,i}) in the edge frame (t, mu_plus), i = 0, 1
    """

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        n_t, n_e, n_i = mesh.n_triangles, mesh.n_edges, mesh.n_interior
        ii = mesh.interior_edges
        self.interior_pos = np.full(n_e, -1, dtype=np.int64)
        self.interior_pos[ii] = np.arange(n_i)

        tri_edges = mesh.tri_edges
        sigma = mesh.tri_edge_sign
        nu = np.where(sigma[..., None] > 0, mesh.mu_plus[tri_edges], mesh.mu_minus[tri_edges])
        nu_int = np.einsum("tkd,tjd->tjk", mesh.frames, nu)
        offset = np.einsum("tjd,tjd->tj", mesh.midpoints[tri_edges] - mesh.centroids[:, None, :], nu)
        lengths = mesh.lengths[tri_edges]
        system = np.concatenate([nu_int, offset[..., None]], axis=2) * lengths[..., None]
        self.local_inverse = np.linalg.inv(system)

        rows = np.repeat(3 * np.arange(n_t)[:, None] + np.arange(3)[None, :], 3, axis=1).ravel()
        cols = np.tile(tri_edges, (1, 3)).ravel()
        vals = (self.local_inverse * sigma[:, None, :]).ravel()
        self.local = sp.csr_matrix((vals, (rows, cols)), shape=(3 * n_t, n_e))

        c_rows = self.local[2::3]
        pick = sp.csr_matrix(
            (np.ones(2 * n_t), (np.concatenate([4 * np.arange(n_t), 4 * np.arange(n_t) + 3]),
                                np.concatenate([np.arange(n_t), np.arange(n_t)]))),
            shape=(4 * n_t, n_t),
        )
        self.gradient = (pick @ c_rows).tocsr()
        self.divergence = (2.0 * c_rows).tocsr()

        k = np.arange(n_i)
        self.jump = sp.csr_matrix(
            (np.concatenate([np.ones(n_i), -np.ones(n_i)]),
             (np.concatenate([k, k]), np.concatenate([mesh.edge_tplus[ii], mesh.edge_tminus[ii]]))),
            shape=(n_i, n_t),
        )
        self.normal_trace = sp.csr_matrix((1.0 / mesh.lengths[ii], (k, ii)), shape=(n_i, n_e))
        self.endpoint_jump = (self._endpoint_selector() @ self.local).tocsr()

    def _endpoint_selector(self) -> sp.csr_matrix:
        """Map local coefficients to the edge-frame components of w_plus(X) - w_minus(X)."""
        mesh = self.mesh
        ii = mesh.interior_edges
        n_i = len(ii)
        directions = [mesh.tangents[ii]]
        if not mesh.is_surface:
            directions.append(mesh.mu_plus[ii])
        rows, cols, vals = [], [], []
        for side, tris in ((1.0, mesh.edge_tplus[ii]), (-1.0, mesh.edge_tminus[ii])):
            e1 = mesh.frames[tris, 0]
            e2 = mesh.frames[tris, 1]
            for endpoint in (0, 1):
                x = mesh.vertices[mesh.edges[ii, endpoint]] - mesh.centroids[tris]
                for comp, g in enumerate(directions):
                    row = (2 * np.arange(n_i) + endpoint) * 2 + comp
                    coeffs = (
                        np.einsum("ij,ij->i", g, e1),
                        np.einsum("ij,ij->i", g, e2),
                        np.einsum("ij,ij->i", g, x),
                    )
                    for slot, coeff in enumerate(coeffs):
                        rows.append(row)
                        cols.append(3 * tris + slot)
                        vals.append(side * coeff)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(4 * n_i, 3 * mesh.n_triangles),
        )

    def local_coefficients(self, w: Rt1Field) -> np.ndarray:
        """(nT, 3) array of (a'_1, a'_2, c) in intrinsic frames."""
        return (self.local @ w.values).reshape(-1, 3)


@lru_cache(maxsize=16)
def fe_operators(mesh: TriMesh) -> FeOperators:
    """Operators of `mesh`, built once per mesh object."""
    return FeOperators(mesh)


# ── per-entity operations ──────────────────────────────────────────────────


def scalar_jump(u: Dg0Field, edge: int) -> float:
    """[u] = u_plus - u_minus on an interior edge."""
    mesh = u.mesh
    mesh.require_interior(edge)
    return float(u.values[mesh.edge_tplus[edge]] - u.values[mesh.edge_tminus[edge]])


def _local(w: Rt1Field, triangle: int) -> np.ndarray:
    mesh = w.mesh
    ops = fe_operators(mesh)
    flux = mesh.tri_edge_sign[triangle] * w.values[mesh.tri_edges[triangle]]
    return ops.local_inverse[triangle] @ flux


def rt_local(w: Rt1Field, triangle: int) -> Tuple[np.ndarray, float]:
    """
    Coefficients (a, c) with w(x) = a + c x on `triangle`.

    For surface meshes a is an ambient vector and x an ambient point of the triangle.
    """
    mesh = w.mesh
    a1, a2, c = _local(w, triangle)
    e1, e2 = mesh.frames[triangle]
    a = a1 * e1 + a2 * e2 - c * mesh.centroids[triangle]
    return a[: mesh.dim], float(c)


def rt_evaluate(w: Rt1Field, triangle: int, point) -> np.ndarray:
    """Value of the local representation on `triangle` at `point` (projected onto its plane)."""
    mesh = w.mesh
    p = np.zeros(3)
    p[: mesh.dim] = np.asarray(point, dtype=float)
    a1, a2, c = _local(w, triangle)
    e1, e2 = mesh.frames[triangle]
    r = p - mesh.centroids[triangle]
    value = (a1 + c * (r @ e1)) * e1 + (a2 + c * (r @ e2)) * e2
    return value[: mesh.dim]


def rt_normal_component(w: Rt1Field, edge: int) -> float:
    return float(w.values[edge] / w.mesh.lengths[edge])


def rt_gradient(w: Rt1Field, triangle: int) -> np.ndarray:
    """Jacobian of w on `triangle` in its intrinsic frame: c * I."""
    c = _local(w, triangle)[2]
    return c * np.eye(2)


def rt_divergence(w: Rt1Field, triangle: int) -> float:
    return float(2.0 * _local(w, triangle)[2])


def rt_tangential_jump(w: Rt1Field, edge: int, endpoint_index: int) -> np.ndarray:
    """
    Jump [w] = w_plus - w_minus at endpoint X_{E,i}, i in {1, 2} (v_a, v_b).

    Planar meshes return the full vector jump; surface meshes return t <t, [w]>.
    """
    if endpoint_index not in (1, 2):
        raise ValueError("endpoint_index must be 1 or 2")
    mesh = w.mesh
    mesh.require_interior(edge)
    x = mesh.vertices[mesh.edges[edge, endpoint_index - 1]]
    plus = np.zeros(3)
    minus = np.zeros(3)
    plus[: mesh.dim] = rt_evaluate(w, int(mesh.edge_tplus[edge]), x[: mesh.dim])
    minus[: mesh.dim] = rt_evaluate(w, int(mesh.edge_tminus[edge]), x[: mesh.dim])
    jump = plus - minus
    if mesh.is_surface:
        t = mesh.tangents[edge]
        jump = t * (t @ jump)
    return jump[: mesh.dim]


def edge_interpolated_norm(w: Rt1Field, edge: int) -> float:
    """Integral over E of the linear interpolant of |[w]|_2 between the two endpoints."""
    length = w.mesh.lengths[edge]
    j1 = np.linalg.norm(rt_tangential_jump(w, edge, 1))
    j2 = np.linalg.norm(rt_tangential_jump(w, edge, 2))
    return float(0.5 * length * (j1 + j2))


def constant_rt_field(mesh: TriMesh, v0) -> Rt1Field:
    """RT interpolant of the constant vector v0: dofs |E| <v0, mu_plus>."""
    v = np.zeros(3)
    v0 = np.asarray(v0, dtype=float)
    v[: len(v0)] = v0
    return Rt1Field(mesh, mesh.lengths * (mesh.mu_plus @ v))


# ── whole-field versions ───────────────────────────────────────────────────


def jump_field(u: Dg0Field) -> EdgeScalarField:
    return EdgeScalarField(u.mesh, fe_operators(u.mesh).jump @ u.values)


def gradient_field(w: Rt1Field) -> CellMatrixField:
    return CellMatrixField(w.mesh, (fe_operators(w.mesh).gradient @ w.values).reshape(-1, 2, 2))


def divergence_values(w: Rt1Field) -> np.ndarray:
    return fe_operators(w.mesh).divergence @ w.values


def endpoint_jump_field(w: Rt1Field) -> EdgeVectorP1Field:
    """[w] at both endpoints of every interior edge, in edge-frame components (t, mu_plus)."""
    return EdgeVectorP1Field(w.mesh, (fe_operators(w.mesh).endpoint_jump @ w.values).reshape(-1, 2, 2))


__all__ = [
    "FeOperators",
    "fe_operators",
    "scalar_jump",
    "rt_local",
    "rt_evaluate",
    "rt_normal_component",
    "rt_gradient",
    "rt_divergence",
    "rt_tangential_jump",
    "edge_interpolated_norm",
    "constant_rt_field",
    "jump_field",
    "gradient_field",
    "divergence_values",
    "endpoint_jump_field",
]
