"""
Coefficient containers for the finite element spaces on a TriMesh.

Fields are value objects: operations return new fields and never mutate their inputs.
"""
import numpy as np

from ..core.errors import BoundaryDofNonzero, MeshMismatch
from ..mesh.trimesh import TriMesh


def _check_shape(mesh: TriMesh, values, shape, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise MeshMismatch(f"{what} expects shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} values must be finite")
    return arr


def same_mesh(*fields) -> TriMesh:
    """Return the common mesh of all fields or raise MeshMismatch."""
    mesh = fields[0].mesh
    for f in fields[1:]:
        if not mesh.same_as(f.mesh):
            raise MeshMismatch("Fields live on different meshes")
    return mesh


class _Field:
    __slots__ = ("mesh", "values")

    def __init__(self, mesh: TriMesh, values):
        self.mesh = mesh
        self.values = _check_shape(mesh, values, self._shape(mesh), type(self).__name__)

    @classmethod
    def _shape(cls, mesh: TriMesh):
        raise NotImplementedError

    @classmethod
    def zeros(cls, mesh: TriMesh):
        return cls(mesh, np.zeros(cls._shape(mesh)))

    def copy(self):
        return type(self)(self.mesh, self.values.copy())

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(shape={self.values.shape})"


class Dg0Field(_Field):
    """One value per triangle."""

    @classmethod
    def _shape(cls, mesh):
        return (mesh.n_triangles,)


class Rt1Field(_Field):
    """
    Lowest-order Raviart-Thomas field: one normal-flux DOF per edge (interior and boundary).

    dofs[E] is the flux through E measured from t_plus with normal mu_plus.
    """

    @classmethod
    def _shape(cls, mesh):
        return (mesh.n_edges,)

    @property
    def dofs(self) -> np.ndarray:
        return self.values

    def masked_boundary(self) -> "Rt1Field":
        """Project onto the zero-normal-trace subspace by clearing boundary DOFs."""
        dofs = self.values.copy()
        dofs[self.mesh.boundary_edges] = 0.0
        return Rt1Field(self.mesh, dofs)

    def require_zero_boundary(self, atol: float = 0.0):
        b = self.values[self.mesh.boundary_edges]
        if b.size and np.max(np.abs(b)) > atol:
            raise BoundaryDofNonzero(
                f"{np.count_nonzero(np.abs(b) > atol)} boundary DOF(s) are nonzero; expected a field in RT0"
            )


class EdgeScalarField(_Field):
    """One value per interior edge (piecewise constant on the skeleton)."""

    @classmethod
    def _shape(cls, mesh):
        return (mesh.n_interior,)


class CellMatrixField(_Field):
    """One 2x2 matrix per triangle, in the triangle's intrinsic frame."""

    @classmethod
    def _shape(cls, mesh):
        return (mesh.n_triangles, 2, 2)


class EdgeVectorP1Field(_Field):
    """
    Two 2-vectors per interior edge, at endpoints (v_a, v_b).

    Components are taken in the edge frame (tangent t, normal mu_plus).
    """

    @classmethod
    def _shape(cls, mesh):
        return (mesh.n_interior, 2, 2)


__all__ = [
    "Dg0Field",
    "Rt1Field",
    "EdgeScalarField",
    "CellMatrixField",
    "EdgeVectorP1Field",
    "same_mesh",
]
