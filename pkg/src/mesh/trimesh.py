"""
Triangle mesh geometry and connectivity.

Planar meshes (2D coordinates) and triangle surface meshes embedded in 3D
share one representation: coordinates are padded to 3D internally and every
triangle carries an orthonormal in-plane frame (the xy axes for planar meshes).

Edge orientation is deterministic: edges are the sorted vertex pairs (v_a < v_b)
in lexicographic order, and t_plus is the incident triangle with the smaller index.
"""
import logging
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..core.config import DEGENERACY_TOL
from ..core.errors import BoundaryEdge, DegenerateTriangle, NonManifoldEdge

logger = logging.getLogger(__name__)


class InteriorEdge(NamedTuple):
    index: int
    v_a: int
    v_b: int
    t_plus: int
    t_minus: int
    length: float
    mu_plus: np.ndarray
    mu_minus: np.ndarray
    h_E: float
    midpoint: np.ndarray
    tangent: np.ndarray


class BoundaryEdgeRecord(NamedTuple):
    index: int
    v_a: int
    v_b: int
    t_plus: int
    length: float
    mu_plus: np.ndarray


def _circumcenters(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Circumcenters of triangles (a, b, c) given as (n, 3) arrays; lies in each triangle's plane."""
    u = a - c
    v = b - c
    uxv = np.cross(u, v)
    denom = 2.0 * np.einsum("ij,ij->i", uxv, uxv)
    num = np.cross(
        np.einsum("ij,ij->i", u, u)[:, None] * v - np.einsum("ij,ij->i", v, v)[:, None] * u,
        uxv,
    )
    return c + num / denom[:, None]


def circumcenter(points: Sequence[Sequence[float]]) -> np.ndarray:
    """
    Circumcenter of a single triangle given by three 2D or 3D points.

    Returns a point of the same dimension as the input.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] != 3 or pts.shape[1] not in (2, 3):
        raise ValueError("circumcenter expects three 2D or 3D points")
    dim = pts.shape[1]
    if dim == 2:
        pts = np.column_stack([pts, np.zeros(3)])
    a, b, c = pts[0:1], pts[1:2], pts[2:3]
    longest = max(np.linalg.norm(a - b), np.linalg.norm(b - c), np.linalg.norm(c - a))
    twice_area = np.linalg.norm(np.cross(b - a, c - a))
    if not twice_area > DEGENERACY_TOL * longest ** 2:
        raise DegenerateTriangle(0, "Triangle is degenerate; circumcenter undefined")
    return _circumcenters(a, b, c)[0, :dim]


class TriMesh:
    """
    Immutable triangle mesh with all per-edge quantities needed by the regularizers.

    Attributes
    ----------
    vertices : (nV, 3) float, internally always 3D
    dim : 2 for planar meshes, 3 for surfaces
    triangles : (nT, 3) int
    areas, circumcenters, centroids, normals, frames : per triangle
    edges : (nE, 2) int, sorted vertex pairs
    edge_tplus, edge_tminus : (nE,) int, edge_tminus = -1 on boundary edges
    lengths, midpoints, tangents : per edge
    mu_plus, mu_minus : (nE, 3) outward unit normals (in-plane), mu_minus = 0 on boundary edges
    h_E : (nE,) signed circumcenter gap, 0 on boundary edges
    tri_edges, tri_edge_sign : (nT, 3) edge ids of each triangle and +1/-1 for t_plus/t_minus
    pixel_grid : (M, N, h) when the mesh is the two-triangles-per-pixel split of a raster
    """

    def __init__(self, vertex_coords, triangles, pixel_grid: Optional[Tuple[int, int, float]] = None):
        v = np.asarray(vertex_coords, dtype=float)
        t = np.asarray(triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] not in (2, 3):
            raise ValueError("Vertices should have 2 or 3 coordinates")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError("Triangles should have 3 vertices")
        if t.size and (t.min() < 0 or t.max() >= v.shape[0]):
            raise ValueError("Triangle vertex index out of range")
        if t.size and np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            bad = int(np.flatnonzero((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2]))[0])
            raise DegenerateTriangle(bad, f"Triangle {bad} repeats a vertex")

        self.dim = v.shape[1]
        self.vertices = np.column_stack([v, np.zeros(v.shape[0])]) if self.dim == 2 else v.copy()
        self.triangles = t.copy()
        self.pixel_grid = tuple(pixel_grid) if pixel_grid is not None else None

        self._build_cells()
        self._build_edges()
        self._build_edge_geometry()

        for arr in self.__dict__.values():
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)

    # ── construction ────────────────────────────────────────────────────────

    def _build_cells(self):
        p = self.vertices[self.triangles]
        a, b, c = p[:, 0], p[:, 1], p[:, 2]
        cross = np.cross(b - a, c - a)
        twice_area = np.linalg.norm(cross, axis=1)
        longest = np.max(
            np.stack([np.linalg.norm(b - a, axis=1), np.linalg.norm(c - b, axis=1), np.linalg.norm(a - c, axis=1)]),
            axis=0,
        )
        degenerate = ~(twice_area > DEGENERACY_TOL * longest ** 2)
        if np.any(degenerate):
            bad = int(np.flatnonzero(degenerate)[0])
            raise DegenerateTriangle(bad, f"Triangle {bad} is degenerate (2*area={twice_area[bad]:.3e})")

        self.areas = 0.5 * twice_area
        self.centroids = p.mean(axis=1)
        self.circumcenters = _circumcenters(a, b, c)

        if self.is_surface:
            self.normals = cross / twice_area[:, None]
            e1 = (b - a) / np.linalg.norm(b - a, axis=1)[:, None]
            e2 = np.cross(self.normals, e1)
        else:
            n_t = len(self.triangles)
            self.normals = np.tile([0.0, 0.0, 1.0], (n_t, 1))
            e1 = np.tile([1.0, 0.0, 0.0], (n_t, 1))
            e2 = np.tile([0.0, 1.0, 0.0], (n_t, 1))
        self.frames = np.stack([e1, e2], axis=1)

    def _build_edges(self):
        t = self.triangles
        n_t = len(t)
        local = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]], axis=0)
        owner = np.concatenate([np.arange(n_t)] * 3)
        slot = np.repeat([0, 1, 2], n_t)
        local.sort(axis=1)

        edges, inverse, counts = np.unique(local, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.ravel()
        if np.any(counts > 2):
            k = int(np.flatnonzero(counts > 2)[0])
            raise NonManifoldEdge(int(edges[k, 0]), int(edges[k, 1]), int(counts[k]))

        n_e = len(edges)
        order = np.lexsort((owner, inverse))
        first = np.full(n_e, -1, dtype=np.int64)
        second = np.full(n_e, -1, dtype=np.int64)
        sorted_edges = inverse[order]
        sorted_owner = owner[order]
        starts = np.searchsorted(sorted_edges, np.arange(n_e))
        first[:] = sorted_owner[starts]
        has_two = counts == 2
        second[has_two] = sorted_owner[starts[has_two] + 1]

        self.edges = edges.astype(np.int64)
        self.edge_tplus = first
        self.edge_tminus = second
        self.interior = has_two
        self.interior_edges = np.flatnonzero(has_two)
        self.boundary_edges = np.flatnonzero(~has_two)

        tri_edges = np.empty((n_t, 3), dtype=np.int64)
        tri_edges[owner, slot] = inverse
        self.tri_edges = tri_edges
        self.tri_edge_sign = np.where(first[tri_edges] == np.arange(n_t)[:, None], 1.0, -1.0)

    def _outward_normal(self, edge_ids: np.ndarray, tris: np.ndarray) -> np.ndarray:
        tangent = self.tangents[edge_ids]
        nu = np.cross(tangent, self.normals[tris])
        nu /= np.linalg.norm(nu, axis=1)[:, None]
        inward = np.einsum("ij,ij->i", nu, self.centroids[tris] - self.midpoints[edge_ids]) > 0
        nu[inward] *= -1.0
        return nu

    def _build_edge_geometry(self):
        pa = self.vertices[self.edges[:, 0]]
        pb = self.vertices[self.edges[:, 1]]
        self.lengths = np.linalg.norm(pb - pa, axis=1)
        self.midpoints = 0.5 * (pa + pb)
        self.tangents = (pb - pa) / self.lengths[:, None]

        all_ids = np.arange(len(self.edges))
        self.mu_plus = self._outward_normal(all_ids, self.edge_tplus)
        mu_minus = np.zeros_like(self.mu_plus)
        ii = self.interior_edges
        mu_minus[ii] = self._outward_normal(ii, self.edge_tminus[ii])
        self.mu_minus = mu_minus

        h = np.zeros(len(self.edges))
        if self.is_surface:
            h[ii] = edge_factor_surface(self, ii)
        else:
            h[ii] = edge_factor_planar(self, ii)
        self.h_E = h

        negative = int(np.count_nonzero(h[ii] < -1e-12 * self.diameter))
        if negative:
            logger.warning(
                "%d interior edge(s) have a negative circumcenter gap h_E (non-Delaunay configuration)", negative
            )

    # ── queries ─────────────────────────────────────────────────────────────

    @property
    def is_surface(self) -> bool:
        return self.dim == 3

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_interior(self) -> int:
        return len(self.interior_edges)

    @property
    def diameter(self) -> float:
        if self.n_vertices == 0:
            return 0.0
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def coords(self) -> np.ndarray:
        """Vertex coordinates in their original dimension."""
        return self.vertices[:, : self.dim]

    def require_interior(self, edge: int):
        if not self.interior[edge]:
            raise BoundaryEdge(int(edge))

    def interior_edge(self, edge: int) -> InteriorEdge:
        self.require_interior(edge)
        return InteriorEdge(
            index=int(edge),
            v_a=int(self.edges[edge, 0]),
            v_b=int(self.edges[edge, 1]),
            t_plus=int(self.edge_tplus[edge]),
            t_minus=int(self.edge_tminus[edge]),
            length=float(self.lengths[edge]),
            mu_plus=self.mu_plus[edge, : self.dim],
            mu_minus=self.mu_minus[edge, : self.dim],
            h_E=float(self.h_E[edge]),
            midpoint=self.midpoints[edge, : self.dim],
            tangent=self.tangents[edge, : self.dim],
        )

    def interior_edge_records(self) -> List[InteriorEdge]:
        return [self.interior_edge(int(e)) for e in self.interior_edges]

    def boundary_edge_records(self) -> List[BoundaryEdgeRecord]:
        return [
            BoundaryEdgeRecord(
                index=int(e),
                v_a=int(self.edges[e, 0]),
                v_b=int(self.edges[e, 1]),
                t_plus=int(self.edge_tplus[e]),
                length=float(self.lengths[e]),
                mu_plus=self.mu_plus[e, : self.dim],
            )
            for e in self.boundary_edges
        ]

    def to_intrinsic(self, tris: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        """Project ambient 3D vectors onto the in-plane frames of the given triangles."""
        return np.einsum("nkd,nd->nk", self.frames[tris], vectors)

    def same_as(self, other: "TriMesh") -> bool:
        if self is other:
            return True
        return (
            self.triangles.shape == other.triangles.shape
            and self.vertices.shape == other.vertices.shape
            and np.array_equal(self.triangles, other.triangles)
            and np.array_equal(self.vertices, other.vertices)
        )

    def __repr__(self) -> str:
        kind = "surface" if self.is_surface else "planar"
        return f"TriMesh({kind}, vertices={self.n_vertices}, triangles={self.n_triangles}, interior_edges={self.n_interior})"


def build_mesh(vertex_coords, triangles, pixel_grid: Optional[Tuple[int, int, float]] = None) -> TriMesh:
    """Validate input and build a TriMesh with all derived fields populated."""
    return TriMesh(vertex_coords, triangles, pixel_grid=pixel_grid)


def edge_factor_planar(mesh: TriMesh, edges) -> np.ndarray:
    """
    Signed circumcenter gap h_E = <m_plus - m_minus, mu_minus> for interior edges of a planar mesh.

    With this sign mu_minus * h_E = m_plus - m_minus holds exactly, also on non-Delaunay meshes.
    """
    edges = np.atleast_1d(np.asarray(edges))
    for e in edges:
        mesh.require_interior(int(e))
    gap = mesh.circumcenters[mesh.edge_tplus[edges]] - mesh.circumcenters[mesh.edge_tminus[edges]]
    return np.einsum("ij,ij->i", gap, mesh.mu_minus[edges])


def edge_factor_surface(mesh: TriMesh, edges) -> np.ndarray:
    """
    Surface-intrinsic h_E = mu_plus . (m_E - m_plus) + mu_minus . (m_E - m_minus).

    Each summand is the in-plane signed distance of a circumcenter to the edge,
    so the value does not depend on the dihedral angle.
    """
    edges = np.atleast_1d(np.asarray(edges))
    for e in edges:
        mesh.require_interior(int(e))
    m_e = mesh.midpoints[edges]
    plus = np.einsum("ij,ij->i", mesh.mu_plus[edges], m_e - mesh.circumcenters[mesh.edge_tplus[edges]])
    minus = np.einsum("ij,ij->i", mesh.mu_minus[edges], m_e - mesh.circumcenters[mesh.edge_tminus[edges]])
    return plus + minus


def refine_uniform(mesh: TriMesh) -> TriMesh:
    """Split every triangle into four similar children through the edge midpoints."""
    new_vertices = np.vstack([mesh.coords(), mesh.midpoints[:, : mesh.dim]])
    mid = mesh.n_vertices + mesh.tri_edges  # slots: (v0,v1), (v1,v2), (v2,v0)
    v0, v1, v2 = mesh.triangles.T
    m01, m12, m20 = mid.T
    children = np.concatenate(
        [
            np.column_stack([v0, m01, m20]),
            np.column_stack([v1, m12, m01]),
            np.column_stack([v2, m20, m12]),
            np.column_stack([m01, m12, m20]),
        ]
    )
    return TriMesh(new_vertices, children)


__all__ = [
    "TriMesh",
    "InteriorEdge",
    "BoundaryEdgeRecord",
    "build_mesh",
    "circumcenter",
    "edge_factor_planar",
    "edge_factor_surface",
    "refine_uniform",
]
