"""
Dual graph of a triangle mesh: one node per triangle, one edge per interior mesh edge.
"""
from typing import Optional, Set, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .trimesh import TriMesh


class DualGraph:
    """
    Weighted undirected graph with oriented edges (i, j).

    For a mesh dual graph, edge k corresponds to interior mesh edge
    `mesh_edges[k]` with i = t_plus, j = t_minus and weight |E|.
    """

    def __init__(self, n_nodes: int, edges, weights=None, mesh_edges: Optional[np.ndarray] = None):
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n_nodes):
            raise ValueError("Graph edge endpoint out of range")
        w = np.ones(len(e)) if weights is None else np.asarray(weights, dtype=float)
        if w.shape != (len(e),):
            raise ValueError("One weight per graph edge is required")
        if np.any(w <= 0):
            raise ValueError("Graph weights must be positive")
        self.n_nodes = int(n_nodes)
        self.edges = e
        self.weights = w
        self.mesh_edges = mesh_edges

        ones = np.ones(len(e))
        adj = sp.coo_matrix((ones, (e[:, 0], e[:, 1])), shape=(n_nodes, n_nodes))
        self.adjacency = ((adj + adj.T) > 0).astype(np.int8).tocsr()

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, node: int) -> np.ndarray:
        row = self.adjacency
        return row.indices[row.indptr[node]: row.indptr[node + 1]]

    def incidence_matrix(self, weighted: bool = True) -> sp.csr_matrix:
        """
        Oriented incidence J with (J u)_k = w_k (u_i - u_j) for edge k = (i, j).

        With weighted=False every nonzero is +-1.
        """
        m = self.n_edges
        w = self.weights if weighted else np.ones(m)
        rows = np.concatenate([np.arange(m), np.arange(m)])
        cols = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        vals = np.concatenate([w, -w])
        return sp.csr_matrix((vals, (rows, cols)), shape=(m, self.n_nodes))


def dual_graph(mesh: TriMesh, weights=None) -> DualGraph:
    """Dual graph of `mesh`; weights default to the interior edge lengths."""
    ii = mesh.interior_edges
    pairs = np.column_stack([mesh.edge_tplus[ii], mesh.edge_tminus[ii]])
    w = mesh.lengths[ii] if weights is None else weights
    return DualGraph(mesh.n_triangles, pairs, w, mesh_edges=ii)


def connected_components(graph: DualGraph) -> Tuple[int, np.ndarray]:
    count, labels = _cc(graph.adjacency, directed=False)
    return int(count), labels


def graph_distance_ball(graph: DualGraph, node: int, radius: int) -> Set[int]:
    """All nodes within `radius` hops of `node` (breadth-first)."""
    if radius < 0:
        raise ValueError("radius must be a nonnegative hop count")
    ball = {int(node)}
    frontier = [int(node)]
    for _ in range(radius):
        nxt = []
        for n in frontier:
            for m in graph.neighbors(n):
                m = int(m)
                if m not in ball:
                    ball.add(m)
                    nxt.append(m)
        if not nxt:
            break
        frontier = nxt
    return ball


def ball_matrix(graph: DualGraph, radius: int) -> sp.csr_matrix:
    """
    Boolean matrix B with B[i, j] = 1 iff j lies within `radius` hops of i.

    Built as the sparsity pattern of (I + A)^radius.
    """
    if radius < 0:
        raise ValueError("radius must be a nonnegative hop count")
    step = (sp.identity(graph.n_nodes, format="csr", dtype=np.int32) + graph.adjacency.astype(np.int32)).tocsr()
    ball = sp.identity(graph.n_nodes, format="csr", dtype=np.int32)
    for _ in range(radius):
        grown = (ball @ step).tocsr()
        grown.data[:] = 1
        if grown.nnz == ball.nnz:
            break
        ball = grown
    return ball.astype(bool)


__all__ = [
    "DualGraph",
    "dual_graph",
    "connected_components",
    "graph_distance_ball",
    "ball_matrix",
]
