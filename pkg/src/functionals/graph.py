"""
Graph total variation and graph TGV on weighted graphs (e.g. the dual graph of a mesh).
"""
import numpy as np
import scipy.sparse as sp

from ..core.models import PenaltyParams, TgvParams
from ..mesh.dual_graph import DualGraph
from ..solver.problems import SplitProblem, SplitTerm
from ..solver.split_bregman import minimize_functional


def graph_tv_value(graph: DualGraph, values) -> float:
    """sum over edges (i, j) of w_ij |u_i - u_j|."""
    u = np.asarray(values, dtype=float)
    i, j = graph.edges[:, 0], graph.edges[:, 1]
    return float(np.sum(graph.weights * np.abs(u[i] - u[j])))


def graph_tgv_problem(graph: DualGraph, values, p: TgvParams) -> SplitProblem:
    """min over q of alpha1 |J u - q|_1 + alpha0 |J^T q|_1 with the weighted incidence J."""
    u = np.asarray(values, dtype=float)
    if u.shape != (graph.n_nodes,):
        raise ValueError(f"Expected {graph.n_nodes} node values, got {u.shape}")
    j = graph.incidence_matrix(weighted=True)
    m = graph.n_edges
    terms = [
        SplitTerm("d0", -sp.identity(m, format="csr"), j @ u, np.ones(m), 1, p.alpha1, 0),
        SplitTerm("d1", j.T.tocsr(), np.zeros(graph.n_nodes), np.ones(graph.n_nodes), 1, p.alpha0, 1),
    ]
    return SplitProblem(
        mode="graphtgv-eval",
        n_unknowns=m,
        terms=terms,
        fidelity=np.zeros(m),
        data=np.zeros(m),
        w_slice=slice(0, m),
        fixed_u=u,
    )


def graph_tgv_objective(graph: DualGraph, values, q, p: TgvParams) -> float:
    problem = graph_tgv_problem(graph, values, p)
    return float(sum(t.value(np.asarray(q, dtype=float)) for t in problem.terms))


def graph_tgv_value(graph: DualGraph, values, p: TgvParams, tol: float,
                    penalties: PenaltyParams = None, max_iter: int = 5000) -> float:
    if tol <= 0:
        raise ValueError("tol must be positive")
    value, _, _ = minimize_functional(graph_tgv_problem(graph, values, p), tol, penalties, max_iter=max_iter)
    return value


__all__ = ["graph_tv_value", "graph_tgv_problem", "graph_tgv_objective", "graph_tgv_value"]
