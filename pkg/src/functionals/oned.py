"""
One-dimensional analogues: FE-TGV on a partition into intervals and the grid TGV on a 1D signal.

FE-TGV stores w on the n + 1 interval endpoints; the grid TGV stores w on the n samples
and is assembled from the same forward/backward differences as the 2D grid.
"""
import numpy as np
import scipy.sparse as sp

from ..core.models import PenaltyParams, TgvParams
from ..solver.problems import SplitProblem, SplitTerm
from ..solver.split_bregman import minimize_functional
from .grid import backward_matrix, forward_difference


def _check(u, lengths=None):
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or len(u) < 2:
        raise ValueError("Need a signal over n >= 2 intervals")
    if lengths is None:
        return u, np.ones(len(u))
    lengths = np.asarray(lengths, dtype=float)
    if lengths.shape != u.shape or np.any(lengths <= 0):
        raise ValueError("Need one positive length per interval")
    return u, lengths


def vertex_factors(lengths) -> np.ndarray:
    """h_V = (|I_plus| + |I_minus|) / 2 at the n - 1 interior vertices (midpoint distances)."""
    lengths = np.asarray(lengths, dtype=float)
    return 0.5 * (lengths[:-1] + lengths[1:])


def fetgv_1d_problem(u, lengths, p: TgvParams) -> SplitProblem:
    u, lengths = _check(u, lengths)
    n = len(u)
    h_v = vertex_factors(lengths)
    k = np.arange(1, n)
    first = sp.csr_matrix((-h_v, (k - 1, k)), shape=(n - 1, n + 1))
    i = np.arange(n)
    second = sp.csr_matrix(
        (np.concatenate([np.ones(n), -np.ones(n)]), (np.concatenate([i, i]), np.concatenate([i + 1, i]))),
        shape=(n, n + 1),
    )
    terms = [
        SplitTerm("d0", first, np.diff(u), np.ones(n - 1), 1, p.alpha1, 0),
        SplitTerm("d1", second, np.zeros(n), np.ones(n), 1, p.alpha0, 1),
    ]
    return SplitProblem(
        mode="fetgv1d-eval", n_unknowns=n + 1, terms=terms,
        fidelity=np.zeros(n + 1), data=np.zeros(n + 1), w_slice=slice(0, n + 1), fixed_u=u,
    )


def fetgv_1d_objective(u, lengths, w, p: TgvParams) -> float:
    """
    alpha1 sum_{k=1}^{n-1} |(u_k - u_{k-1}) - h_V w_k| + alpha0 sum_{k=1}^{n} |w_k - w_{k-1}|

    with w given on the n + 1 vertices.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (len(np.atleast_1d(u)) + 1,):
        raise ValueError("w lives on the n + 1 vertices")
    return float(sum(t.value(w) for t in fetgv_1d_problem(u, lengths, p).terms))


def fetgv_1d_value(u, lengths, p: TgvParams, tol: float,
                   penalties: PenaltyParams = None, max_iter: int = 5000) -> float:
    if tol <= 0:
        raise ValueError("tol must be positive")
    value, _, _ = minimize_functional(fetgv_1d_problem(u, lengths, p), tol, penalties, max_iter=max_iter)
    return value


def sampled_1d_problem(u, p: TgvParams) -> SplitProblem:
    u, _ = _check(u)
    n = len(u)
    terms = [
        SplitTerm("d0", -sp.identity(n, format="csr"), forward_difference(u), np.ones(n), 1, p.alpha1, 0),
        SplitTerm("d1", backward_matrix(n), np.zeros(n), np.ones(n), 1, p.alpha0, 1),
    ]
    return SplitProblem(
        mode="sampled1d-eval", n_unknowns=n, terms=terms,
        fidelity=np.zeros(n), data=np.zeros(n), w_slice=slice(0, n), fixed_u=u,
    )


def sampled_1d_objective(u, w, p: TgvParams) -> float:
    """
    alpha1 sum_{i=0}^{n-2} |(u_{i+1} - u_i) - w_i| + alpha1 |w_{n-1}|
    + alpha0 |w_0| + alpha0 sum_{i=1}^{n-2} |w_i - w_{i-1}| + alpha0 |w_{n-2}|

    with w given on the n samples (unit spacing).
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (len(np.atleast_1d(u)),):
        raise ValueError("w lives on the n samples")
    return float(sum(t.value(w) for t in sampled_1d_problem(u, p).terms))


def sampled_1d_value(u, p: TgvParams, tol: float,
                     penalties: PenaltyParams = None, max_iter: int = 5000) -> float:
    if tol <= 0:
        raise ValueError("tol must be positive")
    value, _, _ = minimize_functional(sampled_1d_problem(u, p), tol, penalties, max_iter=max_iter)
    return value


def matched_grid_field(w_vertices) -> np.ndarray:
    """
    Sample-based field matching a vertex-based one: w_grid[i] = w_vertices[i + 1].

    The two objectives agree exactly when w_vertices vanishes at both end vertices.
    """
    w = np.asarray(w_vertices, dtype=float)
    return w[1:].copy()


__all__ = [
    "vertex_factors",
    "fetgv_1d_problem",
    "fetgv_1d_objective",
    "fetgv_1d_value",
    "sampled_1d_problem",
    "sampled_1d_objective",
    "sampled_1d_value",
    "matched_grid_field",
]
