"""
Regularizers on DG0 functions over triangle meshes: FE-TV, FE-TGV and Lap-FE-TGV.

The *_objective functions evaluate a functional at given (u, w); the *_value functions
minimize over w with the split Bregman loop (data term removed, u fixed).
"""
import numpy as np

from ..core.models import PenaltyParams, TgvParams
from ..fespace.fields import Dg0Field, Rt1Field, same_mesh
from ..fespace.operators import fe_operators
from ..solver.problems import mesh_problem
from ..solver.split_bregman import minimize_functional

DEFAULT_VALUE_MAX_ITER = 5000


def tv_dg0(u: Dg0Field) -> float:
    """sum_E |E| |[u]| over interior edges."""
    mesh = u.mesh
    jumps = fe_operators(mesh).jump @ u.values
    return float(np.sum(mesh.lengths[mesh.interior_edges] * np.abs(jumps)))


def fetgv_terms(u: Dg0Field, w: Rt1Field, p: TgvParams):
    """The three summands (first-order, cell gradient, edge jump) of the FE-TGV objective."""
    mesh = same_mesh(u, w)
    ops = fe_operators(mesh)
    ii = mesh.interior_edges
    len_i = mesh.lengths[ii]

    first = ops.jump @ u.values + mesh.h_E[ii] * (ops.normal_trace @ w.values)
    grad = (ops.gradient @ w.values).reshape(-1, 4)
    jumps = (ops.endpoint_jump @ w.values).reshape(-1, 2, 2)

    t1 = p.alpha1 * float(np.sum(len_i * np.abs(first)))
    t2 = p.alpha0 * float(np.sum(mesh.areas * np.linalg.norm(grad, axis=1)))
    t3 = p.alpha0 * float(np.sum(0.5 * len_i * np.linalg.norm(jumps, axis=2).sum(axis=1)))
    return t1, t2, t3


def fetgv_objective(u: Dg0Field, w: Rt1Field, p: TgvParams) -> float:
    """
    alpha1 sum_E |E| |[u] + h_E <w, mu_plus>| + alpha0 sum_T |T| |grad w|_F
    + alpha0 sum_E sum_i |E|/2 |[w](X_{E,i})|_2
    """
    return float(sum(fetgv_terms(u, w, p)))


def fetgv_value(u: Dg0Field, p: TgvParams, tol: float, penalties: PenaltyParams = None,
                max_iter: int = DEFAULT_VALUE_MAX_ITER) -> float:
    """min over w of fetgv_objective(u, w, p), computed to residual tolerance `tol`."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    problem = mesh_problem(u.mesh, "fetgv", p, u=u.values)
    value, _, _ = minimize_functional(problem, tol, penalties, max_iter=max_iter)
    return value


def lapfetgv_terms(u: Dg0Field, w: Rt1Field, p: TgvParams):
    mesh = same_mesh(u, w)
    w.require_zero_boundary()
    ops = fe_operators(mesh)
    ii = mesh.interior_edges
    len_i = mesh.lengths[ii]
    first = ops.jump @ u.values + w.values[ii] / len_i ** 2
    div = ops.divergence @ w.values
    t1 = p.alpha1 * float(np.sum(len_i * np.abs(first)))
    t2 = p.alpha0 * float(np.sum(mesh.areas * np.abs(div)))
    return t1, t2


def lapfetgv_objective(u: Dg0Field, w: Rt1Field, p: TgvParams) -> float:
    """
    alpha1 sum_E |E| |[u] + <w, mu_plus> / |E|| + alpha0 sum_T |T| |div w|, for w in RT0.

    Raises BoundaryDofNonzero when w has nonzero boundary fluxes.
    """
    return float(sum(lapfetgv_terms(u, w, p)))


def lapfetgv_value(u: Dg0Field, p: TgvParams, tol: float, penalties: PenaltyParams = None,
                   max_iter: int = DEFAULT_VALUE_MAX_ITER) -> float:
    if tol <= 0:
        raise ValueError("tol must be positive")
    problem = mesh_problem(u.mesh, "lapfetgv", p, u=u.values)
    value, _, _ = minimize_functional(problem, tol, penalties, max_iter=max_iter)
    return value


def regularizer_value(u: Dg0Field, regularizer: str, p: TgvParams, tol: float) -> float:
    """Value of a mesh regularizer at u (TV is evaluated directly, the others minimized over w)."""
    if regularizer == "tv":
        return p.alpha1 * tv_dg0(u)
    if regularizer == "fetgv":
        return fetgv_value(u, p, tol)
    if regularizer == "lapfetgv":
        return lapfetgv_value(u, p, tol)
    raise ValueError(f"Unknown mesh regularizer '{regularizer}'")


__all__ = [
    "tv_dg0",
    "fetgv_terms",
    "fetgv_objective",
    "fetgv_value",
    "lapfetgv_terms",
    "lapfetgv_objective",
    "lapfetgv_value",
    "regularizer_value",
]
