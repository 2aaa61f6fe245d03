"""
Split formulations consumed by the split Bregman loop.

A problem is  min_x  1/2 sum_i F_i (x_i - data_i)^2 + sum_k alpha_k sum_g omega_g |(K_k x + c_k)_g|
where each term k is split as d_k = K_k x + c_k and its groups g are measured in the
Euclidean norm (group size 1: absolute value, 2: vector norm, 4: Frobenius norm of a 2x2 matrix).
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..core.errors import MeshMismatch, SingularSystem
from ..core.models import PenaltyParams, TgvParams
from ..fespace.operators import fe_operators
from ..mesh.dual_graph import connected_components, dual_graph
from ..mesh.trimesh import TriMesh
from .linalg import SparseSpd

logger = logging.getLogger(__name__)

MESH_MODES = ("tv", "fetgv", "lapfetgv")


@dataclass(frozen=True)
class SplitTerm:
    name: str
    operator: sp.csr_matrix
    offset: np.ndarray
    weights: np.ndarray
    group: int
    alpha: float
    penalty_slot: int

    @property
    def n_groups(self) -> int:
        return len(self.weights)

    @property
    def row_weights(self) -> np.ndarray:
        return np.repeat(self.weights, self.group)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """K x + c reshaped to (groups, group size)."""
        return (self.operator @ x + self.offset).reshape(-1, self.group)

    def value(self, x: np.ndarray) -> float:
        v = self.apply(x)
        return float(self.alpha * np.sum(self.weights * np.sqrt(np.einsum("ij,ij->i", v, v))))


@dataclass
class SplitProblem:
    mode: str
    n_unknowns: int
    terms: List[SplitTerm]
    fidelity: np.ndarray
    data: np.ndarray
    kernel_dimension: int = 0
    proximal: float = 0.0
    mesh: Optional[TriMesh] = None
    u_slice: Optional[slice] = None
    w_slice: Optional[slice] = None
    w_embedding: Optional[sp.csr_matrix] = None
    fixed_u: Optional[np.ndarray] = None

    def u_of(self, x: np.ndarray) -> np.ndarray:
        if self.u_slice is None:
            return self.fixed_u
        return x[self.u_slice]

    def w_of(self, x: np.ndarray) -> np.ndarray:
        if self.w_slice is None:
            return None
        w = x[self.w_slice]
        return self.w_embedding @ w if self.w_embedding is not None else w


def objective(problem: SplitProblem, x: np.ndarray) -> float:
    """Full objective: weighted least-squares fidelity plus every regularization term."""
    r = x - problem.data
    value = 0.5 * float(np.sum(problem.fidelity * r * r))
    return value + sum(t.value(x) for t in problem.terms)


def _diag(values) -> sp.csr_matrix:
    return sp.diags(np.asarray(values, dtype=float), format="csr")


def interior_embedding(mesh: TriMesh) -> sp.csr_matrix:
    """(nE, nI) matrix placing interior-edge DOFs into a full RT DOF vector (boundary DOFs zero)."""
    ii = mesh.interior_edges
    return sp.csr_matrix((np.ones(len(ii)), (ii, np.arange(len(ii)))), shape=(mesh.n_edges, len(ii)))


def _components_without_data(mesh: TriMesh, fidelity: np.ndarray) -> int:
    count, labels = connected_components(dual_graph(mesh))
    observed = np.bincount(labels, weights=(fidelity > 0).astype(float), minlength=count)
    return int(np.count_nonzero(observed == 0))


def _affine_kernel_dimension(mesh: TriMesh, fidelity: np.ndarray) -> int:
    """Per component: 3 - rank of (1, m_x, m_y) over observed triangles."""
    count, labels = connected_components(dual_graph(mesh))
    pts = mesh.circumcenters[:, :2]
    scale = max(mesh.diameter, 1.0)
    dim = 0
    for comp in range(count):
        obs = (labels == comp) & (fidelity > 0)
        if not np.any(obs):
            dim += 3
            continue
        rows = np.column_stack([np.ones(np.count_nonzero(obs)), pts[obs] / scale])
        dim += 3 - int(np.linalg.matrix_rank(rows, tol=1e-10 * np.sqrt(len(rows))))
    return dim


def _numeric_kernel_dimension(matrix: sp.spmatrix, limit: int = 4000) -> int:
    n = matrix.shape[0]
    if n > limit:
        logger.debug("Skipping numeric kernel check for %d unknowns", n)
        return 0
    eig = np.linalg.eigvalsh(matrix.toarray())
    top = max(float(np.max(np.abs(eig))), 1e-300)
    return int(np.count_nonzero(eig <= 1e-10 * top))


def mesh_problem(
    mesh: TriMesh,
    regularizer: str,
    p: TgvParams,
    data: Optional[np.ndarray] = None,
    fidelity: Optional[np.ndarray] = None,
    u: Optional[np.ndarray] = None,
) -> SplitProblem:
    """
    Build the split problem of one mesh regularizer.

    With `u` given, u is fixed and only w is unknown (functional evaluation, no data term);
    otherwise x = (u, w) with the weighted data term on `fidelity`.
    """
    if regularizer not in MESH_MODES:
        raise ValueError(f"Unknown mesh regularizer '{regularizer}'")
    ops = fe_operators(mesh)
    n_t, n_e, n_i = mesh.n_triangles, mesh.n_edges, mesh.n_interior
    ii = mesh.interior_edges
    len_i = mesh.lengths[ii]
    evaluate = u is not None

    if evaluate:
        u = np.asarray(u, dtype=float)
        if u.shape != (n_t,):
            raise MeshMismatch(f"u has shape {u.shape}, mesh has {n_t} triangles")
    else:
        data = np.asarray(data, dtype=float)
        fidelity = np.asarray(fidelity, dtype=float)
        if data.shape != (n_t,) or fidelity.shape != (n_t,):
            raise MeshMismatch("Data and fidelity weights need one value per triangle")

    def with_u(block_u, block_w):
        # evaluation mode moves the u block into the offset
        if evaluate:
            return block_w, block_u @ u
        return sp.hstack([block_u, block_w], format="csr"), np.zeros(block_u.shape[0])

    terms: List[SplitTerm] = []
    if regularizer == "tv":
        if evaluate:
            raise ValueError("TV has no auxiliary field to minimize over; evaluate it directly")
        terms.append(SplitTerm("d0", ops.jump.tocsr(), np.zeros(n_i), len_i, 1, p.alpha1, 0))
        n_w = 0
        w_embedding = None
    elif regularizer == "fetgv":
        op, off = with_u(ops.jump, _diag(mesh.h_E[ii]) @ ops.normal_trace)
        terms.append(SplitTerm("d0", op, off, len_i, 1, p.alpha1, 0))
        op, off = with_u(sp.csr_matrix((4 * n_t, n_t)), ops.gradient)
        terms.append(SplitTerm("D1", op, off, mesh.areas.copy(), 4, p.alpha0, 1))
        op, off = with_u(sp.csr_matrix((4 * n_i, n_t)), ops.endpoint_jump)
        terms.append(SplitTerm("d2", op, off, np.repeat(0.5 * len_i, 2), 2, p.alpha0, 2))
        n_w = n_e
        w_embedding = None
    else:
        embed = interior_embedding(mesh)
        op, off = with_u(ops.jump, _diag(1.0 / len_i ** 2))
        terms.append(SplitTerm("d0", op, off, len_i, 1, p.alpha1, 0))
        op, off = with_u(sp.csr_matrix((n_t, n_t)), (ops.divergence @ embed).tocsr())
        terms.append(SplitTerm("div", op, off, mesh.areas.copy(), 1, p.alpha0, 1))
        n_w = n_i
        w_embedding = embed

    if evaluate:
        problem = SplitProblem(
            mode=f"{regularizer}-eval",
            n_unknowns=n_w,
            terms=terms,
            fidelity=np.zeros(n_w),
            data=np.zeros(n_w),
            mesh=mesh,
            w_slice=slice(0, n_w),
            w_embedding=w_embedding,
            fixed_u=u,
        )
        if regularizer == "fetgv":
            # constant fields with h_E <w, mu_plus> = 0 everywhere stay undetermined
            problem.proximal = 1e-6
        return problem

    problem = SplitProblem(
        mode=regularizer,
        n_unknowns=n_t + n_w,
        terms=terms,
        fidelity=np.concatenate([fidelity, np.zeros(n_w)]),
        data=np.concatenate([data, np.zeros(n_w)]),
        mesh=mesh,
        u_slice=slice(0, n_t),
        w_slice=slice(n_t, n_t + n_w) if n_w else None,
        w_embedding=w_embedding,
    )
    if regularizer == "fetgv":
        if mesh.is_surface:
            problem.kernel_dimension = -1  # resolved numerically on assembly
        else:
            problem.kernel_dimension = _affine_kernel_dimension(mesh, fidelity)
    else:
        problem.kernel_dimension = _components_without_data(mesh, fidelity)
    return problem


def _penalized_matrix(problem: SplitProblem, penalties: PenaltyParams) -> sp.csr_matrix:
    a = _diag(problem.fidelity)
    for t in problem.terms:
        lam = penalties.slot(t.penalty_slot)
        a = a + lam * (t.operator.T @ _diag(t.row_weights) @ t.operator)
    return a.tocsr()


def _damping(problem: SplitProblem, base: sp.spmatrix) -> float:
    if problem.proximal <= 0:
        return 0.0
    diag = base.diagonal()
    top = float(np.max(diag)) if diag.size else 0.0
    return problem.proximal * (top if top > 0 else 1.0)


def system_matrix(problem: SplitProblem, penalties: PenaltyParams) -> sp.csr_matrix:
    """F + sum_k lambda_k K_k^T W_k K_k, plus proximal damping for evaluation problems that need it."""
    a = _penalized_matrix(problem, penalties)
    damping = _damping(problem, a)
    if damping:
        a = a + damping * sp.identity(problem.n_unknowns, format="csr")
    # exact symmetry; the triple products agree only up to rounding
    return ((a + a.T) * 0.5).tocsr()


RhsBuilder = Callable[..., np.ndarray]


def quadratic_system(problem: SplitProblem, penalties: PenaltyParams) -> Tuple[SparseSpd, RhsBuilder]:
    """
    Assemble the (u, w) subproblem once.

    Returns the SPD system and a builder mapping (data, d, b[, x_prev]) to the right-hand side.
    Raises SingularSystem when the data term does not pin the regularizer's kernel.
    """
    damping = _damping(problem, _penalized_matrix(problem, penalties))
    matrix = system_matrix(problem, penalties)
    kernel = problem.kernel_dimension
    if kernel < 0:
        kernel = _numeric_kernel_dimension(matrix)
        problem.kernel_dimension = kernel
    if kernel > 0 and not damping:
        raise SingularSystem(kernel)

    system = SparseSpd(matrix)
    weighted_t = [
        (penalties.slot(t.penalty_slot) * (t.operator.T @ _diag(t.row_weights))).tocsr() for t in problem.terms
    ]

    def rhs(data, d, b, x_prev=None) -> np.ndarray:
        out = problem.fidelity * data
        for wt, t, dk, bk in zip(weighted_t, problem.terms, d, b):
            out = out + wt @ (dk.ravel() - t.offset - bk.ravel())
        if damping and x_prev is not None:
            out = out + damping * x_prev
        return out

    return system, rhs


def assemble_quadratic(
    mesh: TriMesh,
    fidelity_weights,
    pp: PenaltyParams,
    mode: str = "fetgv",
    u: Optional[np.ndarray] = None,
) -> Tuple[SparseSpd, RhsBuilder]:
    """
    Subproblem system of a mesh regularizer for the given per-triangle fidelity weights.

    mode is one of tv, fetgv, lapfetgv or eval-only (FE-TGV with u fixed, which requires `u`).
    The system matrix does not depend on the regularization weights.
    """
    unit = TgvParams(alpha0=1.0, alpha1=1.0)
    if mode == "eval-only":
        if u is None:
            raise ValueError("eval-only mode needs the fixed u")
        problem = mesh_problem(mesh, "fetgv", unit, u=u)
    else:
        weights = np.asarray(fidelity_weights, dtype=float)
        problem = mesh_problem(mesh, mode, unit, data=np.zeros(mesh.n_triangles), fidelity=weights)
    return quadratic_system(problem, pp)


__all__ = [
    "MESH_MODES",
    "SplitTerm",
    "SplitProblem",
    "objective",
    "interior_embedding",
    "mesh_problem",
    "system_matrix",
    "quadratic_system",
    "assemble_quadratic",
]
