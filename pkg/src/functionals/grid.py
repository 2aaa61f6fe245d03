"""
Pixel-grid TGV reference discretization.

Pixel (i, j) has i along x (width M) and j along y (height N); images are stored as
(M, N) arrays. Forward differences vanish on the last row/column; backward differences
use the boundary rows v_0 / h and -v_{M-2} / h, so that the backward difference is the
negative adjoint of the forward one.
"""
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..core.models import PenaltyParams, TgvParams
from ..solver.problems import SplitProblem, SplitTerm
from ..solver.split_bregman import minimize_functional


class GridImage:
    """Rectangular grayscale raster with grid spacing h."""

    def __init__(self, values, h: float = 1.0):
        v = np.array(values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise ValueError(f"GridImage needs an (M, N) array with M, N >= 2, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("GridImage values must be finite")
        if not h > 0:
            raise ValueError("grid spacing h must be positive")
        self.values = v
        self.h = float(h)

    @property
    def width(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def __repr__(self) -> str:
        return f"GridImage(M={self.width}, N={self.height}, h={self.h})"


def forward_difference(v: np.ndarray, axis: int = 0, h: float = 1.0) -> np.ndarray:
    """(v_{i+1} - v_i) / h for i < M-1 and 0 for i = M-1, along `axis`."""
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    n = v.shape[axis]
    body = np.diff(v, axis=axis) / h
    idx = [slice(None)] * v.ndim
    idx[axis] = slice(0, n - 1)
    out[tuple(idx)] = body
    return out


def backward_difference(v: np.ndarray, axis: int = 0, h: float = 1.0) -> np.ndarray:
    """v_0 / h at i = 0, (v_i - v_{i-1}) / h inside, -v_{M-2} / h at i = M-1, along `axis`."""
    v = np.moveaxis(np.asarray(v, dtype=float), axis, 0)
    out = np.empty_like(v)
    n = v.shape[0]
    out[0] = v[0]
    out[1:n - 1] = v[1:n - 1] - v[0:n - 2]
    out[n - 1] = -v[n - 2]
    return np.moveaxis(out / h, 0, axis)


def forward_matrix(n: int, h: float = 1.0) -> sp.csr_matrix:
    """Sparse 1D forward difference with a zero last row."""
    i = np.arange(n - 1)
    rows = np.concatenate([i, i])
    cols = np.concatenate([i + 1, i])
    vals = np.concatenate([np.ones(n - 1), -np.ones(n - 1)]) / h
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def backward_matrix(n: int, h: float = 1.0) -> sp.csr_matrix:
    """Sparse 1D backward difference with the boundary rows; equals -forward_matrix(n, h).T."""
    return (-forward_matrix(n, h).T).tocsr()


def grid_forward_gradient(img: GridImage) -> Tuple[np.ndarray, np.ndarray]:
    return forward_difference(img.values, 0, img.h), forward_difference(img.values, 1, img.h)


def grid_backward_differences(img: GridImage) -> Tuple[np.ndarray, np.ndarray]:
    return backward_difference(img.values, 0, img.h), backward_difference(img.values, 1, img.h)


def symmetric_jacobian(w: np.ndarray, h: float = 1.0) -> np.ndarray:
    """
    Discrete symmetric Jacobian of w with shape (M, N, 2), built from backward differences.

    Returns (M, N, 2, 2).
    """
    a = backward_difference(w[..., 0], 0, h)
    c = backward_difference(w[..., 1], 1, h)
    b = 0.5 * (backward_difference(w[..., 0], 1, h) + backward_difference(w[..., 1], 0, h))
    return np.stack([np.stack([a, b], axis=-1), np.stack([b, c], axis=-1)], axis=-2)


def grid_tgv_objective(img: GridImage, w: np.ndarray, p: TgvParams) -> float:
    """alpha1 sum |grad u - w|_2 + alpha0 sum |E w|_F over pixels."""
    w = np.asarray(w, dtype=float)
    if w.shape != img.shape + (2,):
        raise ValueError(f"w must have shape {img.shape + (2,)}")
    gx, gy = grid_forward_gradient(img)
    first = np.sqrt((gx - w[..., 0]) ** 2 + (gy - w[..., 1]) ** 2)
    second = np.sqrt(np.sum(symmetric_jacobian(w, img.h) ** 2, axis=(-2, -1)))
    return float(p.alpha1 * first.sum() + p.alpha0 * second.sum())


def _interleave(blocks, n: int) -> sp.csr_matrix:
    """Stack component blocks of n rows each into pixel-major order (pixel, component)."""
    g = len(blocks)
    stacked = sp.vstack(blocks, format="csr")
    perm = (np.arange(g)[None, :] * n + np.arange(n)[:, None]).ravel()
    return stacked[perm]


def grid_operators(shape: Tuple[int, int], h: float = 1.0):
    """Forward (dx, dy) and backward (bx, by) difference matrices on C-ordered (M, N) arrays."""
    m, n = shape
    eye_m = sp.identity(m, format="csr")
    eye_n = sp.identity(n, format="csr")
    dx = sp.kron(forward_matrix(m, h), eye_n, format="csr")
    dy = sp.kron(eye_m, forward_matrix(n, h), format="csr")
    bx = sp.kron(backward_matrix(m, h), eye_n, format="csr")
    by = sp.kron(eye_m, backward_matrix(n, h), format="csr")
    return dx, dy, bx, by


def grid_tgv_problem(
    img: GridImage,
    p: TgvParams,
    observed: Optional[np.ndarray] = None,
    evaluate: bool = False,
) -> SplitProblem:
    """
    Split problem of the grid TGV.

    evaluate=True fixes u to the image and minimizes over w only; otherwise x = (u, w1, w2)
    with the data term 1/2 sum (u - f)^2 over observed pixels.
    """
    shape = img.shape
    n = img.values.size
    dx, dy, bx, by = grid_operators(shape, img.h)
    zero = sp.csr_matrix((n, n))
    neg = -sp.identity(n, format="csr")
    f = img.values.ravel()

    sym = _interleave([
        sp.hstack([bx, zero], format="csr"),
        0.5 * sp.hstack([by, bx], format="csr"),
        0.5 * sp.hstack([by, bx], format="csr"),
        sp.hstack([zero, by], format="csr"),
    ], n)

    if evaluate:
        first = _interleave([sp.hstack([neg, zero], format="csr"), sp.hstack([zero, neg], format="csr")], n)
        offset = _interleave([dx, dy], n) @ f
        terms = [
            SplitTerm("d0", first, offset, np.ones(n), 2, p.alpha1, 0),
            SplitTerm("D1", sym, np.zeros(4 * n), np.ones(n), 4, p.alpha0, 1),
        ]
        return SplitProblem(
            mode="gridtgv-eval", n_unknowns=2 * n, terms=terms,
            fidelity=np.zeros(2 * n), data=np.zeros(2 * n),
            w_slice=slice(0, 2 * n), fixed_u=f,
        )

    first = _interleave([sp.hstack([dx, neg, zero], format="csr"), sp.hstack([dy, zero, neg], format="csr")], n)
    second = sp.hstack([sp.csr_matrix((4 * n, n)), sym], format="csr")
    terms = [
        SplitTerm("d0", first, np.zeros(2 * n), np.ones(n), 2, p.alpha1, 0),
        SplitTerm("D1", second, np.zeros(4 * n), np.ones(n), 4, p.alpha0, 1),
    ]
    obs = np.ones(n, dtype=bool) if observed is None else np.asarray(observed, dtype=bool).ravel()
    if obs.shape != (n,):
        raise ValueError("Mask must have one entry per pixel")
    return SplitProblem(
        mode="gridtgv",
        n_unknowns=3 * n,
        terms=terms,
        fidelity=np.concatenate([obs.astype(float), np.zeros(2 * n)]),
        data=np.concatenate([f, np.zeros(2 * n)]),
        # the regularizer's kernel on the grid is the constants
        kernel_dimension=0 if np.any(obs) else 1,
        u_slice=slice(0, n),
        w_slice=slice(n, 3 * n),
    )


def grid_tgv_value(img: GridImage, p: TgvParams, tol: float,
                   penalties: PenaltyParams = None, max_iter: int = 5000) -> float:
    """min over w of grid_tgv_objective(img, w, p)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    problem = grid_tgv_problem(img, p, evaluate=True)
    value, _, _ = minimize_functional(problem, tol, penalties, max_iter=max_iter)
    return value


__all__ = [
    "GridImage",
    "forward_difference",
    "backward_difference",
    "forward_matrix",
    "backward_matrix",
    "grid_forward_gradient",
    "grid_backward_differences",
    "symmetric_jacobian",
    "grid_tgv_objective",
    "grid_operators",
    "grid_tgv_problem",
    "grid_tgv_value",
]
