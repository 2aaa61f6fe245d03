"""
Symmetric positive definite sparse systems with a cached factorization.
"""
import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg, splu

from ..core.config import LINEAR_SOLVE_RTOL
from ..core.errors import SingularSystem

logger = logging.getLogger(__name__)


class SparseSpd:
    """
    SPD matrix with a reusable LU factorization (SuperLU through scipy).

    The factorization is computed on first use and reused by every solve. A solve
    whose relative residual exceeds `rtol` gets a few steps of iterative refinement
    and, failing that, a conjugate gradient pass warm-started from the LU solution.
    """

    def __init__(self, matrix, rtol: float = LINEAR_SOLVE_RTOL, check_symmetry: bool = True):
        a = sp.csc_matrix(matrix, dtype=float)
        if a.shape[0] != a.shape[1]:
            raise ValueError("SparseSpd requires a square matrix")
        if check_symmetry and a.nnz:
            scale = abs(a).max()
            asym = abs(a - a.T).max() if a.nnz else 0.0
            if asym > 1e-12 * scale:
                raise ValueError(f"Matrix is not symmetric (max asymmetry {asym:.3e})")
        self.matrix = a
        self.rtol = rtol
        self._lu = None

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def factorized(self) -> bool:
        return self._lu is not None

    def factorize(self) -> "SparseSpd":
        if self._lu is None:
            try:
                self._lu = splu(self.matrix)
            except RuntimeError as exc:
                raise SingularSystem(-1, f"Factorization failed: {exc}") from exc
        return self

    def _residual(self, x: np.ndarray, rhs: np.ndarray) -> float:
        scale = np.max(np.abs(rhs))
        if scale == 0.0:
            return float(np.max(np.abs(self.matrix @ x)))
        return float(np.max(np.abs(rhs - self.matrix @ x)) / scale)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        self.factorize()
        rhs = np.asarray(rhs, dtype=float)
        x = self._lu.solve(rhs)
        res = self._residual(x, rhs)
        refinements = 0
        while res > self.rtol and refinements < 3:
            x = x + self._lu.solve(rhs - self.matrix @ x)
            res = self._residual(x, rhs)
            refinements += 1
        if res > self.rtol:
            logger.debug("LU residual %.3e above %.1e after refinement, switching to CG", res, self.rtol)
            x, info = cg(self.matrix, rhs, x0=x, rtol=self.rtol, maxiter=10 * self.dimension)
            res = self._residual(x, rhs)
            if info != 0 or not np.all(np.isfinite(x)):
                raise SingularSystem(-1, f"Linear solve did not reach the residual contract (residual {res:.3e})")
        return x

    def __repr__(self) -> str:
        return f"SparseSpd(dimension={self.dimension}, nnz={self.matrix.nnz}, factorized={self.factorized})"


__all__ = ["SparseSpd"]
