"""
Soft shrinkage: the proximal map of delta * |.| for absolute value, Euclidean and Frobenius norms.
"""
import numpy as np


def shrink(x, delta: float):
    """
    shrink(x, delta) = x / |x| * max(|x| - delta, 0), with shrink(0, delta) = 0.

    Scalars use the absolute value, vectors the Euclidean norm and matrices the
    Frobenius norm. Returns the same type/shape as `x`.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    arr = np.asarray(x, dtype=float)
    norm = float(np.sqrt(np.sum(arr * arr)))
    if norm <= delta or norm == 0.0:
        out = np.zeros_like(arr)
    else:
        out = arr * ((norm - delta) / norm)
    if np.ndim(x) == 0:
        return float(out)
    return out


def shrink_groups(v: np.ndarray, delta) -> np.ndarray:
    """
    Row-wise shrinkage of an (n, g) array: each row is one group measured in the Euclidean norm.

    `delta` is a scalar or an (n,) array of thresholds.
    """
    v = np.asarray(v, dtype=float)
    norms = np.sqrt(np.einsum("ij,ij->i", v, v))
    keep = np.maximum(norms - delta, 0.0)
    scale = np.divide(keep, norms, out=np.zeros_like(norms), where=norms > 0)
    return v * scale[:, None]


__all__ = ["shrink", "shrink_groups"]
