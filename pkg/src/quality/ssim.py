"""
Structural similarity for pixel grids and for DG0 fields on unstructured meshes.

Mesh windows are hop balls in the dual graph with area-weighted population moments;
the mean over triangles is weighted by area. Grid windows are squares truncated at
the image border and the mean is a plain pixel average.
"""
import logging
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy.ndimage import uniform_filter

from ..core.errors import MeshMismatch, SizeMismatch, WindowMismatch
from ..core.models import SsimConfig
from ..data.conversion import mesh_to_image
from ..fespace.fields import Dg0Field, same_mesh
from ..functionals.grid import GridImage
from ..mesh.dual_graph import ball_matrix, dual_graph, graph_distance_ball

logger = logging.getLogger(__name__)

Stats = Tuple[float, float, float, float, float]


def ssim_from_stats(mu_u, mu_v, var_u, var_v, cov_uv, c1: float, c2: float):
    """((2 mu_u mu_v + C1)(2 cov + C2)) / ((mu_u^2 + mu_v^2 + C1)(var_u + var_v + C2)); works on arrays."""
    num = (2.0 * mu_u * mu_v + c1) * (2.0 * cov_uv + c2)
    den = (mu_u * mu_u + mu_v * mu_v + c1) * (var_u + var_v + c2)
    return num / den


def clamp_moments(var_u, var_v, cov_uv):
    """Variances clipped at zero and the covariance clipped to the Cauchy-Schwarz bound; works on arrays."""
    var_u = np.maximum(var_u, 0.0)
    var_v = np.maximum(var_v, 0.0)
    bound = np.sqrt(var_u * var_v)
    return var_u, var_v, np.clip(cov_uv, -bound, bound)


def mesh_window_stats(u: Dg0Field, v: Dg0Field, triangle: int, radius: int) -> Stats:
    """Area-weighted means, variances and covariance of u and v over the hop ball of `triangle`."""
    mesh = same_mesh(u, v)
    ball = np.fromiter(graph_distance_ball(dual_graph(mesh), triangle, radius), dtype=np.int64)
    area = mesh.areas[ball]
    total = area.sum()
    uu, vv = u.values[ball], v.values[ball]
    mu_u = float(np.sum(area * uu) / total)
    mu_v = float(np.sum(area * vv) / total)
    var_u = float(np.sum(area * (uu - mu_u) ** 2) / total)
    var_v = float(np.sum(area * (vv - mu_v) ** 2) / total)
    cov = float(np.sum(area * (uu - mu_u) * (vv - mu_v)) / total)
    return mu_u, mu_v, var_u, var_v, cov


def ssim_at(u: Dg0Field, v: Dg0Field, triangle: int, cfg: SsimConfig) -> float:
    mu_u, mu_v, var_u, var_v, cov = mesh_window_stats(u, v, triangle, cfg.radius)
    return float(ssim_from_stats(mu_u, mu_v, var_u, var_v, cov, cfg.c1, cfg.c2))


def mesh_ssim_map(u: Dg0Field, v: Dg0Field, cfg: SsimConfig) -> np.ndarray:
    """SSIM of every triangle's window, vectorized through the ball matrix."""
    mesh = same_mesh(u, v)
    balls = ball_matrix(dual_graph(mesh), cfg.radius).astype(float)
    weighted = balls.multiply(mesh.areas[None, :]).tocsr()
    total = weighted @ np.ones(mesh.n_triangles)
    a, b = u.values, v.values
    mu_u = (weighted @ a) / total
    mu_v = (weighted @ b) / total
    var_u = (weighted @ (a * a)) / total - mu_u * mu_u
    var_v = (weighted @ (b * b)) / total - mu_v * mu_v
    cov = (weighted @ (a * b)) / total - mu_u * mu_v
    var_u, var_v, cov = clamp_moments(var_u, var_v, cov)
    return ssim_from_stats(mu_u, mu_v, var_u, var_v, cov, cfg.c1, cfg.c2)


def grid_ssim_map(u: GridImage, v: GridImage, cfg: SsimConfig) -> np.ndarray:
    """SSIM of every pixel's square window (truncated at the border, no padding)."""
    if u.shape != v.shape:
        raise SizeMismatch(f"Images differ in size: {u.shape} vs {v.shape}")
    size = cfg.window
    count = uniform_filter(np.ones(u.shape), size=size, mode="constant")

    def mean(x):
        return uniform_filter(x, size=size, mode="constant") / count

    a, b = u.values, v.values
    mu_u, mu_v = mean(a), mean(b)
    var_u = mean(a * a) - mu_u * mu_u
    var_v = mean(b * b) - mu_v * mu_v
    cov = mean(a * b) - mu_u * mu_v
    var_u, var_v, cov = clamp_moments(var_u, var_v, cov)
    return ssim_from_stats(mu_u, mu_v, var_u, var_v, cov, cfg.c1, cfg.c2)


def mssim(u: Union[Dg0Field, GridImage], v: Union[Dg0Field, GridImage], cfg: SsimConfig = None) -> float:
    """
    Mean SSIM.

    Two Dg0Fields are scored with dual-graph windows and an area-weighted mean, unless
    cfg.mode is "grid" and the mesh is a pixel split, in which case they are rasterized
    first. Two GridImages always use square windows.
    """
    cfg = cfg or SsimConfig()
    if isinstance(u, GridImage) and isinstance(v, GridImage):
        return float(np.mean(grid_ssim_map(u, v, cfg)))
    if isinstance(u, Dg0Field) and isinstance(v, Dg0Field):
        if cfg.mode == "grid":
            return float(np.mean(grid_ssim_map(mesh_to_image(u.mesh, u), mesh_to_image(v.mesh, v), cfg)))
        areas = u.mesh.areas
        values = mesh_ssim_map(u, v, cfg)
        return float(np.sum(areas * values) / np.sum(areas))
    raise MeshMismatch("mssim needs two Dg0Fields or two GridImages")


def psnr(u: Union[Dg0Field, GridImage], v: Union[Dg0Field, GridImage], peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB (area-weighted MSE on meshes)."""
    if isinstance(u, GridImage) and isinstance(v, GridImage):
        if u.shape != v.shape:
            raise SizeMismatch(f"Images differ in size: {u.shape} vs {v.shape}")
        mse = float(np.mean((u.values - v.values) ** 2))
    else:
        mesh = same_mesh(u, v)
        mse = float(np.sum(mesh.areas * (u.values - v.values) ** 2) / mesh.total_area)
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / mse))


class ScoreRecord(BaseModel):
    """One scored reconstruction."""

    name: str = Field(..., description="Regularizer or run label")
    mssim: float
    ssim_fingerprint: str = Field(..., description="SsimConfig.fingerprint() of the windows used")
    alpha1: Optional[float] = None
    alpha0: Optional[float] = None


def compare_scores(records: Iterable[Union[ScoreRecord, dict]]) -> List[ScoreRecord]:
    """
    Rank records by MSSIM, best first.

    Scores computed with different windows are not comparable; mixing them raises WindowMismatch.
    """
    recs = [r if isinstance(r, ScoreRecord) else ScoreRecord(**r) for r in records]
    fingerprints = {r.ssim_fingerprint for r in recs}
    if len(fingerprints) > 1:
        raise WindowMismatch(f"Scores use different SSIM windows: {sorted(fingerprints)}")
    return sorted(recs, key=lambda r: r.mssim, reverse=True)


__all__ = [
    "ssim_from_stats",
    "clamp_moments",
    "mesh_window_stats",
    "ssim_at",
    "mesh_ssim_map",
    "grid_ssim_map",
    "mssim",
    "psnr",
    "ScoreRecord",
    "compare_scores",
]
