"""
Synthetic test data for the desk-scale experiments.

    case 1  ramp image with an inverted square, on the pixel grid and its pixel split
    case 2  the same picture sampled on a random Delaunay mesh
    case 3  a smooth height-field surface carrying an RGB signal
    case 4  a pixel image with text-like bars removed (inpainting)
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial import Delaunay

from ..fespace.fields import Dg0Field
from ..functionals.grid import GridImage
from ..mesh.trimesh import TriMesh
from .conversion import image_to_mesh, pixel_split_mesh

logger = logging.getLogger(__name__)


def ramp_with_square(x, y, width: float, height: float) -> np.ndarray:
    """Linear ramp in x on [0, 1] whose central square (half the size of the domain) is inverted."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ramp = x / width
    inside = (np.abs(x - 0.5 * width) < 0.25 * width) & (np.abs(y - 0.5 * height) < 0.25 * height)
    return np.where(inside, 1.0 - ramp, ramp)


def ramp_square_image(m: int = 32, n: Optional[int] = None, h: float = 1.0) -> GridImage:
    """Case 1 picture sampled at pixel centers."""
    n = n or m
    i, j = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    return GridImage(ramp_with_square((i + 0.5) * h, (j + 0.5) * h, m * h, n * h), h)


def random_delaunay_mesh(n_points: int = 100, seed: int = 0, width: float = 1.0, height: float = 1.0) -> TriMesh:
    """
    Delaunay triangulation of the four corners, a few boundary points per side and
    uniformly drawn interior points (about 2 n_points triangles).
    """
    rng = np.random.default_rng(seed)
    per_side = max(2, int(np.sqrt(n_points)) // 2)
    s = np.linspace(0.0, 1.0, per_side + 2)[1:-1]
    boundary = np.concatenate([
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        np.column_stack([s, np.zeros_like(s)]),
        np.column_stack([s, np.ones_like(s)]),
        np.column_stack([np.zeros_like(s), s]),
        np.column_stack([np.ones_like(s), s]),
    ])
    interior = rng.uniform(0.05, 0.95, size=(max(n_points - len(boundary), 1), 2))
    points = np.concatenate([boundary, interior]) * np.array([width, height])
    tri = Delaunay(points)
    # drop slivers Delaunay may leave along the hull
    p = points[tri.simplices]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    twice_area = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    keep = twice_area > 1e-10 * width * height
    return TriMesh(points, tri.simplices[keep])


def unstructured_case(n_points: int = 1000, seed: int = 0, width: float = 32.0) -> Tuple[TriMesh, Dg0Field]:
    """Case 2: the ramp-with-square picture sampled at the triangle centroids of a random mesh."""
    mesh = random_delaunay_mesh(n_points, seed, width, width)
    c = mesh.centroids
    return mesh, Dg0Field(mesh, ramp_with_square(c[:, 0], c[:, 1], width, width))


def height_field_surface(n: int = 16, amplitude: float = 0.2) -> TriMesh:
    """Pixel-split grid on [0, 1]^2 lifted to z = amplitude sin(pi x) sin(pi y)."""
    flat = pixel_split_mesh(n, n, 1.0 / n)
    xy = flat.vertices[:, :2]
    z = amplitude * np.sin(np.pi * xy[:, 0]) * np.sin(np.pi * xy[:, 1])
    return TriMesh(np.column_stack([xy, z]), flat.triangles)


def surface_rgb_case(n: int = 16, amplitude: float = 0.2) -> Tuple[TriMesh, List[Dg0Field]]:
    """Case 3: a smooth color blend with a dark disk, sampled at the centroids of a height field."""
    mesh = height_field_surface(n, amplitude)
    c = mesh.centroids
    x, y = c[:, 0], c[:, 1]
    disk = (x - 0.6) ** 2 + (y - 0.4) ** 2 < 0.2 ** 2
    red = np.where(disk, 0.1, 0.2 + 0.6 * x)
    green = np.where(disk, 0.1, 0.2 + 0.6 * y)
    blue = np.where(disk, 0.2, 0.8 - 0.5 * x * y)
    return mesh, [Dg0Field(mesh, red), Dg0Field(mesh, green), Dg0Field(mesh, blue)]


def text_bar_mask(m: int = 32, n: Optional[int] = None, bar: int = 2) -> np.ndarray:
    """
    (m, n) boolean array of observed pixels; False on a few horizontal and vertical
    strokes of width `bar`, roughly like handwritten text over the image.
    """
    n = n or m
    observed = np.ones((m, n), dtype=bool)
    for k, frac in enumerate((0.2, 0.45, 0.7)):
        j0 = int(frac * n)
        i_lo, i_hi = int(0.1 * m) + 3 * k, int(0.9 * m) - 2 * k
        observed[i_lo:i_hi, j0:j0 + bar] = False
    for frac in (0.3, 0.65):
        i0 = int(frac * m)
        observed[i0:i0 + bar, int(0.15 * n):int(0.8 * n)] = False
    return observed


def inpainting_case(m: int = 32, bar: int = 2) -> Tuple[TriMesh, Dg0Field, np.ndarray]:
    """Case 4: case 1 picture on its pixel split, and the per-triangle observed mask."""
    img = ramp_square_image(m)
    mesh, u = image_to_mesh(img)
    observed = np.repeat(text_bar_mask(m, m, bar).ravel(), 2)
    logger.debug("Inpainting case: %d of %d triangles hidden", int((~observed).sum()), mesh.n_triangles)
    return mesh, u, observed


def disk_mask(mesh: TriMesh, center, radius: float) -> np.ndarray:
    """Triangles whose centroid lies within `radius` of `center` (the held-out set)."""
    center = np.asarray(center, dtype=float)
    d = np.linalg.norm(mesh.centroids[:, : len(center)] - center, axis=1)
    return d <= radius


__all__ = [
    "ramp_with_square",
    "ramp_square_image",
    "random_delaunay_mesh",
    "unstructured_case",
    "height_field_surface",
    "surface_rgb_case",
    "text_bar_mask",
    "inpainting_case",
    "disk_mask",
]
