"""
Pixel image <-> pixel-split triangle mesh.

Vertex (i, j) sits at (i h, j h) with index i (N + 1) + j. Pixel (i, j) has index
k = i N + j and is split along its lower-left to upper-right diagonal into
triangle 2k (below the diagonal) and triangle 2k + 1 (above it).
"""
from typing import Sequence, Tuple

import numpy as np

from ..core.errors import MeshMismatch, NotPixelSplit
from ..fespace.fields import Dg0Field
from ..functionals.grid import GridImage
from ..mesh.trimesh import TriMesh


def pixel_split_mesh(m: int, n: int, h: float = 1.0) -> TriMesh:
    """Two triangles per pixel of an m x n raster, tagged with its pixel grid."""
    i, j = np.meshgrid(np.arange(m + 1), np.arange(n + 1), indexing="ij")
    vertices = np.column_stack([i.ravel() * h, j.ravel() * h]).astype(float)

    pi, pj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    pi, pj = pi.ravel(), pj.ravel()
    v00 = pi * (n + 1) + pj
    v10 = (pi + 1) * (n + 1) + pj
    v11 = (pi + 1) * (n + 1) + pj + 1
    v01 = pi * (n + 1) + pj + 1
    tris = np.empty((2 * m * n, 3), dtype=np.int64)
    tris[0::2] = np.column_stack([v00, v10, v11])
    tris[1::2] = np.column_stack([v00, v11, v01])
    return TriMesh(vertices, tris, pixel_grid=(m, n, float(h)))


def image_to_mesh(img: GridImage) -> Tuple[TriMesh, Dg0Field]:
    """Pixel-split mesh of `img` and the DG0 field carrying each pixel value on both of its triangles."""
    m, n = img.shape
    mesh = pixel_split_mesh(m, n, img.h)
    return mesh, Dg0Field(mesh, np.repeat(img.values.ravel(), 2))


def channels_to_mesh(channels: Sequence[GridImage]) -> Tuple[TriMesh, list]:
    """One shared pixel mesh for several equally sized channels."""
    if not channels:
        raise ValueError("At least one channel is required")
    mesh, first = image_to_mesh(channels[0])
    fields = [first]
    for ch in channels[1:]:
        if ch.shape != channels[0].shape:
            raise MeshMismatch("Channels differ in size")
        fields.append(Dg0Field(mesh, np.repeat(ch.values.ravel(), 2)))
    return mesh, fields


def mesh_to_image(mesh: TriMesh, u: Dg0Field) -> GridImage:
    """Average the two triangle values of every pixel of a pixel-split mesh."""
    if mesh.pixel_grid is None:
        raise NotPixelSplit("Mesh carries no pixel grid tag")
    m, n, h = mesh.pixel_grid
    m, n = int(m), int(n)
    if mesh.n_triangles != 2 * m * n:
        raise NotPixelSplit(f"Pixel grid {m}x{n} does not match {mesh.n_triangles} triangles")
    values = np.asarray(u.values if isinstance(u, Dg0Field) else u, dtype=float)
    if values.shape != (mesh.n_triangles,):
        raise MeshMismatch("Field does not live on this mesh")
    pixels = 0.5 * (values[0::2] + values[1::2])
    return GridImage(pixels.reshape(m, n), h)


__all__ = ["pixel_split_mesh", "image_to_mesh", "channels_to_mesh", "mesh_to_image"]
