"""
Mesh + per-triangle signal container (ASCII PLY).

    ply
    format ascii 1.0
    comment fetgv-signal channels K
    comment pixel_grid M N h            (pixel-split meshes only)
    element vertex nV
    property double x
    property double y
    property double z                   (surfaces only)
    element face nT
    property list uchar int vertex_indices
    property double <channel>           (K times)
    end_header
    <x> <y> [<z>]                       (nV lines)
    3 <a> <b> <c> <c_1> ... <c_K>       (nT lines)

Floats are written with repr(), so read(write(x)) reproduces every value bit for bit.
Inpainting masks use the same container with one 0/1 channel.
"""
import logging
import os
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import MeshFormatError, MeshMismatch
from ..fespace.fields import Dg0Field
from ..mesh.trimesh import TriMesh

logger = logging.getLogger(__name__)

DEFAULT_CHANNEL_NAMES = {1: ["value"], 3: ["red", "green", "blue"]}


def _channel_names(k: int, names: Optional[Sequence[str]]) -> List[str]:
    if names is not None:
        if len(names) != k:
            raise ValueError("One name per channel is required")
        return list(names)
    return DEFAULT_CHANNEL_NAMES.get(k, [f"c{i}" for i in range(k)])


def write_mesh_signal(path: str, mesh: TriMesh, values, channel_names: Optional[Sequence[str]] = None) -> str:
    """
    Write `mesh` and its per-triangle payload.

    `values` is a Dg0Field, a list of Dg0Fields (channels) or an array of shape (nT,) or (nT, K).
    """
    if isinstance(values, Dg0Field):
        payload = values.values[:, None]
    elif isinstance(values, (list, tuple)) and values and isinstance(values[0], Dg0Field):
        payload = np.column_stack([f.values for f in values])
    else:
        payload = np.asarray(values, dtype=float)
        if payload.ndim == 1:
            payload = payload[:, None]
    if payload.shape[0] != mesh.n_triangles:
        raise MeshMismatch(f"Payload has {payload.shape[0]} rows, mesh has {mesh.n_triangles} triangles")
    if not np.all(np.isfinite(payload)):
        raise ValueError("Channel values must be finite")
    k = payload.shape[1]
    names = _channel_names(k, channel_names)
    coords = mesh.coords()

    lines = ["ply", "format ascii 1.0", f"comment fetgv-signal channels {k}"]
    if mesh.pixel_grid is not None:
        m, n, h = mesh.pixel_grid
        lines.append(f"comment pixel_grid {int(m)} {int(n)} {float(h)!r}")
    lines.append(f"element vertex {mesh.n_vertices}")
    lines += [f"property double {axis}" for axis in "xyz"[: mesh.dim]]
    lines.append(f"element face {mesh.n_triangles}")
    lines.append("property list uchar int vertex_indices")
    lines += [f"property double {name}" for name in names]
    lines.append("end_header")
    for row in coords:
        lines.append(" ".join(repr(float(c)) for c in row))
    for tri, vals in zip(mesh.triangles, payload):
        lines.append("3 " + " ".join(str(int(v)) for v in tri) + " " + " ".join(repr(float(x)) for x in vals))

    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    logger.debug("Wrote %s (%d triangles, %d channel(s))", path, mesh.n_triangles, k)
    return path


def read_mesh_signal(path: str) -> Tuple[TriMesh, np.ndarray, List[str]]:
    """Read a container written by write_mesh_signal; returns (mesh, payload (nT, K), channel names)."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = f.read().splitlines()
    except OSError as exc:
        raise MeshFormatError(f"Cannot read {path}: {exc}") from exc
    if not raw or raw[0].strip() != "ply":
        raise MeshFormatError(f"{path}: missing 'ply' magic line")

    n_vertices = n_faces = None
    vertex_props: List[str] = []
    face_props: List[str] = []
    pixel_grid = None
    current = None
    body_start = None
    for idx, line in enumerate(raw[1:], start=1):
        parts = line.split()
        if not parts:
            continue
        key = parts[0]
        if key == "format":
            if parts[1] != "ascii":
                raise MeshFormatError(f"{path}: only ASCII PLY is supported")
        elif key == "comment":
            if len(parts) == 5 and parts[1] == "pixel_grid":
                pixel_grid = (int(parts[2]), int(parts[3]), float(parts[4]))
        elif key == "element":
            current = parts[1]
            if current == "vertex":
                n_vertices = int(parts[2])
            elif current == "face":
                n_faces = int(parts[2])
            else:
                raise MeshFormatError(f"{path}: unexpected element '{current}'")
        elif key == "property":
            if current == "vertex":
                vertex_props.append(parts[-1])
            elif current == "face" and parts[1] != "list":
                face_props.append(parts[-1])
        elif key == "end_header":
            body_start = idx + 1
            break
    if body_start is None or n_vertices is None or n_faces is None:
        raise MeshFormatError(f"{path}: incomplete header")
    if vertex_props not in (["x", "y"], ["x", "y", "z"]):
        raise MeshFormatError(f"{path}: vertex properties must be x y [z], got {vertex_props}")

    body = [line for line in raw[body_start:] if line.strip()]
    if len(body) != n_vertices + n_faces:
        raise MeshFormatError(f"{path}: expected {n_vertices + n_faces} data lines, found {len(body)}")
    try:
        coords = np.array([[float(x) for x in line.split()] for line in body[:n_vertices]], dtype=float)
        faces, payload = [], []
        for line in body[n_vertices:]:
            parts = line.split()
            count = int(parts[0])
            if count != 3:
                raise MeshFormatError(f"{path}: only triangles are supported (found a {count}-gon)")
            faces.append([int(v) for v in parts[1:4]])
            payload.append([float(x) for x in parts[4:]])
    except ValueError as exc:
        raise MeshFormatError(f"{path}: malformed number ({exc})") from exc

    coords = coords.reshape(n_vertices, len(vertex_props))
    payload = np.array(payload, dtype=float).reshape(n_faces, len(face_props))
    mesh = TriMesh(coords, np.array(faces, dtype=np.int64).reshape(n_faces, 3), pixel_grid=pixel_grid)
    return mesh, payload, face_props


def read_fields(path: str) -> Tuple[TriMesh, List[Dg0Field]]:
    """Read a container and return one Dg0Field per channel."""
    mesh, payload, _ = read_mesh_signal(path)
    return mesh, [Dg0Field(mesh, payload[:, k]) for k in range(payload.shape[1])]


def read_mask(path: str, mesh: Optional[TriMesh] = None) -> np.ndarray:
    """Observed-triangle mask stored as a single 0/1 channel."""
    mask_mesh, payload, _ = read_mesh_signal(path)
    if payload.shape[1] != 1:
        raise MeshFormatError(f"{path}: a mask has exactly one channel")
    if mesh is not None and not mesh.same_as(mask_mesh):
        raise MeshMismatch("Mask mesh differs from the data mesh")
    return payload[:, 0] > 0.5


__all__ = ["write_mesh_signal", "read_mesh_signal", "read_fields", "read_mask"]
