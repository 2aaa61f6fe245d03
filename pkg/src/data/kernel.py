from typing import Tuple

import numpy as np

from ..core.errors import SurfaceNotSupported
from ..fespace.fields import Dg0Field, Rt1Field
from ..fespace.operators import constant_rt_field
from ..mesh.trimesh import TriMesh


def make_kernel_element(mesh: TriMesh, a: float, b: float, c: float) -> Tuple[Dg0Field, Rt1Field]:
    """
    The affine function a + b x + c y sampled at the circumcenters, paired with the
    constant field (b, c). FE-TGV vanishes on every such pair.
    """
    if mesh.is_surface:
        raise SurfaceNotSupported("Kernel elements are defined for planar meshes only")
    m = mesh.circumcenters
    u = Dg0Field(mesh, a + b * m[:, 0] + c * m[:, 1])
    return u, constant_rt_field(mesh, np.array([b, c], dtype=float))


__all__ = ["make_kernel_element"]
