"""
Error hierarchy shared by the mesh, finite element, solver, quality and I/O layers.

Library code raises these; only the CLI turns them into exit codes.
"""
from typing import Any, Optional


class FetgvError(Exception):
    """Base class for every error raised by this package."""


class NonManifoldEdge(FetgvError):
    """An edge is shared by more than two triangles."""

    def __init__(self, v_a: int, v_b: int, count: int):
        self.edge = (v_a, v_b)
        self.count = count
        super().__init__(f"Edge ({v_a}, {v_b}) is shared by {count} triangles (at most 2 allowed)")


class DegenerateTriangle(FetgvError):
    """A triangle has (numerically) zero area."""

    def __init__(self, triangle: int, message: str = ""):
        self.triangle = triangle
        super().__init__(message or f"Triangle {triangle} is degenerate")


class BoundaryEdge(FetgvError):
    """A jump was requested on an edge that has only one incident triangle."""

    def __init__(self, edge: int):
        self.edge = edge
        super().__init__(f"Edge {edge} is a boundary edge; jumps are defined on interior edges only")


class MeshMismatch(FetgvError):
    """Fields or data live on different meshes, or sizes do not match the mesh."""


class BoundaryDofNonzero(FetgvError):
    """A field used in the Lap-FE-TGV path carries nonzero boundary normal fluxes."""


class SingularSystem(FetgvError):
    """The quadratic subproblem is not positive definite."""

    def __init__(self, kernel_dimension: int, message: str = ""):
        self.kernel_dimension = kernel_dimension
        super().__init__(
            message
            or f"System matrix is singular: kernel dimension {kernel_dimension} is not pinned by the data term"
        )


class NoConvergence(FetgvError):
    """The split Bregman loop hit its iteration limit before the residual tolerances."""

    def __init__(self, max_iter: int, best: Optional[Any] = None, report: Optional[Any] = None):
        self.max_iter = max_iter
        self.best = best
        self.report = report
        super().__init__(f"No convergence within {max_iter} iterations")


class SizeMismatch(FetgvError):
    """Two raster images have different shapes."""


class NotPixelSplit(FetgvError):
    """A mesh without a pixel-grid tag was passed where a pixel-split mesh is required."""


class SurfaceNotSupported(FetgvError):
    """An operation that is only defined for planar meshes was called on a surface mesh."""


class WindowMismatch(FetgvError):
    """MSSIM scores computed with different window configurations were compared."""


class MeshFormatError(FetgvError):
    """A mesh/signal or image file could not be parsed."""


__all__ = [
    "FetgvError",
    "NonManifoldEdge",
    "DegenerateTriangle",
    "BoundaryEdge",
    "MeshMismatch",
    "BoundaryDofNonzero",
    "SingularSystem",
    "NoConvergence",
    "SizeMismatch",
    "NotPixelSplit",
    "SurfaceNotSupported",
    "WindowMismatch",
    "MeshFormatError",
]
