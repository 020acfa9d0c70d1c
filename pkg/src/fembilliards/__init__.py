"""Finite-element eigenstates of Dirichlet quantum billiards."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    Circle,
    EquilateralTriangle,
    InvalidSpec,
    Polygon,
    Rectangle,
    Region,
    RegularPolygon,
    SectorCutDisk,
    Stadium,
    StarPolygon,
    Triangle,
    build_region,
    parse_region,
)
from .mesh import MeshParams, TriMesh, generate_mesh, refine_half, validate_mesh  # noqa: E402
from .assembly import ElementBasis, assemble  # noqa: E402
from .eigensolve import SolverOpts, Spectrum, smallest_eigenpairs  # noqa: E402
from .pipeline import PipelineResult, run_pipeline  # noqa: E402

__all__ = [
    "Circle", "EquilateralTriangle", "InvalidSpec", "Polygon", "Rectangle", "Region",
    "RegularPolygon", "SectorCutDisk", "Stadium", "StarPolygon", "Triangle",
    "build_region", "parse_region", "MeshParams", "TriMesh", "generate_mesh", "refine_half",
    "validate_mesh", "ElementBasis", "assemble", "SolverOpts", "Spectrum",
    "smallest_eigenpairs", "PipelineResult", "run_pipeline",
]
