"""Region -> mesh -> matrices -> certified spectrum, in one call."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import DofMap, assemble
from .eigensolve import SolverOpts, Spectrum, orthonormality_error, residual_report, smallest_eigenpairs
from .geometry import Region, build_region
from .mesh import MeshParams, TriMesh, generate_mesh, mesh_stats, validate_mesh

__all__ = ["PipelineResult", "PipelineError", "run_pipeline"]

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    """Wraps a failure with the name of the stage that raised it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(eq=False)
class PipelineResult:
    region: Region
    mesh: TriMesh
    K: object
    M: object
    dofs: DofMap
    spectrum: Spectrum
    residuals: np.ndarray
    orthonormality: float
    timings: dict = field(default_factory=dict)

    @property
    def k(self) -> np.ndarray:
        return self.spectrum.k

    def stats(self) -> dict:
        out = mesh_stats(self.mesh)
        out["n_dof"] = self.dofs.n_dof
        return out


def run_pipeline(region, params: MeshParams, order: int = 2, opts: SolverOpts | int = 16,
                 check_mesh: bool = True) -> PipelineResult:
    """Mesh ``region``, assemble order-``order`` elements and solve.

    ``opts`` may be a plain state count. Residuals and M-orthonormality are
    recomputed independently of the solver before returning.
    """
    if not isinstance(opts, SolverOpts):
        opts = SolverOpts(int(opts))
    stage = "geometry"
    timings = {}
    try:
        region = build_region(region)
        stage = "mesh"
        t = time.perf_counter()
        mesh = generate_mesh(region, params)
        if check_mesh:
            problems = validate_mesh(mesh)
            if problems:
                raise ValueError(f"{len(problems)} mesh violations, first: {problems[0]}")
        timings["mesh"] = time.perf_counter() - t
        stage = "assembly"
        t = time.perf_counter()
        K, M, dofs = assemble(mesh, order)
        timings["assembly"] = time.perf_counter() - t
        stage = "eigensolve"
        t = time.perf_counter()
        spectrum = smallest_eigenpairs(K, M, opts, dofs=dofs)
        timings["eigensolve"] = time.perf_counter() - t
        stage = "certification"
        res = residual_report(K, M, spectrum)
        orth = orthonormality_error(M, spectrum)
    except Exception as exc:
        raise PipelineError(stage, exc) from exc
    log.info("%s: %d dofs, %d states, max residual %.2e", region.spec(), dofs.n_dof,
             len(spectrum), float(res.max()))
    return PipelineResult(region, mesh, K, M, dofs, spectrum, res, orth, timings)
