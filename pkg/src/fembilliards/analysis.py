"""Exact-vs-FEM tables, refinement errors and the polygon -> circle limit.

The refinement error between meshes of cell measure h and h/2 is

    eps_n = |k_n(h) - k_n(h/2)| / k_n(h/2)

and is always formed from unrounded eigenvalues.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._io import atomic_write, csv_text
from .eigensolve import SolverOpts, Spectrum
from .geometry import Circle, EquilateralTriangle, Rectangle, Region, RegularPolygon, build_region
from .mesh import MeshParams
from .oracle import ExactLevel, circle_spectrum, rectangle_spectrum, triangle_spectrum
from .pipeline import run_pipeline

__all__ = [
    "NonpositiveDenominator",
    "LengthMismatch",
    "UnsupportedRegionForOracle",
    "ValidationRow",
    "RefinementRow",
    "PolygonLimitRow",
    "refinement_error",
    "exact_levels",
    "validate_against_oracle",
    "convergence_study",
    "epsilon_series",
    "polygon_limit_study",
    "pair_degenerate",
    "write_validation_csv",
    "write_refinement_csv",
    "write_polygon_limit_csv",
    "VALIDATION_HEADER",
    "REFINEMENT_HEADER",
    "POLYGON_LIMIT_HEADER",
]

log = logging.getLogger(__name__)

VALIDATION_HEADER = ("n", "k_exact", "k_fem", "delta_pct")
REFINEMENT_HEADER = ("n", "k_h", "k_h2", "epsilon")
POLYGON_LIMIT_HEADER = ("sides", "k1", "circle_gap_pct")


class NonpositiveDenominator(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class UnsupportedRegionForOracle(ValueError):
    pass


@dataclass(frozen=True)
class ValidationRow:
    n: int
    k_exact: float
    k_fem: float
    delta_pct: float


@dataclass(frozen=True)
class RefinementRow:
    n: int
    k_h: float
    k_h2: float
    epsilon: float


@dataclass(frozen=True)
class PolygonLimitRow:
    sides: int
    k1: float
    circle_gap_pct: float


def refinement_error(k_h: float, k_h2: float) -> float:
    if not k_h2 > 0:
        raise NonpositiveDenominator(f"k_h2 must be positive, got {k_h2!r}")
    return abs(k_h - k_h2) / k_h2


def _k_values(fem) -> np.ndarray:
    if isinstance(fem, Spectrum):
        return fem.k
    return np.asarray([getattr(v, "k", v) for v in fem], dtype=float)


def exact_levels(region, count: int) -> list[ExactLevel]:
    """Oracle spectrum for the regions that have one."""
    region = build_region(region)
    if isinstance(region, Circle):
        return circle_spectrum(region.radius, count)
    if isinstance(region, EquilateralTriangle):
        return triangle_spectrum(region.side, count)
    if isinstance(region, Rectangle):
        return rectangle_spectrum(region.lx, region.ly, count)
    raise UnsupportedRegionForOracle(f"no closed-form spectrum for {region.spec()!r}")


def validate_against_oracle(exact, fem) -> list[ValidationRow]:
    """Pair the n-th exact level with the n-th FEM level (both sorted).

    Sorted pairing compares degenerate clusters as multisets, which is
    what a conforming discretization that splits a pair slightly needs.
    """
    k_exact = np.sort(_k_values(exact))
    k_fem = np.sort(_k_values(fem))
    if len(k_fem) < len(k_exact):
        raise LengthMismatch(f"{len(k_exact)} exact levels but only {len(k_fem)} FEM levels")
    rows = []
    for n, (ke, kf) in enumerate(zip(k_exact, k_fem), start=1):
        rows.append(ValidationRow(n, float(ke), float(kf), 100.0 * abs(float(kf) - float(ke)) / float(ke)))
    return rows


def _dedupe(indices) -> list[int]:
    out = []
    for i in indices:
        i = int(i)
        if i < 1:
            raise ValueError(f"state indices start at 1, got {i}")
        if i in out:
            log.warning("duplicate state index %d ignored", i)
            continue
        out.append(i)
    return sorted(out)


def convergence_study(region, h: float, indices, chord_tolerance: float | None = None,
                      order: int = 2, opts: SolverOpts | None = None, h2: float | None = None,
                      min_angle: float = 20.0) -> list[RefinementRow]:
    """Refinement error at each requested state index between h and h/2.

    Both meshes share one chord tolerance, so only the interior resolution
    changes. Passing ``h2=h`` reuses one solve and gives all-zero errors.
    """
    region = build_region(region)
    idx = _dedupe(indices)
    if not idx:
        raise ValueError("no state indices given")
    m = max(idx)
    params = MeshParams(h, chord_tolerance, min_angle)
    params2 = MeshParams(h / 2 if h2 is None else h2, params.chord_tolerance, min_angle)
    if opts is None:
        opts = SolverOpts(m)
    elif opts.num_states < m:
        opts = SolverOpts(m, opts.rel_residual_tol, opts.max_iterations, opts.shift,
                          opts.block_size, opts.window)
    k_h = run_pipeline(region, params, order, opts).k
    if params2.max_area == params.max_area:
        k_h2 = k_h
    else:
        k_h2 = run_pipeline(region, params2, order, opts).k
    return [RefinementRow(n, float(k_h[n - 1]), float(k_h2[n - 1]),
                          refinement_error(float(k_h[n - 1]), float(k_h2[n - 1]))) for n in idx]


def epsilon_series(rows) -> list[tuple[int, float]]:
    """(n, eps) pairs for semilog plotting."""
    return [(r.n, r.epsilon) for r in rows]


def polygon_limit_study(sides_list, circumradius: float = 1.0, params: MeshParams | None = None,
                        num_levels: int = 1, order: int = 2) -> list[PolygonLimitRow]:
    """Ground-state k of inscribed regular n-gons and its gap to the disk."""
    sides_list = [int(s) for s in sides_list]
    for s in sides_list:
        if s < 3:
            raise ValueError(f"a polygon needs at least 3 sides, got {s}")
    params = params or MeshParams(1e-3)
    k_circle = circle_spectrum(circumradius, 1)[0].k
    rows = []
    for s in sides_list:
        res = run_pipeline(RegularPolygon(s, circumradius), params, order, max(1, int(num_levels)))
        k1 = float(res.k[0])
        rows.append(PolygonLimitRow(s, k1, 100.0 * (k1 - k_circle) / k_circle))
    return rows


def pair_degenerate(k_list, cluster_tol: float = 1e-6) -> list[tuple[float, int]]:
    """Greedy clustering of a sorted list into (mean value, multiplicity).

    A value joins the current cluster when it is within ``cluster_tol``
    (relative) of the previous value.
    """
    out: list[tuple[float, int]] = []
    cluster: list[float] = []
    for k in k_list:
        k = float(k)
        if cluster and abs(k - cluster[-1]) <= cluster_tol * max(abs(k), abs(cluster[-1])):
            cluster.append(k)
            continue
        if cluster:
            out.append((math.fsum(cluster) / len(cluster), len(cluster)))
        cluster = [k]
    if cluster:
        out.append((math.fsum(cluster) / len(cluster), len(cluster)))
    return out


def clusters(k_list, cluster_tol: float = 1e-6) -> list[list[int]]:
    """Index groups of the same greedy clustering as :func:`pair_degenerate`."""
    groups: list[list[int]] = []
    prev = None
    for i, k in enumerate(k_list):
        k = float(k)
        if prev is not None and abs(k - prev) <= cluster_tol * max(abs(k), abs(prev)):
            groups[-1].append(i)
        else:
            groups.append([i])
        prev = k
    return groups


def write_validation_csv(rows, path):
    return atomic_write(path, csv_text(VALIDATION_HEADER, [(r.n, r.k_exact, r.k_fem, r.delta_pct) for r in rows]))


def write_refinement_csv(rows, path):
    return atomic_write(path, csv_text(REFINEMENT_HEADER, [(r.n, r.k_h, r.k_h2, r.epsilon) for r in rows]))


def write_polygon_limit_csv(rows, path):
    return atomic_write(path, csv_text(POLYGON_LIMIT_HEADER, [(r.sides, r.k1, r.circle_gap_pct) for r in rows]))
