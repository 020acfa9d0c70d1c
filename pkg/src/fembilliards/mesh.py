"""Conforming triangulations of billiard regions.

Meshes are quality constrained Delaunay triangulations of the region's
boundary polyline, refined Ruppert-style until every triangle has area at
most ``max_area`` and no angle below ``min_angle``. The heavy lifting is
done by Shewchuk's Triangle (via the ``triangle`` package), which is
deterministic for fixed input.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import triangle as _triangle

from .geometry import BoundaryPolyline, Region

__all__ = [
    "MeshFailure",
    "MeshParams",
    "TriMesh",
    "generate_mesh",
    "refine_half",
    "mesh_stats",
    "validate_mesh",
    "triangle_areas",
    "triangle_min_angles",
    "write_mesh",
    "read_mesh",
]

log = logging.getLogger(__name__)


class MeshFailure(RuntimeError):
    """The generator could not meet the requested quality bounds."""


@dataclass(frozen=True)
class MeshParams:
    """Mesh controls.

    Parameters
    ----------
    max_area : float
        Upper bound on every triangle's area (the "max cell measure" h).
    chord_tolerance : float, optional
        Largest allowed gap between a boundary chord and the true curve.
        Defaults to ``sqrt(max_area) / 10``.
    min_angle : float
        Smallest permitted triangle angle, in degrees.
    """

    max_area: float
    chord_tolerance: float | None = None
    min_angle: float = 20.0

    def __post_init__(self):
        h = float(self.max_area)
        if not (math.isfinite(h) and h > 0):
            raise ValueError(f"max_area must be positive, got {self.max_area!r}")
        object.__setattr__(self, "max_area", h)
        if self.chord_tolerance is None:
            object.__setattr__(self, "chord_tolerance", math.sqrt(h) / 10)
        elif not float(self.chord_tolerance) > 0:
            raise ValueError("chord_tolerance must be positive")
        object.__setattr__(self, "chord_tolerance", float(self.chord_tolerance))
        if not 0 < self.min_angle <= 30:
            raise ValueError("min_angle must lie in (0, 30] degrees")

    def halved(self) -> "MeshParams":
        """Same boundary resolution, half the cell measure."""
        return replace(self, max_area=self.max_area / 2)


@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_flag: np.ndarray
    params: MeshParams
    min_angle: float
    """Angle bound actually enforced (``params.min_angle`` unless relaxed)."""
    polyline: BoundaryPolyline | None = field(default=None, repr=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def corners(self) -> np.ndarray:
        """(M, 3, 2) array of triangle vertex coordinates."""
        return self.vertices[self.triangles]


def triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed areas (positive for counterclockwise triangles)."""
    p = vertices[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def triangle_min_angles(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Smallest angle of each triangle, in degrees."""
    p = vertices[triangles]
    angles = []
    for i in range(3):
        a = p[:, (i + 1) % 3] - p[:, i]
        b = p[:, (i + 2) % 3] - p[:, i]
        cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
        dot = (a * b).sum(axis=1)
        angles.append(np.degrees(np.arctan2(cross, dot)))
    return np.min(angles, axis=0)


def _edges(triangles: np.ndarray):
    """Unique undirected edges and how many triangles use each."""
    e = np.sort(triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    return uniq, counts


def _boundary_flags(n_vertices: int, triangles: np.ndarray) -> np.ndarray:
    edges, counts = _edges(triangles)
    flag = np.zeros(n_vertices, dtype=bool)
    flag[edges[counts == 1].ravel()] = True
    return flag


def _polyline_angles(vertices: np.ndarray) -> np.ndarray:
    prev = np.roll(vertices, 1, axis=0) - vertices
    nxt = np.roll(vertices, -1, axis=0) - vertices
    cross = nxt[:, 0] * prev[:, 1] - nxt[:, 1] * prev[:, 0]
    dot = (prev * nxt).sum(axis=1)
    return np.degrees(np.mod(np.arctan2(cross, dot), 2 * np.pi))


def _switch_number(x: float) -> str:
    return np.format_float_positional(x, trim="-", precision=17)


def generate_mesh(region: Region, params: MeshParams) -> TriMesh:
    """Quality triangulation of ``region`` honouring ``params``.

    If the boundary itself has corners sharper than ``2 * min_angle`` the
    angle bound is relaxed to half the sharpest corner (logged), since no
    conforming mesh can do better there.
    """
    polyline = region.boundary_polyline(params.chord_tolerance)
    pts = np.asarray(polyline.vertices, dtype=float)
    q = params.min_angle
    out = _triangle.triangulate(
        {"vertices": pts, "segments": polyline.segments},
        f"pq{_switch_number(q)}a{_switch_number(params.max_area)}zQ",
    )
    vertices = np.ascontiguousarray(out["vertices"], dtype=float)
    tris = np.ascontiguousarray(out["triangles"], dtype=np.int64)

    signed = triangle_areas(vertices, tris)
    if np.any(signed < 0):
        tris[signed < 0] = tris[signed < 0][:, [0, 2, 1]]

    enforced = q
    observed = float(triangle_min_angles(vertices, tris).min())
    if observed < q - 1e-9:
        sharpest = float(_polyline_angles(pts).min())
        enforced = min(q, sharpest / 2)
        log.warning("min_angle relaxed from %.3g to %.3g deg (sharpest boundary corner %.3g deg)",
                    q, enforced, sharpest)
        if observed < enforced - 1e-9:
            raise MeshFailure(f"minimum angle {observed:.3g} deg below relaxed bound {enforced:.3g} deg")

    return TriMesh(
        vertices=vertices,
        triangles=tris,
        boundary_flag=_boundary_flags(len(vertices), tris),
        params=params,
        min_angle=enforced,
        polyline=polyline,
    )


def refine_half(region: Region, params: MeshParams) -> TriMesh:
    """Mesh at half the cell measure with the same chord tolerance."""
    return generate_mesh(region, params.halved())


def mesh_stats(mesh: TriMesh) -> dict:
    areas = np.abs(triangle_areas(mesh.vertices, mesh.triangles))
    return {
        "vertex_count": mesh.num_vertices,
        "triangle_count": mesh.num_triangles,
        "interior_dof_count": int(np.count_nonzero(~mesh.boundary_flag)),
        "max_area": float(areas.max()) if len(areas) else 0.0,
        "min_angle_observed": float(triangle_min_angles(mesh.vertices, mesh.triangles).min())
        if len(areas) else 0.0,
        "total_area": float(areas.sum()),
    }


def _distance_to_polyline(points: np.ndarray, loop: np.ndarray) -> np.ndarray:
    a = loop
    b = np.roll(loop, -1, axis=0)
    d = b - a
    ll = (d * d).sum(axis=1)
    best = np.full(len(points), np.inf)
    # chunk over points to bound memory
    for start in range(0, len(points), 4096):
        p = points[start:start + 4096, None, :]
        t = np.clip(((p - a) * d).sum(axis=2) / ll, 0.0, 1.0)
        q = a + t[..., None] * d
        best[start:start + 4096] = np.sqrt(((p - q) ** 2).sum(axis=2)).min(axis=1)
    return best


def validate_mesh(mesh: TriMesh) -> list[str]:
    """Every violated mesh invariant, one message per offending triangle/vertex."""
    v = np.asarray(mesh.vertices, dtype=float)
    t = np.asarray(mesh.triangles)
    problems: list[str] = []
    if len(t) == 0:
        return ["mesh: conformity (no triangles)"]

    signed = triangle_areas(v, t)
    for i in np.flatnonzero(signed <= 0):
        problems.append(f"triangle {i}: orientation (signed area {signed[i]:.3g} <= 0)")
    areas = np.abs(signed)
    for i in np.flatnonzero(areas > mesh.params.max_area * (1 + 1e-12)):
        problems.append(f"triangle {i}: area bound ({areas[i]:.6g} > h={mesh.params.max_area:.6g})")
    angles = triangle_min_angles(v, t)
    for i in np.flatnonzero(angles < mesh.min_angle - 1e-9):
        problems.append(f"triangle {i}: min angle ({angles[i]:.3g} < {mesh.min_angle:.3g} deg)")

    used = np.zeros(len(v), dtype=bool)
    used[t.ravel()] = True
    for i in np.flatnonzero(~used):
        problems.append(f"vertex {i}: conformity (not used by any triangle)")

    edges, counts = _edges(t)
    for e in edges[counts > 2]:
        problems.append(f"edge ({e[0]}, {e[1]}): conformity (shared by more than two triangles)")
    expected = _boundary_flags(len(v), t)
    for i in np.flatnonzero((expected != mesh.boundary_flag) & used):
        problems.append(f"vertex {i}: boundary flag inconsistent with mesh boundary")

    if mesh.polyline is not None:
        loop = np.asarray(mesh.polyline.vertices, dtype=float)
        scale = float(np.abs(loop).max()) or 1.0
        bedges = edges[counts == 1]
        mids = 0.5 * (v[bedges[:, 0]] + v[bedges[:, 1]])
        off = _distance_to_polyline(mids, loop) > 1e-10 * scale
        for e in bedges[off]:
            problems.append(f"edge ({e[0]}, {e[1]}): conformity (boundary edge not on domain boundary)")
        flagged = np.flatnonzero(mesh.boundary_flag)
        off_v = _distance_to_polyline(v[flagged], loop) > 1e-10 * scale
        for i in flagged[off_v]:
            problems.append(f"vertex {i}: boundary vertex not on boundary polyline")
        target = mesh.polyline.area()
        if abs(areas.sum() - target) > 1e-10 * abs(target):
            problems.append(f"mesh: coverage (total area {areas.sum():.15g} != polyline area {target:.15g})")
    return problems


def write_mesh(mesh: TriMesh, path) -> None:
    """Plain-text export: header, then ``x y boundary_flag`` rows, then ``i j k`` rows."""
    lines = [f"vertices {mesh.num_vertices} triangles {mesh.num_triangles} h {mesh.params.max_area!r}"]
    for (x, y), b in zip(mesh.vertices.tolist(), mesh.boundary_flag.tolist()):
        lines.append(f"{x!r} {y!r} {int(b)}")
    for i, j, k in mesh.triangles.tolist():
        lines.append(f"{i} {j} {k}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path, min_angle: float = 0.0) -> TriMesh:
    """Inverse of :func:`write_mesh`; the boundary polyline is not stored."""
    lines = Path(path).read_text().splitlines()
    head = lines[0].split()
    if head[0] != "vertices" or head[2] != "triangles" or head[4] != "h":
        raise ValueError(f"bad mesh header: {lines[0]!r}")
    nv, nt, h = int(head[1]), int(head[3]), float(head[5])
    vrows = [ln.split() for ln in lines[1:1 + nv]]
    trows = [ln.split() for ln in lines[1 + nv:1 + nv + nt]]
    vertices = np.array([[float(r[0]), float(r[1])] for r in vrows])
    flags = np.array([r[2] == "1" for r in vrows], dtype=bool)
    tris = np.array([[int(c) for c in r] for r in trows], dtype=np.int64).reshape(-1, 3)
    params = MeshParams(h, min_angle=min_angle) if min_angle > 0 else MeshParams(h)
    return TriMesh(vertices, tris, flags, params, min_angle=min_angle)
