"""Eigenfunction rasters and localization metrics.

Two reproducible localization proxies are provided:

* ``ipr``: Area * integral |psi|^4 for a normalized state (1 when |psi|^2
  is uniform, larger when the state concentrates);
* ``strip_mass``: the share of integral |psi|^2 inside a strip centred
  on the bounding-box midline, computed by clipping elements exactly
  against the strip edges.

States inside a degenerate cluster are scored on the cluster-averaged
density, which does not depend on how the solver picked a basis of the
eigenspace.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._io import atomic_write, csv_text
from .assembly import DofMap, ElementBasis, triangle_quadrature
from .mesh import TriMesh, triangle_areas

__all__ = [
    "ZeroVector",
    "NotNormalized",
    "PointLocationFailure",
    "FieldGrid",
    "ScarReport",
    "FieldOps",
    "evaluate_eigenfunction",
    "normalize_l2",
    "ipr",
    "strip_mass",
    "rank_scar_candidates",
    "render_pgm",
    "write_pgm",
    "write_scar_csv",
    "SCAR_HEADER",
    "DEFAULT_STRIP_WIDTH",
    "DEFAULT_CLUSTER_TOL",
]

log = logging.getLogger(__name__)

SCAR_HEADER = ("n", "k", "ipr", "vstrip", "hstrip")
DEFAULT_STRIP_WIDTH = 0.1
# FEM splits exact degeneracies by far more than the 1e-6 used for tables
DEFAULT_CLUSTER_TOL = 1e-3
NORM_TOL = 1e-6


class ZeroVector(ValueError):
    pass


class NotNormalized(ValueError):
    pass


class PointLocationFailure(RuntimeWarning):
    """Grid points inside the region that no triangle contains (chord gaps)."""


@dataclass(eq=False)
class FieldGrid:
    """Samples at pixel centres; ``values[j, i]`` sits at (x_i, y_j), y ascending."""

    nx: int
    ny: int
    bbox: tuple
    values: np.ndarray
    mask: np.ndarray
    failures: int = 0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs nx, ny >= 2")
        self.values = np.where(self.mask, self.values, 0.0)

    @property
    def x(self) -> np.ndarray:
        x0, x1 = self.bbox[0], self.bbox[1]
        return x0 + (np.arange(self.nx) + 0.5) * (x1 - x0) / self.nx

    @property
    def y(self) -> np.ndarray:
        y0, y1 = self.bbox[2], self.bbox[3]
        return y0 + (np.arange(self.ny) + 0.5) * (y1 - y0) / self.ny

    @property
    def cell_area(self) -> float:
        x0, x1, y0, y1 = self.bbox
        return (x1 - x0) * (y1 - y0) / (self.nx * self.ny)


@dataclass(frozen=True)
class ScarReport:
    n: int
    k: float
    ipr: float
    vstrip_mass: float
    hstrip_mass: float


def _basis(dofs: DofMap) -> ElementBasis:
    return ElementBasis(dofs.order)


def _full_coeffs(dofs: DofMap, coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    if c.shape[0] != dofs.n_dof:
        raise ValueError(f"expected {dofs.n_dof} coefficients, got {c.shape[0]}")
    return dofs.expand(c.T).T


def _mesh_bbox(mesh: TriMesh) -> tuple:
    v = mesh.vertices
    return (float(v[:, 0].min()), float(v[:, 0].max()), float(v[:, 1].min()), float(v[:, 1].max()))


def _locate(mesh: TriMesh, xs: np.ndarray, ys: np.ndarray, chunk: int = 2_000_000):
    """Containing triangle and its (l1, l2) barycentrics for every raster point.

    The raster itself is the bucket grid: each triangle visits only the
    pixel centres inside its bounding box. Points on shared edges go to the
    lowest-numbered triangle.
    """
    nx, ny = len(xs), len(ys)
    dx = xs[1] - xs[0]
    dy = ys[1] - ys[0]
    p = mesh.vertices[mesh.triangles]
    lo = p.min(axis=1)
    hi = p.max(axis=1)
    i0 = np.clip(np.ceil((lo[:, 0] - xs[0]) / dx - 1e-9).astype(np.int64), 0, nx)
    i1 = np.clip(np.floor((hi[:, 0] - xs[0]) / dx + 1e-9).astype(np.int64), -1, nx - 1)
    j0 = np.clip(np.ceil((lo[:, 1] - ys[0]) / dy - 1e-9).astype(np.int64), 0, ny)
    j1 = np.clip(np.floor((hi[:, 1] - ys[0]) / dy + 1e-9).astype(np.int64), -1, ny - 1)
    wi = np.maximum(i1 - i0 + 1, 0)
    wj = np.maximum(j1 - j0 + 1, 0)
    counts = wi * wj

    owner = np.full(nx * ny, -1, dtype=np.int64)
    bary = np.zeros((nx * ny, 2))
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]

    ntri = len(p)
    start = 0
    while start < ntri:
        csum = np.cumsum(counts[start:])
        stop = start + max(1, int(np.searchsorted(csum, chunk, side="right")))
        stop = min(stop, ntri)
        sel = np.arange(start, stop)
        c = counts[sel]
        total = int(c.sum())
        start = stop
        if total == 0:
            continue
        t = np.repeat(sel, c)
        offs = np.arange(total) - np.repeat(np.cumsum(c) - c, c)
        ii = i0[t] + offs % wi[t]
        jj = j0[t] + offs // wi[t]
        rx = xs[ii] - p[t, 0, 0]
        ry = ys[jj] - p[t, 0, 1]
        l1 = (rx * e2[t, 1] - ry * e2[t, 0]) / det[t]
        l2 = (e1[t, 0] * ry - e1[t, 1] * rx) / det[t]
        tol = 1e-12
        inside = (l1 >= -tol) & (l2 >= -tol) & (l1 + l2 <= 1 + tol)
        flat = (jj * nx + ii)[inside]
        t, l1, l2 = t[inside], l1[inside], l2[inside]
        free = owner[flat] < 0
        flat, t, l1, l2 = flat[free], t[free], l1[free], l2[free]
        uniq, first = np.unique(flat, return_index=True)
        owner[uniq] = t[first]
        bary[uniq, 0] = l1[first]
        bary[uniq, 1] = l2[first]
    return owner, bary


def evaluate_eigenfunction(mesh: TriMesh, dofs: DofMap, coeffs, nx: int = 512, ny: int | None = None,
                           bbox=None, region=None) -> FieldGrid:
    """Sample psi = sum_i u_i phi_i on an nx-by-ny grid of pixel centres.

    Points outside every triangle get value 0 and mask False. If ``region``
    is given, those of them that lie inside the true region (the sliver
    between a curved boundary and its chords) are counted in ``failures``.
    """
    ny = nx if ny is None else ny
    if nx < 2 or ny < 2:
        raise ValueError("grid needs nx, ny >= 2")
    bbox = tuple(float(b) for b in (bbox or _mesh_bbox(mesh)))
    x0, x1, y0, y1 = bbox
    xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
    ys = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
    full = _full_coeffs(dofs, coeffs)
    owner, bary = _locate(mesh, xs, ys)
    hit = owner >= 0
    values = np.zeros(nx * ny)
    if np.any(hit):
        phi = _basis(dofs).values(bary[hit])
        nodal = full[dofs.cells[owner[hit]]]
        values[hit] = np.einsum("pi,pi->p", phi, nodal)
    failures = 0
    if region is not None:
        X, Y = np.meshgrid(xs, ys)
        inside = np.asarray(region.contains(X.ravel(), Y.ravel()), dtype=bool)
        failures = int(np.count_nonzero(inside & ~hit))
    return FieldGrid(nx, ny, bbox, values.reshape(ny, nx), hit.reshape(ny, nx), failures)


def normalize_l2(M, coeffs) -> np.ndarray:
    """Scale so that c^T M c = 1, with the largest-magnitude entry positive."""
    c = np.asarray(coeffs, dtype=float)
    norm2 = float(c @ (M @ c))
    if not norm2 > 0 or not np.any(c):
        raise ZeroVector("cannot normalize a zero vector")
    c = c / math.sqrt(norm2)
    if c[np.argmax(np.abs(c))] < 0:
        c = -c
    return c


def _clip(poly: list, axis: int, value: float, keep_above: bool) -> list:
    """Sutherland-Hodgman against the half-plane x_axis >= value (or <=)."""
    out = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        da = a[axis] - value if keep_above else value - a[axis]
        db = b[axis] - value if keep_above else value - b[axis]
        if da >= 0:
            out.append(a)
        if (da >= 0) != (db >= 0):
            t = da / (da - db)
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    return out


class FieldOps:
    """Quadrature machinery for one (mesh, dofs) pair, reused across states."""

    def __init__(self, mesh: TriMesh, dofs: DofMap):
        self.mesh = mesh
        self.dofs = dofs
        self.basis = _basis(dofs)
        # |psi|^4 has degree 4 * order on affine elements
        self.quad = triangle_quadrature(4 * dofs.order)
        phi = self.basis.values(self.quad.points)
        p = mesh.vertices[mesh.triangles]
        det = np.abs(triangle_areas(mesh.vertices, mesh.triangles)) * 2.0
        nq = len(self.quad.weights)
        nt = len(p)
        self.weights = (det[:, None] * self.quad.weights[None, :]).ravel()
        rows = np.repeat(np.arange(nt * nq), self.basis.size)
        cols = np.repeat(dofs.node_to_dof[dofs.cells], nq, axis=0).ravel()
        vals = np.tile(phi.ravel(), nt)
        keep = cols >= 0
        self.interp = sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(nt * nq, dofs.n_dof))
        self.area = float(det.sum() / 2.0)
        self._strips: dict = {}

    def values_at_quadrature(self, coeffs) -> np.ndarray:
        return self.interp @ np.asarray(coeffs, dtype=float)

    def density(self, coeffs) -> np.ndarray:
        """Cluster-averaged |psi|^2 at the quadrature points (columns are states)."""
        c = np.asarray(coeffs, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        psi = self.values_at_quadrature(c)
        norms = self.weights @ (psi * psi)
        bad = np.abs(norms - 1.0) > NORM_TOL
        if np.any(bad):
            raise NotNormalized(f"state norm {norms[bad][0]:.9g} deviates from 1")
        return (psi * psi).mean(axis=1)

    def ipr(self, coeffs) -> float:
        rho = self.density(coeffs)
        return float(self.area * (self.weights @ (rho * rho)))

    def strip_matrix(self, axis: str, width_fraction: float, bbox=None):
        """Mass matrix of the strip, so that the strip mass of c is c^T S c."""
        if not 0 < width_fraction <= 1:
            raise ValueError("width_fraction must lie in (0, 1]")
        if axis not in ("vertical", "horizontal"):
            raise ValueError(f"axis must be 'vertical' or 'horizontal', got {axis!r}")
        bbox = tuple(bbox or _mesh_bbox(self.mesh))
        key = (axis, float(width_fraction), bbox)
        if key in self._strips:
            return self._strips[key]
        # a vertical strip bounds x, a horizontal strip bounds y
        ax = 0 if axis == "vertical" else 1
        lo_b, hi_b = (bbox[0], bbox[1]) if ax == 0 else (bbox[2], bbox[3])
        mid = 0.5 * (lo_b + hi_b)
        half = 0.5 * width_fraction * (hi_b - lo_b)
        lo, hi = mid - half, mid + half
        if width_fraction == 1:
            lo, hi = -math.inf, math.inf

        p = self.mesh.vertices[self.mesh.triangles]
        cmin = p[:, :, ax].min(axis=1)
        cmax = p[:, :, ax].max(axis=1)
        full = (cmin >= lo) & (cmax <= hi)
        cut = ~full & (cmax > lo) & (cmin < hi)

        q2 = triangle_quadrature(2 * self.dofs.order)
        phi_q = self.basis.values(q2.points)
        base = np.einsum("q,qi,qj->ij", q2.weights, phi_q, phi_q)
        det = np.abs(triangle_areas(self.mesh.vertices, self.mesh.triangles)) * 2.0

        blocks = {}
        for t in np.flatnonzero(full):
            blocks[t] = base * det[t]
        for t in np.flatnonzero(cut):
            poly = [tuple(v) for v in p[t]]
            if math.isfinite(lo):
                poly = _clip(poly, ax, lo, True)
            if poly and math.isfinite(hi):
                poly = _clip(poly, ax, hi, False)
            if len(poly) < 3:
                continue
            blocks[t] = self._clipped_mass(p[t], np.asarray(poly), q2)

        size = self.basis.size
        ts = np.array(sorted(blocks), dtype=np.int64)
        if len(ts) == 0:
            S = sp.csr_matrix((self.dofs.n_dof, self.dofs.n_dof))
        else:
            data = np.stack([blocks[t] for t in ts])
            glob = self.dofs.node_to_dof[self.dofs.cells[ts]]
            rows = np.repeat(glob, size, axis=1).ravel()
            cols = np.tile(glob, (1, size)).ravel()
            vals = data.ravel()
            ok = (rows >= 0) & (cols >= 0)
            S = sp.coo_matrix((vals[ok], (rows[ok], cols[ok])),
                              shape=(self.dofs.n_dof, self.dofs.n_dof)).tocsr()
        self._strips[key] = S
        return S

    def _clipped_mass(self, tri: np.ndarray, poly: np.ndarray, q2) -> np.ndarray:
        e1 = tri[1] - tri[0]
        e2 = tri[2] - tri[0]
        J = np.column_stack([e1, e2])
        Jinv = np.linalg.inv(J)
        out = np.zeros((self.basis.size, self.basis.size))
        for k in range(1, len(poly) - 1):
            a, b, c = poly[0], poly[k], poly[k + 1]
            sdet = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
            if sdet == 0:
                continue
            pts = a + np.outer(q2.points[:, 0], b - a) + np.outer(q2.points[:, 1], c - a)
            ref = (pts - tri[0]) @ Jinv.T
            phi = self.basis.values(ref)
            out += sdet * np.einsum("q,qi,qj->ij", q2.weights, phi, phi)
        return out

    def strip_mass(self, coeffs, axis: str = "vertical", width_fraction: float = DEFAULT_STRIP_WIDTH,
                   bbox=None) -> float:
        c = np.asarray(coeffs, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        self.density(c)  # normalization check
        S = self.strip_matrix(axis, width_fraction, bbox)
        mass = float(np.mean(np.einsum("ij,ij->j", c, S @ c)))
        return min(max(mass, 0.0), 1.0)


def ipr(mesh: TriMesh, dofs: DofMap, coeffs) -> float:
    """Area * integral |psi|^4 of a normalized state (or cluster, if 2-D)."""
    return FieldOps(mesh, dofs).ipr(coeffs)


def strip_mass(mesh: TriMesh, dofs: DofMap, coeffs, axis: str = "vertical",
               width_fraction: float = DEFAULT_STRIP_WIDTH, bbox=None) -> float:
    """Integral of |psi|^2 over the strip centred on the bounding-box midline.

    A vertical strip is bounded in x, with width ``width_fraction`` times
    the x extent; a horizontal one likewise in y. ``bbox`` defaults to the
    mesh's bounding box.
    """
    return FieldOps(mesh, dofs).strip_mass(coeffs, axis, width_fraction, bbox)


def _metric_value(r: ScarReport, metric: str) -> float:
    return {"ipr": r.ipr, "vstrip": r.vstrip_mass, "hstrip": r.hstrip_mass}[metric]


def rank_scar_candidates(mesh: TriMesh, dofs: DofMap, spectrum, indices=None, metric: str = "vstrip",
                         width_fraction: float = DEFAULT_STRIP_WIDTH,
                         cluster_tol: float = DEFAULT_CLUSTER_TOL, bbox=None) -> list[ScarReport]:
    """Score states ``indices`` (1-based) and sort by ``metric``, highest first.

    Every member of a degenerate cluster gets the score of the cluster-averaged
    density. Ties keep ascending n.
    """
    from .analysis import clusters

    if metric not in ("ipr", "vstrip", "hstrip"):
        raise ValueError(f"unknown metric {metric!r}")
    ks = np.asarray(spectrum.k)
    X = np.asarray(spectrum.vectors)
    indices = list(range(1, len(ks) + 1)) if indices is None else [int(i) for i in indices]
    if not indices:
        return []
    if min(indices) < 1 or max(indices) > len(ks):
        raise IndexError(f"state indices must lie in 1..{len(ks)}")
    ops = FieldOps(mesh, dofs)
    groups = clusters(ks, cluster_tol)
    if len(groups) and max(indices) - 1 in groups[-1]:
        log.warning("state %d may belong to a cluster cut off by the end of the computed spectrum; "
                    "solve a few more states for a basis-invariant score", max(indices))
    group_of = {}
    for g in groups:
        for i in g:
            group_of[i] = tuple(g)
    scored = {}
    reports = []
    for n in indices:
        g = group_of[n - 1]
        if g not in scored:
            C = X[:, list(g)]
            scored[g] = (ops.ipr(C), ops.strip_mass(C, "vertical", width_fraction, bbox),
                         ops.strip_mass(C, "horizontal", width_fraction, bbox))
        v = scored[g]
        reports.append(ScarReport(n, float(ks[n - 1]), v[0], v[1], v[2]))
    reports.sort(key=lambda r: -_metric_value(r, metric))
    return reports


def render_pgm(grid: FieldGrid, mode: str = "density") -> bytes:
    """Binary 8-bit PGM; the top image row is the largest y."""
    v = np.asarray(grid.values, dtype=float)
    if mode == "density":
        d = v * v
        top = d[grid.mask].max() if np.any(grid.mask) else 0.0
        pix = np.rint(255.0 * d / top) if top > 0 else np.zeros_like(d)
    elif mode == "psi":
        top = np.abs(v[grid.mask]).max() if np.any(grid.mask) else 0.0
        pix = 128.0 + (np.rint(127.0 * v / top) if top > 0 else 0.0)
    else:
        raise ValueError(f"mode must be 'psi' or 'density', got {mode!r}")
    pix = np.where(grid.mask, np.clip(pix, 0, 255), 0).astype(np.uint8)
    header = f"P5 {grid.nx} {grid.ny} 255\n".encode()
    return header + pix[::-1].tobytes()


def write_pgm(grid: FieldGrid, path, mode: str = "density"):
    return atomic_write(path, render_pgm(grid, mode))


def write_scar_csv(reports, path):
    rows = [(r.n, r.k, r.ipr, r.vstrip_mass, r.hstrip_mass) for r in reports]
    return atomic_write(path, csv_text(SCAR_HEADER, rows))
