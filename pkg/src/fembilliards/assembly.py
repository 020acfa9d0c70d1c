"""Stiffness and mass matrices for Lagrange triangles with Dirichlet elimination.

K_ij = integral of grad(phi_i) . grad(phi_j), M_ij = integral of phi_i phi_j,
both restricted to the nodes that do not lie on the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.io
import scipy.sparse as sp

from .mesh import TriMesh

__all__ = [
    "DegenerateTriangle",
    "NoInteriorDofs",
    "Quadrature",
    "ElementBasis",
    "DofMap",
    "triangle_quadrature",
    "element_stiffness",
    "element_mass",
    "element_matrices",
    "build_dofmap",
    "assemble",
    "write_matrix_market",
]

DEGENERATE_AREA = 1e-14


class DegenerateTriangle(ValueError):
    pass


class NoInteriorDofs(ValueError):
    """The mesh has no unknowns left after removing boundary nodes."""


@dataclass(frozen=True)
class Quadrature:
    """Rule on the reference triangle (0,0), (1,0), (0,1); weights sum to 1/2."""

    points: np.ndarray
    weights: np.ndarray
    degree: int


_A4, _W4A = 0.44594849091596488632, 0.22338158967801146570
_B4, _W4B = 0.09157621350977074346, 0.10995174365532186764


@lru_cache(maxsize=None)
def triangle_quadrature(degree: int) -> Quadrature:
    """Quadrature rule exact for polynomials up to ``degree``.

    Degrees 1-2 use the 3-point edge-interior rule and degrees 3-4 the
    6-point Strang-Fix rule; anything higher falls back to a collapsed
    (Duffy) Gauss-Jacobi product rule.
    """
    if degree <= 2:
        pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
        return Quadrature(pts, np.full(3, 1 / 6), 2)
    if degree <= 4:
        pts = np.array([
            [_A4, _A4], [1 - 2 * _A4, _A4], [_A4, 1 - 2 * _A4],
            [_B4, _B4], [1 - 2 * _B4, _B4], [_B4, 1 - 2 * _B4],
        ])
        w = 0.5 * np.array([_W4A] * 3 + [_W4B] * 3)
        return Quadrature(pts, w, 4)
    from scipy.special import roots_jacobi

    n = degree // 2 + 1
    gx, gw = np.polynomial.legendre.leggauss(n)
    jx, jw = roots_jacobi(n, 1.0, 0.0)
    # x in [0, 1] plain Gauss, s in [0, 1] with weight (1 - s) from Jacobi(1, 0)
    s = 0.5 * (jx + 1)
    ws = jw / 4.0
    t = 0.5 * (gx + 1)
    wt = gw / 2.0
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws, wt)
    xi = S
    eta = (1 - S) * T
    return Quadrature(np.column_stack([xi.ravel(), eta.ravel()]), W.ravel(), degree)


class ElementBasis:
    """Lagrange basis of order 1 (3 vertex nodes) or 2 (3 vertices + 3 edge midpoints).

    Local node order for order 2 is v0, v1, v2, mid(v0,v1), mid(v1,v2), mid(v2,v0).
    """

    def __init__(self, order: int = 1, quadrature: Quadrature | None = None):
        if order not in (1, 2):
            raise ValueError(f"element order must be 1 or 2, got {order!r}")
        self.order = order
        self.quadrature = quadrature or triangle_quadrature(2 * order)
        self.nodes = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)
        if order == 2:
            self.nodes = np.vstack([self.nodes, [[0.5, 0], [0.5, 0.5], [0, 0.5]]])
        q = self.quadrature.points
        self.phi_q = self.values(q)
        self.dphi_q = self.gradients(q)

    def __repr__(self) -> str:
        return f"ElementBasis(order={self.order})"

    @property
    def size(self) -> int:
        return 3 if self.order == 1 else 6

    def values(self, ref_points) -> np.ndarray:
        """Shape function values, shape (npoints, size)."""
        p = np.atleast_2d(np.asarray(ref_points, dtype=float))
        l1, l2 = p[:, 0], p[:, 1]
        l0 = 1 - l1 - l2
        if self.order == 1:
            return np.column_stack([l0, l1, l2])
        return np.column_stack([
            l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
            4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0,
        ])

    def gradients(self, ref_points) -> np.ndarray:
        """Reference gradients, shape (npoints, size, 2)."""
        p = np.atleast_2d(np.asarray(ref_points, dtype=float))
        n = len(p)
        if self.order == 1:
            g = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
            return np.broadcast_to(g, (n, 3, 2)).copy()
        l1, l2 = p[:, 0], p[:, 1]
        l0 = 1 - l1 - l2
        # d/dxi and d/deta of each barycentric coordinate
        dl = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        L = [l0, l1, l2]
        out = np.empty((n, 6, 2))
        for i in range(3):
            out[:, i, :] = (4 * L[i] - 1)[:, None] * dl[i]
        for k, (i, j) in enumerate([(0, 1), (1, 2), (2, 0)]):
            out[:, 3 + k, :] = 4 * (L[i][:, None] * dl[j] + L[j][:, None] * dl[i])
        return out


def _jacobians(corners: np.ndarray):
    """Affine map Jacobians J (M,2,2) with columns v1-v0, v2-v0, and det J."""
    e1 = corners[:, 1] - corners[:, 0]
    e2 = corners[:, 2] - corners[:, 0]
    J = np.stack([e1, e2], axis=2)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    return J, det


def element_matrices(corners: np.ndarray, basis: ElementBasis):
    """Stiffness and mass matrices of many triangles at once.

    ``corners`` has shape (M, 3, 2); returns two arrays of shape (M, nb, nb).
    """
    corners = np.asarray(corners, dtype=float)
    J, det = _jacobians(corners)
    if np.any(0.5 * np.abs(det) < DEGENERATE_AREA):
        bad = int(np.flatnonzero(0.5 * np.abs(det) < DEGENERATE_AREA)[0])
        raise DegenerateTriangle(f"triangle {bad} has area {0.5 * abs(det[bad]):.3g}")
    adet = np.abs(det)
    inv = np.empty_like(J)
    inv[:, 0, 0] = J[:, 1, 1] / det
    inv[:, 1, 1] = J[:, 0, 0] / det
    inv[:, 0, 1] = -J[:, 0, 1] / det
    inv[:, 1, 0] = -J[:, 1, 0] / det
    w = basis.quadrature.weights
    # physical gradients: grad = J^{-T} grad_ref
    G = np.einsum("mba,qib->mqia", inv, basis.dphi_q)
    K = np.einsum("q,mqia,mqja->mij", w, G, G) * adet[:, None, None]
    Mm = np.einsum("q,qi,qj->ij", w, basis.phi_q, basis.phi_q)[None] * adet[:, None, None]
    K = 0.5 * (K + K.transpose(0, 2, 1))
    Mm = 0.5 * (Mm + Mm.transpose(0, 2, 1))
    return K, Mm


def element_stiffness(tri, basis: ElementBasis) -> np.ndarray:
    return element_matrices(np.asarray(tri, dtype=float)[None], basis)[0][0]


def element_mass(tri, basis: ElementBasis) -> np.ndarray:
    return element_matrices(np.asarray(tri, dtype=float)[None], basis)[1][0]


@dataclass(frozen=True, eq=False)
class DofMap:
    """Global nodes of the discrete space and their interior equation numbers.

    ``node_to_dof[i]`` is -1 for eliminated (boundary) nodes.
    """

    order: int
    nodes: np.ndarray
    cells: np.ndarray
    boundary: np.ndarray
    node_to_dof: np.ndarray
    dof_to_node: np.ndarray

    @property
    def n_dof(self) -> int:
        return len(self.dof_to_node)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def expand(self, coeffs) -> np.ndarray:
        """Nodal values for all nodes, zero on the boundary."""
        coeffs = np.asarray(coeffs)
        full = np.zeros(coeffs.shape[:-1] + (self.n_nodes,), dtype=coeffs.dtype)
        full[..., self.dof_to_node] = coeffs
        return full


def build_dofmap(mesh: TriMesh, order: int = 1) -> DofMap:
    tris = np.asarray(mesh.triangles, dtype=np.int64)
    nv = mesh.num_vertices
    nodes = np.asarray(mesh.vertices, dtype=float)
    boundary = np.asarray(mesh.boundary_flag, dtype=bool)
    cells = tris
    if order == 2:
        local = tris[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 3, 2)
        keys = np.sort(local, axis=2).reshape(-1, 2)
        edges, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1, 3)
        mids = 0.5 * (nodes[edges[:, 0]] + nodes[edges[:, 1]])
        nodes = np.vstack([nodes, mids])
        boundary = np.concatenate([boundary, counts == 1])
        cells = np.hstack([tris, nv + inverse])
    elif order != 1:
        raise ValueError(f"element order must be 1 or 2, got {order!r}")
    interior = np.flatnonzero(~boundary)
    node_to_dof = np.full(len(nodes), -1, dtype=np.int64)
    node_to_dof[interior] = np.arange(len(interior))
    return DofMap(order, nodes, cells, boundary, node_to_dof, interior)


def assemble(mesh: TriMesh, basis: ElementBasis | int = 1):
    """Global (K, M, dofs) over interior nodes; Dirichlet nodes are eliminated.

    Contributions are summed in element order, so the result is
    bit-for-bit reproducible.
    """
    if not isinstance(basis, ElementBasis):
        basis = ElementBasis(int(basis))
    dofs = build_dofmap(mesh, basis.order)
    if dofs.n_dof == 0:
        raise NoInteriorDofs("mesh has no interior nodes; refine it")
    corners = mesh.vertices[mesh.triangles]
    Ke, Me = element_matrices(corners, basis)
    nb = basis.size
    rows = np.repeat(dofs.cells, nb, axis=1).ravel()
    cols = np.tile(dofs.cells, (1, nb)).ravel()
    n = dofs.n_nodes
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    keep = dofs.dof_to_node
    K = K[keep][:, keep].tocsr()
    M = M[keep][:, keep].tocsr()
    K.sort_indices()
    M.sort_indices()
    return K, M, dofs


def write_matrix_market(matrix, path) -> None:
    """Coordinate text dump (1-based ``i j value`` lines)."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(matrix), symmetry="general", precision=17)
