import math

import numpy as np
import pytest

from fembilliards.assembly import assemble, build_dofmap
from fembilliards.field import (
    FieldGrid,
    FieldOps,
    NotNormalized,
    ZeroVector,
    evaluate_eigenfunction,
    ipr,
    normalize_l2,
    rank_scar_candidates,
    render_pgm,
    strip_mass,
)
from fembilliards.geometry import Rectangle, Stadium
from fembilliards.mesh import MeshParams, TriMesh, generate_mesh
from fembilliards.pipeline import run_pipeline


@pytest.fixture(scope="module")
def square():
    return run_pipeline(Rectangle(1, 1), MeshParams(2e-3), 2, 12)


@pytest.fixture(scope="module")
def stadium():
    return run_pipeline(Stadium(1, 1), MeshParams(4e-3), 2, 20)


def test_zero_coeffs_zero_grid(square):
    g = evaluate_eigenfunction(square.mesh, square.dofs, np.zeros(square.dofs.n_dof), 32)
    assert not np.any(g.values)


def test_partition_of_unity_point():
    mesh = generate_mesh(Rectangle(1, 1), MeshParams(0.01))
    dofs = build_dofmap(mesh, 1)
    g = evaluate_eigenfunction(mesh, dofs, np.ones(dofs.n_dof), 64)
    # pixels whose triangle has no boundary vertex see exactly 1
    interior_tri = ~mesh.boundary_flag[mesh.triangles].any(axis=1)
    from fembilliards.field import _locate
    owner, _ = _locate(mesh, g.x, g.y)
    sel = (owner >= 0) & interior_tri[np.maximum(owner, 0)]
    assert sel.any()
    assert np.allclose(g.values.ravel()[sel], 1.0, atol=1e-13)


def test_grid_vertex_exact():
    mesh = generate_mesh(Rectangle(1, 1), MeshParams(0.02))
    dofs = build_dofmap(mesh, 1)
    c = np.arange(dofs.n_dof, dtype=float)
    node = dofs.dof_to_node[5]
    x, y = mesh.vertices[node]
    d = 1e-2
    # pixel centres of a 2x2 grid are at bbox quarter points, so centre one on the vertex
    g = evaluate_eigenfunction(mesh, dofs, c, 2, 2, bbox=(x - d / 2, x + 3 * d / 2, y - d / 2, y + 3 * d / 2))
    assert g.values[0, 0] == pytest.approx(5.0, abs=1e-9)


def test_normalize_l2(square):
    M = square.M
    c = square.spectrum.vectors[:, 0]
    c2 = normalize_l2(M, 2 * c)
    assert np.allclose(c2, c, atol=1e-12)
    assert float(c2 @ M @ c2) == pytest.approx(1.0, abs=1e-12)
    c3 = normalize_l2(M, -c)
    assert c3[np.argmax(np.abs(c3))] > 0
    assert np.allclose(normalize_l2(M, c), c, atol=1e-12)
    with pytest.raises(ZeroVector):
        normalize_l2(M, np.zeros_like(c))


def test_uniform_field_metrics():
    # with no nodes eliminated a constant is representable: |psi|^2 = 1/Area
    mesh = generate_mesh(Rectangle(1, 1), MeshParams(0.01))
    free = TriMesh(mesh.vertices, mesh.triangles, np.zeros(mesh.num_vertices, bool), mesh.params,
                   mesh.min_angle, mesh.polyline)
    dofs = build_dofmap(free, 1)
    c = np.ones(dofs.n_dof)
    assert ipr(free, dofs, c) == pytest.approx(1.0, abs=1e-12)
    assert strip_mass(free, dofs, c, "vertical", 0.5) == pytest.approx(0.5, abs=1e-12)
    assert strip_mass(free, dofs, c, "horizontal", 0.3) == pytest.approx(0.3, abs=1e-12)


def test_square_ground_state_metrics(square):
    c = square.spectrum.vectors[:, 0]
    assert ipr(square.mesh, square.dofs, c) == pytest.approx(9 / 4, abs=1e-3)
    assert strip_mass(square.mesh, square.dofs, c, "vertical", 0.5) == pytest.approx(0.5 + 1 / math.pi, abs=1e-5)
    assert strip_mass(square.mesh, square.dofs, c, "horizontal", 0.5) == pytest.approx(0.5 + 1 / math.pi, abs=1e-5)
    assert strip_mass(square.mesh, square.dofs, c, "vertical", 1.0) == pytest.approx(1.0, abs=1e-6)


def test_not_normalized(square):
    c = 1.1 * square.spectrum.vectors[:, 0]
    with pytest.raises(NotNormalized):
        ipr(square.mesh, square.dofs, c)
    with pytest.raises(NotNormalized):
        strip_mass(square.mesh, square.dofs, c)


def test_strip_mass_monotone(stadium):
    ops = FieldOps(stadium.mesh, stadium.dofs)
    c = stadium.spectrum.vectors[:, 5]
    vals = [ops.strip_mass(c, "vertical", w) for w in np.linspace(0.05, 1.0, 12)]
    assert np.all(np.diff(vals) >= -1e-12)
    assert vals[-1] == pytest.approx(1.0, abs=1e-6)
    assert all(0 <= v <= 1 for v in vals)


def test_ipr_lower_bound(stadium):
    ops = FieldOps(stadium.mesh, stadium.dofs)
    for j in range(stadium.spectrum.vectors.shape[1]):
        assert ops.ipr(stadium.spectrum.vectors[:, j]) >= 1 - 1e-9


def test_cluster_density_basis_invariant(square):
    # states 2 and 3 form the (1,2)/(2,1) pair; any rotation of the pair gives the same score
    X = square.spectrum.vectors[:, 1:3]
    ops = FieldOps(square.mesh, square.dofs)
    t = 0.7
    R = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    a = ops.ipr(X)
    b = ops.ipr(X @ R)
    assert a == pytest.approx(b, rel=1e-10)
    assert a == pytest.approx(1.625, abs=2e-3)
    assert ops.strip_mass(X, "vertical") == pytest.approx(ops.strip_mass(X @ R, "vertical"), rel=1e-10)


def test_rank_scar_candidates(square):
    reps = rank_scar_candidates(square.mesh, square.dofs, square.spectrum, range(1, 12), "ipr")
    assert len(reps) == 11
    vals = [r.ipr for r in reps]
    assert vals == sorted(vals, reverse=True)
    assert max(vals) <= 9 / 4 + 0.01
    one = rank_scar_candidates(square.mesh, square.dofs, square.spectrum, [4], "vstrip")
    assert len(one) == 1 and one[0].n == 4
    with pytest.raises(ValueError):
        rank_scar_candidates(square.mesh, square.dofs, square.spectrum, [1], "bogus")


def test_truncated_cluster_warns(square, caplog):
    # state 12 is half of the (2,4)/(4,2) pair; its partner was not computed
    rank_scar_candidates(square.mesh, square.dofs, square.spectrum, [12], "ipr")
    assert any("cut off" in r.getMessage() for r in caplog.records)


def test_raster_mass_and_symmetry(stadium):
    c = stadium.spectrum.vectors[:, 0]
    g = evaluate_eigenfunction(stadium.mesh, stadium.dofs, c, 400, 200, bbox=stadium.region.bbox(),
                               region=stadium.region)
    mass = float((g.values**2).sum() * g.cell_area)
    assert abs(mass - 1) < 2 / 200 + stadium.mesh.params.chord_tolerance
    d = g.values**2
    for flipped in (d[::-1, :], d[:, ::-1]):
        assert np.abs(d - flipped).sum() / d.sum() < 0.01


def test_render_pgm_format():
    grid = FieldGrid(2, 2, (0, 1, 0, 1), np.array([[0.0, 0.0], [0.0, 3.0]]), np.ones((2, 2), bool))
    data = render_pgm(grid, "density")
    assert data.startswith(b"P5 2 2 255\n")
    pix = np.frombuffer(data[len(b"P5 2 2 255\n"):], dtype=np.uint8)
    assert sorted(pix.tolist()) == [0, 0, 0, 255]
    zero = FieldGrid(4, 3, (0, 1, 0, 1), np.zeros((3, 4)), np.ones((3, 4), bool))
    body = render_pgm(zero, "density")[len(b"P5 4 3 255\n"):]
    assert body == bytes(12)
    psi = render_pgm(zero, "psi")[len(b"P5 4 3 255\n"):]
    assert set(psi) == {128}
    with pytest.raises(ValueError):
        render_pgm(zero, "contour")


def test_ground_state_psi_render_no_dark_pixels(stadium):
    c = normalize_l2(stadium.M, stadium.spectrum.vectors[:, 0])
    g = evaluate_eigenfunction(stadium.mesh, stadium.dofs, c, 128, 64, bbox=stadium.region.bbox())
    pix = np.frombuffer(render_pgm(g, "psi")[len(b"P5 128 64 255\n"):], dtype=np.uint8).reshape(64, 128)
    mask = g.mask[::-1]
    assert pix[mask].min() >= 127
