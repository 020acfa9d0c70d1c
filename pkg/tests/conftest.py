import numpy as np
import pytest

from fembilliards.geometry import Rectangle
from fembilliards.mesh import MeshParams, TriMesh, generate_mesh


@pytest.fixture(scope="session")
def square_mesh_coarse():
    return generate_mesh(Rectangle(1, 1), MeshParams(0.01))


def structured_square(n: int) -> TriMesh:
    """n x n grid of the unit square, each cell cut along its diagonal."""
    xs = np.linspace(0, 1, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    verts = np.column_stack([X.ravel(), Y.ravel()])
    tris = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            b, c, d = a + 1, a + n + 2, a + n + 1
            tris += [[a, b, c], [a, c, d]]
    tris = np.array(tris)
    on_edge = (np.isclose(verts, 0) | np.isclose(verts, 1)).any(axis=1)
    return TriMesh(verts, tris, on_edge, MeshParams(0.5 / n**2 * 1.0000001), min_angle=45.0)


# one line per acceptance criterion, shown at the end of every run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
