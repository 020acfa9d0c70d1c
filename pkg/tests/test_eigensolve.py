import math

import numpy as np
import pytest
import scipy.linalg as la
import scipy.sparse as sp

from fembilliards.assembly import assemble
from fembilliards.eigensolve import (
    DimensionMismatch,
    NoConvergence,
    SolverFault,
    SolverOpts,
    Spectrum,
    energies,
    inertia_count,
    orthonormality_error,
    residual_report,
    smallest_eigenpairs,
    start_block,
)
from fembilliards.geometry import Circle, EquilateralTriangle, Rectangle, Stadium, StarPolygon
from fembilliards.mesh import MeshParams, generate_mesh


def _system(region, h, order):
    K, M, dofs = assemble(generate_mesh(region, MeshParams(h)), order)
    return K, M, dofs


def test_identity_pencil():
    n = 20
    I = sp.identity(n, format="csr")
    s = smallest_eigenpairs(I, I, SolverOpts(3))
    assert np.allclose(s.eigenvalues, 1.0, atol=1e-12)
    assert orthonormality_error(I, s) < 1e-12


def test_diagonal_pencil():
    K = sp.diags([1.0, 4.0, 9.0]).tocsr()
    s = smallest_eigenpairs(K, sp.identity(3, format="csr"), SolverOpts(2))
    assert np.allclose(s.eigenvalues, [1.0, 4.0], rtol=1e-13)
    assert np.allclose(s.k, [1.0, 2.0])


def test_dimension_errors():
    K = sp.identity(4, format="csr")
    with pytest.raises(DimensionMismatch):
        smallest_eigenpairs(K, sp.identity(5, format="csr"), SolverOpts(1))
    with pytest.raises(DimensionMismatch):
        smallest_eigenpairs(K, K, SolverOpts(5))


def test_opts_validation():
    for bad in (dict(num_states=0), dict(num_states=1, rel_residual_tol=1e-3),
                dict(num_states=1, shift=-1.0), dict(num_states=1, block_size=0)):
        with pytest.raises(ValueError):
            SolverOpts(**bad)


def test_nonpositive_eigenvalue_is_fault():
    with pytest.raises(SolverFault):
        Spectrum(np.array([-1.0]), np.zeros((1, 1)), np.zeros(1), np.ones(1, bool))


@pytest.mark.parametrize("region,h,order", [
    (Rectangle(1, 1), 0.01, 1), (Rectangle(1, 1), 0.02, 2), (Circle(1), 0.02, 1),
    (Stadium(1, 1), 0.08, 2), (StarPolygon(5, 1), 0.01, 1), (EquilateralTriangle(1), 0.005, 1),
])
def test_dense_oracle_equivalence(region, h, order):
    K, M, _ = _system(region, h, order)
    n = K.shape[0]
    assert n <= 300
    m = min(20, n - 2)
    dense = la.eigh(K.toarray(), M.toarray(), eigvals_only=True)[:m]
    s = smallest_eigenpairs(K, M, SolverOpts(m))
    assert np.max(np.abs(s.eigenvalues - dense) / dense) < 1e-9
    assert np.max(residual_report(K, M, s)) <= 1e-9
    assert orthonormality_error(M, s) <= 1e-8


def test_coarse_square_ground_state_above_exact():
    prev = math.inf
    for h in (0.02, 0.01, 0.005):
        K, M, _ = _system(Rectangle(1, 1), h, 1)
        lam = smallest_eigenpairs(K, M, SolverOpts(1)).eigenvalues[0]
        assert lam >= 2 * math.pi**2
        assert lam < prev * (1 + 1e-3)
        prev = lam


def test_long_spectrum_with_slicing():
    K, M, _ = _system(Stadium(1, 1), 4e-3, 2)
    opts = SolverOpts(300, window=60)
    s = smallest_eigenpairs(K, M, opts)
    assert len(s.shifts) > 1
    assert s.certified >= 300
    assert np.all(np.diff(s.eigenvalues) >= 0)
    assert np.max(residual_report(K, M, s)) <= 1e-9
    assert orthonormality_error(M, s) <= 1e-8
    # no eigenvalue below the last one was missed
    assert inertia_count(K, M, s.eigenvalues[-1] * (1 + 1e-9)) >= 300
    assert inertia_count(K, M, s.eigenvalues[0] * (1 - 1e-9)) == 0


def test_degenerate_pairs_resolved():
    K, M, _ = _system(Circle(1), 5e-3, 2)
    s = smallest_eigenpairs(K, M, SolverOpts(6))
    k = s.k
    assert abs(k[1] - k[2]) / k[1] < 1e-4 and abs(k[3] - k[4]) / k[3] < 1e-4
    assert np.max(residual_report(K, M, s)) <= 1e-9


def test_shift_invariance():
    K, M, _ = _system(Rectangle(1, 1), 0.005, 2)
    a = smallest_eigenpairs(K, M, SolverOpts(8))
    b = smallest_eigenpairs(K, M, SolverOpts(8, shift=a.eigenvalues[0] / 2))
    assert np.allclose(a.eigenvalues, b.eigenvalues, rtol=1e-10)


def test_shift_above_ground_state_falls_back(caplog):
    K, M, _ = _system(Rectangle(1, 1), 0.01, 1)
    ref = smallest_eigenpairs(K, M, SolverOpts(4))
    s = smallest_eigenpairs(K, M, SolverOpts(4, shift=60.0))
    assert np.allclose(s.eigenvalues, ref.eigenvalues, rtol=1e-10)


def test_determinism():
    K, M, _ = _system(Stadium(1, 1), 0.01, 2)
    a = smallest_eigenpairs(K, M, SolverOpts(30))
    b = smallest_eigenpairs(K, M, SolverOpts(30))
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.vectors, b.vectors)


def test_sign_convention():
    K, M, _ = _system(Rectangle(1, 1), 0.01, 1)
    s = smallest_eigenpairs(K, M, SolverOpts(5))
    for j in range(5):
        x = s.vectors[:, j]
        assert x[np.argmax(np.abs(x))] > 0


def test_lobpcg_cross_check():
    K, M, _ = _system(Rectangle(1, 1), 0.005, 1)
    a = smallest_eigenpairs(K, M, SolverOpts(6))
    b = smallest_eigenpairs(K, M, SolverOpts(6, rel_residual_tol=1e-8), method="lobpcg")
    assert np.allclose(a.eigenvalues, b.eigenvalues, rtol=1e-9)


def test_no_convergence_carries_partial():
    K, M, _ = _system(Rectangle(1, 1), 0.005, 1)
    with pytest.raises(NoConvergence) as info:
        smallest_eigenpairs(K, M, SolverOpts(6, rel_residual_tol=1e-14, max_iterations=2), method="lobpcg")
    assert info.value.partial is not None
    assert len(info.value.partial.converged) == 6


def test_residual_report_exact_and_perturbed():
    K = sp.csr_matrix(np.array([[2.0, 1.0], [1.0, 3.0]]))
    M = sp.csr_matrix(np.array([[2.0, 0.0], [0.0, 1.0]]))
    lam, X = la.eigh(K.toarray(), M.toarray())
    s = Spectrum(lam, X, np.zeros(2), np.ones(2, bool))
    assert np.max(residual_report(K, M, s)) <= 1e-14
    y = X[:, 0] + 1e-3 * X[:, 1]
    y /= math.sqrt(y @ M @ y)
    r = residual_report(K, M, Spectrum(lam[:1], y[:, None], np.zeros(1), np.ones(1, bool)))[0]
    assert 1e-5 < r < 1e-1
    with pytest.raises(DimensionMismatch):
        residual_report(K, M, Spectrum(lam, np.zeros((3, 2)), np.zeros(2), np.ones(2, bool)))


def test_energies():
    assert energies(np.array([2.4048]))[0] == pytest.approx(2.89153, abs=1e-5)
    assert energies(np.array([math.pi * math.sqrt(2)]))[0] == pytest.approx(math.pi**2, rel=1e-14)


def test_start_block_deterministic():
    a = start_block(50, 4)
    assert np.array_equal(a, start_block(50, 4))
    assert np.linalg.matrix_rank(a) == 4
    assert np.all(np.abs(a) <= 0.5)
