"""Smallest eigenpairs of the symmetric-definite pencil K x = lambda M x.

The main path is a shift-invert block Lanczos iteration in Krylov-Schur
(thick restart) form: the operator T = (K - sigma M)^{-1} M is applied
through one sparse LU factorization, and its Ritz values theta map back to
lambda = sigma + 1/theta. Long spectra are computed in windows ("spectrum
slicing"), and every window is certified by Sylvester inertia counts taken
from the LDL^T-equivalent factorization of K - tau M.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "SolverOpts",
    "Spectrum",
    "NoConvergence",
    "DimensionMismatch",
    "SolverFault",
    "ShiftInvert",
    "smallest_eigenpairs",
    "residual_report",
    "orthonormality_error",
    "energies",
    "inertia_count",
    "start_block",
]

log = logging.getLogger(__name__)


class NoConvergence(RuntimeError):
    """Residual tolerance not reached; ``partial`` holds what was obtained."""

    def __init__(self, message: str, partial: "Spectrum | None" = None):
        super().__init__(message)
        self.partial = partial


class DimensionMismatch(ValueError):
    pass


class SolverFault(ArithmeticError):
    """Internal inconsistency, e.g. a negative eigenvalue of an SPD pencil."""


@dataclass(frozen=True)
class SolverOpts:
    num_states: int
    rel_residual_tol: float = 1e-9
    max_iterations: int = 2000
    shift: float = 0.0
    block_size: int = 8
    window: int = 160
    """Eigenpairs accepted per spectrum slice."""

    def __post_init__(self):
        if int(self.num_states) != self.num_states or self.num_states < 1:
            raise ValueError("num_states must be a positive integer")
        if not 0 < self.rel_residual_tol <= 1e-4:
            raise ValueError("rel_residual_tol must lie in (0, 1e-4]")
        if self.shift < 0:
            raise ValueError("shift must be non-negative")
        if self.block_size < 1 or self.max_iterations < 1 or self.window < 1:
            raise ValueError("block_size, max_iterations and window must be positive")


@dataclass(eq=False)
class Spectrum:
    """Ascending eigenpairs; ``vectors[:, n]`` holds the interior coefficients of state n."""

    eigenvalues: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray
    dofs: object = None
    certified: int | None = None
    """Number of eigenvalues whose completeness was verified by inertia."""
    shifts: list = field(default_factory=list)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if np.any(lam <= 0):
            raise SolverFault(f"non-positive eigenvalue {lam.min():.3e} from an SPD pencil")
        self.eigenvalues = lam

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def k(self) -> np.ndarray:
        return np.sqrt(self.eigenvalues)

    def truncate(self, m: int) -> "Spectrum":
        return Spectrum(self.eigenvalues[:m], self.vectors[:, :m], self.residuals[:m],
                        self.converged[:m], self.dofs, self.certified, list(self.shifts))


def start_block(n: int, count: int, offset: int = 0, power: int = 1) -> np.ndarray:
    """Deterministic quasi-random starting vectors.

    Column j is the Weyl sequence frac(i**power * sqrt(p)) - 1/2 over row
    index i, with p the (offset + j)-th prime; no RNG state is involved.
    Windows start from power 1; blocks injected mid-iteration use power 2
    so they never repeat a window's start.
    """
    primes = _primes(offset + count)[offset:offset + count]
    i = np.arange(1, n + 1, dtype=float)[:, None] ** power
    return np.mod(i * np.sqrt(np.asarray(primes, dtype=float))[None, :], 1.0) - 0.5


def _primes(count: int) -> list[int]:
    out: list[int] = []
    c = 2
    while len(out) < count:
        if all(c % p for p in out if p * p <= c):
            out.append(c)
        c += 1
    return out


class ShiftInvert:
    """Factorization of K - sigma M applied as T = (K - sigma M)^{-1} M.

    SuperLU runs in symmetric mode with diagonal pivoting only, so the row
    and column permutations coincide and sign(diag U) gives the inertia.
    """

    def __init__(self, K, M, sigma: float):
        self.sigma = float(sigma)
        self.M = M
        A = (K - self.sigma * M).tocsc()
        self.lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                            options=dict(SymmetricMode=True))
        self.symmetric_perm = bool(np.array_equal(self.lu.perm_r, self.lu.perm_c))

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self.lu.solve(np.asarray(self.M @ X))

    def negative_count(self) -> int:
        if not self.symmetric_perm:
            raise SolverFault("factorization pivoted off the diagonal; inertia unavailable")
        return int(np.count_nonzero(self.lu.U.diagonal() < 0))


def inertia_count(K, M, tau: float) -> int:
    """Number of eigenvalues of the pencil strictly below ``tau``."""
    return ShiftInvert(K, M, tau).negative_count()


def _m_orth(Z, M, V=None, drop: float = 1e-10):
    """M-orthonormalize the columns of Z against V and each other.

    Block projection against V, then Gram-Schmidt with reorthogonalization
    inside the block; the whole sweep runs twice. Columns whose norm falls
    below ``drop`` times their original norm are discarded as dependent.
    """
    Z = np.array(Z, dtype=float, copy=True)
    if Z.shape[1] == 0:
        return Z
    ref = np.sqrt(np.maximum(np.einsum("ij,ij->j", Z, M @ Z), 0.0))
    for sweep in range(2):
        if V is not None and V.shape[1]:
            for _ in range(2 - sweep):
                Z -= V @ (V.T @ (M @ Z))
        cols: list[np.ndarray] = []
        for j in range(Z.shape[1]):
            z = Z[:, j]
            if cols:
                Q = np.column_stack(cols)
                for _ in range(2):
                    z = z - Q @ (Q.T @ (M @ z))
            nrm = math.sqrt(max(float(z @ (M @ z)), 0.0))
            if nrm <= drop * ref[j] or nrm == 0.0:
                continue
            cols.append(z / nrm)
        if not cols:
            return Z[:, :0]
        Z = np.column_stack(cols)
        ref = np.ones(Z.shape[1])
    return Z


def _explicit_residuals(K, M, X, lam):
    KX = K @ X
    R = KX - (M @ X) * lam
    den = np.linalg.norm(KX, axis=0)
    den[den == 0] = 1.0
    return np.linalg.norm(R, axis=0) / den


def _krylov_schur(K, M, op: ShiftInvert, nev: int, tol: float, block: int,
                  max_iter: int, start: np.ndarray):
    """Ritz pairs nearest the shift of ``op`` (largest |theta|).

    Returns (lambda, X, residuals, iterations) for ``nev`` pairs in no
    particular order.
    """
    n = K.shape[0]
    sigma = op.sigma
    nev = min(nev, n)
    max_basis = min(n, max(2 * nev + 2 * block, nev + 4 * block, 24))

    V = _m_orth(start, M)
    W = op(V)
    H = V.T @ (M @ W)
    G = W.T @ (M @ W)
    offset = 0
    last = V.shape[1]
    explicit = False

    for it in range(1, max_iter + 1):
        H = 0.5 * (H + H.T)
        theta, Y = la.eigh(H)
        order = np.argsort(-np.abs(theta), kind="stable")
        want = order[:nev]
        tw, Yw = theta[want], Y[:, want]
        # M-norm of the T residual from y^T (W^T M W) y - theta^2; loses
        # accuracy below ~1e-8, so it only decides when to check explicitly
        est2 = np.einsum("ij,ij->j", Yw, G @ Yw) - tw**2
        est = np.sqrt(np.maximum(est2, 0.0)) / np.abs(tw)
        if len(theta) < nev:
            est = np.ones(len(want))
        elif explicit or V.shape[1] >= n or np.all(est < 1e-5) or it == max_iter:
            X = V @ Yw
            lam = sigma + 1.0 / tw
            res = _explicit_residuals(K, M, X, lam)
            if np.all(res <= tol) or it == max_iter:
                return lam, X, res, it
            explicit = True
        # block Krylov continuation: the newest T-block, orthogonalized
        # against the whole basis *before* any restart
        Z = _m_orth(W[:, -last:], M, V)
        if Z.shape[1] == 0:
            if V.shape[1] >= n:
                continue
            Z = _m_orth(start_block(n, block, offset, power=2), M, V)
            offset += block
            if Z.shape[1] == 0:
                continue
        if V.shape[1] + Z.shape[1] > max_basis and V.shape[1] > nev:
            keep = order[: min(max(nev + block, (nev + max_basis) // 2), max_basis - block)]
            Yk = Y[:, keep]
            V, W = V @ Yk, W @ Yk
            G = Yk.T @ G @ Yk
            H = np.diag(theta[keep])
        TZ = op(Z)
        MTZ = M @ TZ
        Hvz = V.T @ MTZ
        Gwz = W.T @ MTZ
        H = np.block([[H, Hvz], [Hvz.T, Z.T @ MTZ]])
        G = np.block([[G, Gwz], [Gwz.T, TZ.T @ MTZ]])
        V = np.hstack([V, Z])
        W = np.hstack([W, TZ])
        last = Z.shape[1]
    raise AssertionError("unreachable")


def _fix_signs(X: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(X), axis=0)
    s = np.sign(X[idx, np.arange(X.shape[1])])
    s[s == 0] = 1.0
    return X * s


def _rayleigh_ritz(K, M, X):
    """Re-diagonalize a converged basis to restore exact M-orthonormality."""
    A = X.T @ (K @ X)
    B = X.T @ (M @ X)
    lam, Y = la.eigh(0.5 * (A + A.T), 0.5 * (B + B.T))
    return lam, X @ Y


def _best_gap(vals: np.ndarray, lo_index: int) -> tuple[float, int]:
    """Cut point inside the widest relative gap above ``vals[lo_index]``.

    Returns (tau, count_below_tau).
    """
    best, j_best = -1.0, len(vals) - 1
    for j in range(lo_index, len(vals) - 1):
        gap = (vals[j + 1] - vals[j]) / vals[j + 1]
        if gap > best * (1 + 1e-12):
            best, j_best = gap, j
    tau = 0.5 * (vals[j_best] + vals[j_best + 1])
    return tau, j_best + 1


def _check_inputs(K, M, m):
    if K.shape != M.shape or K.shape[0] != K.shape[1]:
        raise DimensionMismatch(f"K {K.shape} and M {M.shape} must be square and equal")
    if m > K.shape[0]:
        raise DimensionMismatch(f"requested {m} states from a system of dimension {K.shape[0]}")


def smallest_eigenpairs(K, M, opts: SolverOpts, dofs=None, method: str = "lanczos") -> Spectrum:
    """The ``opts.num_states`` smallest eigenpairs of K x = lambda M x.

    Parameters
    ----------
    K, M : sparse matrices
        Symmetric positive definite stiffness and mass matrices.
    opts : SolverOpts
    dofs : DofMap, optional
        Carried through to the returned spectrum.
    method : {"lanczos", "lobpcg"}
        ``"lobpcg"`` is the factorization-free cross-check path.

    Raises
    ------
    NoConvergence
        Tolerance not met; ``exc.partial`` carries the unconverged spectrum.
    """
    K = sp.csr_matrix(K)
    M = sp.csr_matrix(M)
    m = int(opts.num_states)
    _check_inputs(K, M, m)
    if method == "lobpcg":
        spec = _lobpcg(K, M, opts)
    elif method == "lanczos":
        spec = _sliced(K, M, opts)
    else:
        raise ValueError(f"unknown method {method!r}")
    spec.dofs = dofs
    if not np.all(spec.converged):
        bad = int(np.count_nonzero(~spec.converged))
        raise NoConvergence(f"{bad} of {m} eigenpairs above tolerance {opts.rel_residual_tol:g}", spec)
    return spec


def _sliced(K, M, opts: SolverOpts) -> Spectrum:
    """Windowed shift-invert solve; each window is certified by inertia."""
    n = K.shape[0]
    m = int(opts.num_states)
    tol = opts.rel_residual_tol
    b = min(opts.block_size, n)
    pad = max(b, 4)

    sigma = float(opts.shift)
    if sigma > 0 and inertia_count(K, M, sigma) > 0:
        log.warning("shift %.6g lies above the lowest eigenvalue; using 0", sigma)
        sigma = 0.0

    lams, vecs, shifts = [], [], []
    lo, total, offset = 0.0, 0, 0
    while total < m:
        remaining = m - total
        want = min(remaining, opts.window)
        nev = want + pad if total == 0 else int(math.ceil(1.2 * (want + pad)))
        for _attempt in range(6):
            nev = min(nev, n)
            op = ShiftInvert(K, M, sigma)
            lam, X, res, _ = _krylov_schur(K, M, op, nev, tol, b, opts.max_iterations,
                                           start_block(n, b, offset))
            offset += b
            order = np.argsort(lam, kind="stable")
            lam, X = lam[order], X[:, order]
            if total and sigma - np.max(np.abs(lam - sigma)) > lo:
                # window does not reach down to the last certified cut
                sigma = lo + 0.5 * (sigma - lo)
                continue
            sel = np.flatnonzero(lam > lo)
            cand = lam[sel]
            if len(cand) == n - total:
                tau, count = cand[-1] * (1 + 1e-6), len(cand)
            else:
                first_cut = remaining - 1 if remaining <= opts.window else int(0.6 * (len(cand) - 1))
                if len(cand) < 2 or first_cut > len(cand) - 2:
                    nev += 2 * pad
                    continue
                tau, count = _best_gap(cand, first_cut)
                if cand[count] - cand[count - 1] <= 1e-8 * cand[count]:
                    nev += 2 * pad
                    continue
            found = inertia_count(K, M, tau)
            if found == total + count:
                break
            log.info("slice at sigma=%.6g: inertia %d vs %d found; retrying",
                     sigma, found, total + count)
            nev += max(2 * pad, found - total - count + pad)
        else:
            raise NoConvergence(f"spectrum slice at sigma={sigma:.6g} could not be certified")

        idx = sel[:count]
        lams.append(lam[idx])
        vecs.append(X[:, idx])
        shifts.append(sigma)
        width = tau - lo
        total += count
        lo = tau
        if total < m:
            nxt = min(m - total, opts.window) + pad
            sigma = lo + 0.45 * nxt * width / count

    lam, X = _rayleigh_ritz(K, M, np.hstack(vecs))
    X = _fix_signs(X)
    res = _explicit_residuals(K, M, X, lam)
    return Spectrum(lam[:m], X[:, :m], res[:m], res[:m] <= tol, None, total, shifts)


def _lobpcg(K, M, opts: SolverOpts) -> Spectrum:
    n = K.shape[0]
    m = int(opts.num_states)
    nb = min(n, m + max(opts.block_size, 4))
    X0 = start_block(n, nb)
    dinv = 1.0 / K.diagonal()
    precond = spla.LinearOperator((n, n), matvec=lambda x: dinv * x.ravel(),
                                  matmat=lambda X: dinv[:, None] * X, dtype=float)
    lam, X = spla.lobpcg(K, X0, B=M, M=precond, largest=False, tol=opts.rel_residual_tol * 1e-2,
                         maxiter=max(opts.max_iterations, 500))
    order = np.argsort(lam)
    lam, X = _rayleigh_ritz(K, M, X[:, order])
    X = _fix_signs(X)
    res = _explicit_residuals(K, M, X, lam)
    return Spectrum(lam[:m], X[:, :m], res[:m], res[:m] <= opts.rel_residual_tol)


def residual_report(K, M, spectrum: Spectrum) -> np.ndarray:
    """||K x - lambda M x|| / ||K x|| per pair, recomputed from scratch."""
    X = np.asarray(spectrum.vectors)
    if K.shape != M.shape or X.shape[0] != K.shape[0]:
        raise DimensionMismatch("spectrum vectors do not match the matrix dimension")
    return _explicit_residuals(K, M, X, np.asarray(spectrum.eigenvalues))


def orthonormality_error(M, spectrum: Spectrum) -> float:
    """max |x_i^T M x_j - delta_ij|."""
    X = np.asarray(spectrum.vectors)
    G = X.T @ (M @ X)
    return float(np.max(np.abs(G - np.eye(G.shape[0])))) if G.size else 0.0


def energies(spectrum) -> np.ndarray:
    """E_n = k_n^2 / 2 in atomic units."""
    lam = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum, dtype=float) ** 2
    return 0.5 * np.asarray(lam, dtype=float)
