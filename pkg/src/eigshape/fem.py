"""P1 finite elements for the Dirichlet Laplacian eigenproblem.

Matrices are plain ``scipy.sparse.csr_matrix``. The eigensolver is a block
shift-invert subspace iteration with Rayleigh-Ritz projection and locking of
converged pairs, started from a fixed pseudo-random block so results are
deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import DegenerateTriangle, FactorizationFailure, NoConvergence
from .mesh import TriangleMesh

START_SEED = 20071


def element_stiffness(p) -> np.ndarray:
    """Exact P1 stiffness of one triangle ``p`` (3x2)."""
    return _element_matrices(np.asarray(p, dtype=float)[None])[0][0]


def element_mass(p) -> np.ndarray:
    return _element_matrices(np.asarray(p, dtype=float)[None])[1][0]


_MASS_REF = (np.ones((3, 3)) + np.eye(3)) / 12.0


def _element_matrices(p):
    # edge k is opposite vertex k; grad(phi_k) = rot(e_k) / (2 A)
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    area = 0.5 * (e[:, 2, 0] * (-e[:, 1, 1]) - e[:, 2, 1] * (-e[:, 1, 0]))
    with np.errstate(divide="ignore", invalid="ignore"):  # callers reject tiny areas
        Ke = np.einsum("tkd,tld->tkl", e, e) / (4 * area)[:, None, None]
    Me = area[:, None, None] * _MASS_REF
    return Ke, Me, area


def assemble_full(m: TriangleMesh):
    """Stiffness and mass over all nodes (no boundary condition)."""
    Ke, Me, area = _element_matrices(m.nodes[m.triangles])
    if np.any(area < 1e-14 * np.sum(np.abs(area))):
        raise DegenerateTriangle(f"triangle area {area.min():.3e} below threshold")
    t = m.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = m.n_nodes
    K = sp.csr_matrix((Ke.ravel(), (rows, cols)), shape=(n, n))
    M = sp.csr_matrix((Me.ravel(), (rows, cols)), shape=(n, n))
    return K, M


def assemble(m: TriangleMesh):
    """Stiffness and mass on the interior degrees of freedom (Dirichlet condition)."""
    K, M = assemble_full(m)
    free = m.interior_nodes
    return K[free][:, free].tocsr(), M[free][:, free].tocsr()


@dataclass
class SpectralResult:
    """Lowest eigenpairs of ``K u = lambda M u``.

    ``eigenvectors`` holds interior nodal values column-wise and is
    M-orthonormal. ``residuals`` are ``||K u - lambda M u|| / (lambda ||M u||)``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    orthonormality_defect: float
    iterations: int
    free_nodes: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)

    def full_vector(self, m: TriangleMesh, which: int) -> np.ndarray:
        """Eigenvector ``which`` (0-based) extended by zero to all mesh nodes."""
        u = np.zeros(m.n_nodes)
        u[m.interior_nodes] = self.eigenvectors[:, which]
        return u

    def gap(self, which: int = 1) -> float:
        """Relative distance of eigenvalue ``which`` to its nearest neighbour."""
        lam = self.eigenvalues
        d = [abs(lam[j] - lam[which]) for j in (which - 1, which + 1) if 0 <= j < len(lam)]
        return min(d) / lam[which]


def solve_lowest(K, M, m_eigs: int = 4, tol: float = 1e-10, shift: float = 0.0,
                 block: int | None = None, max_iter: int = 1000) -> SpectralResult:
    """Lowest ``m_eigs`` eigenpairs by shift-invert block subspace iteration.

    Parameters
    ----------
    K, M : sparse matrices
        Stiffness and mass with the Dirichlet rows already removed.
    tol : float
        Target relative residual for every returned pair.
    shift : float
        Factorized operator is ``K - shift * M``; must keep it nonsingular.
    block : int, optional
        Subspace width, defaults to ``2 * m_eigs + 2``.
    """
    n = K.shape[0]
    if not 1 <= m_eigs <= 8:
        raise ValueError("m_eigs must be in 1..8")
    p = min(block or 2 * m_eigs + 2, n)
    if p < m_eigs:
        raise ValueError("problem too small for the requested number of eigenpairs")
    try:
        lu = spla.splu((K - shift * M).tocsc(), permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:
        raise FactorizationFailure(str(exc)) from exc

    rng = np.random.default_rng(START_SEED)
    X = rng.standard_normal((n, p))
    locked = np.zeros((n, 0))
    locked_vals = np.zeros(0)
    res = np.full(m_eigs, np.inf)
    for it in range(1, max_iter + 1):
        Y = lu.solve(M @ X)
        if locked.shape[1]:
            Y -= locked @ (locked.T @ (M @ Y))
        A = Y.T @ (K @ Y)
        B = Y.T @ (M @ Y)
        vals, V = la.eigh(0.5 * (A + A.T), 0.5 * (B + B.T))
        X = Y @ V
        KX, MX = K @ X, M @ X
        R = KX - MX * vals
        rel = np.linalg.norm(R, axis=0) / (np.abs(vals) * np.linalg.norm(MX, axis=0))
        need = m_eigs - locked.shape[1]
        res[locked.shape[1]:] = rel[:need]
        ok = rel[:need] < tol
        n_new = need if ok.all() else int(np.argmin(ok))
        if n_new:
            locked = np.hstack([locked, X[:, :n_new]])
            locked_vals = np.concatenate([locked_vals, vals[:n_new]])
            X = X[:, n_new:]
        if locked.shape[1] == m_eigs:
            break
    else:
        raise NoConvergence(f"subspace iteration stalled after {max_iter} iterations",
                            residual=float(np.max(res)))

    order = np.argsort(locked_vals, kind="stable")
    lam = locked_vals[order]
    U = locked[:, order]
    # deterministic sign: largest-magnitude entry positive
    idx = np.argmax(np.abs(U), axis=0)
    U = U * np.sign(U[idx, np.arange(U.shape[1])])
    G = U.T @ (M @ U)
    defect = float(np.max(np.abs(G - np.eye(m_eigs))))
    R = K @ U - (M @ U) * lam
    residuals = np.linalg.norm(R, axis=0) / (lam * np.linalg.norm(M @ U, axis=0))
    return SpectralResult(lam, U, residuals, defect, it, info={"block": p, "shift": shift})


def eigensolve(m: TriangleMesh, m_eigs: int = 4, tol: float = 1e-10) -> SpectralResult:
    """Assemble on ``m`` and solve; the result remembers the free-node indices."""
    K, M = assemble(m)
    sr = solve_lowest(K, M, m_eigs=m_eigs, tol=tol)
    sr.free_nodes = m.interior_nodes
    return sr


def boundary_mass(m: TriangleMesh, lumped: bool = False) -> sp.csr_matrix:
    """1-D P1 mass matrix on the boundary cycle, ordered like ``boundary_nodes``."""
    nb = len(m.boundary_nodes)
    pts = m.nodes[m.boundary_nodes]
    L = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)  # edge j -> j+1
    i = np.arange(nb)
    ip = (i + 1) % nb
    diag = (L + np.roll(L, 1)) / 2 if lumped else (L + np.roll(L, 1)) / 3
    if lumped:
        return sp.diags(diag).tocsr()
    rows = np.concatenate([i, i, ip])
    cols = np.concatenate([i, ip, i])
    vals = np.concatenate([diag, L / 6, L / 6])
    return sp.csr_matrix((vals, (rows, cols)), shape=(nb, nb))


def normal_derivative_trace(m: TriangleMesh, sr: SpectralResult, which: int,
                            lumped: bool = False, full=None) -> np.ndarray:
    """Outward normal derivative of eigenfunction ``which`` at the boundary nodes.

    Recovered from the residual of the discrete equation at the boundary
    rows, ``(K u - lambda M u)_p = int g phi_p ds``, solved with the boundary
    mass matrix. ``full`` may pass precomputed ``assemble_full(m)``.
    """
    K, M = full if full is not None else assemble_full(m)
    u = sr.full_vector(m, which)
    lam = sr.eigenvalues[which]
    b = m.boundary_nodes
    r = (K[b] @ u) - lam * (M[b] @ u)
    B = boundary_mass(m, lumped=lumped)
    if lumped:
        return r / B.diagonal()
    return spla.spsolve(B.tocsc(), r)
