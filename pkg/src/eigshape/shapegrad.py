"""Shape derivatives in the Fourier chart.

A coefficient perturbation moves the boundary radially, ``r -> r + eps*phi``
with ``phi`` one of ``1, cos k theta, sin k theta``. Writing boundary integrals
in ``theta`` folds the Jacobian in exactly: ``V.n ds = phi r dtheta`` and
``X.n ds = r^2 dtheta``. Hence

    dP      =  int C phi r dtheta
    dlambda = -int (du/dn)^2 phi r dtheta        (simple eigenvalue)

Two evaluation routes exist for the eigenvalue derivative:

``"boundary"``
    the Hadamard boundary integral above, using the recovered normal
    derivative trace (continuum formula, O(h^2) consistent);
``"volume"``
    ``u^T (dK - lambda dM) u`` with the mesh nodes moved along the polar
    chart. This is the distributed form of the same derivative evaluated on
    the finite-element solution and equals the exact derivative of the
    discrete eigenvalue.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fem
from .curve import N_QUAD, FourierBoundary, curvature, perimeter, theta_grid
from .exceptions import DegenerateEigenvalue
from .mesh import TriangleMesh

GAP_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class ShapeGradient:
    """Derivative of a shape functional with respect to each Fourier coefficient."""

    d_a0: float
    d_a: np.ndarray
    d_b: np.ndarray

    @property
    def K(self) -> int:
        return len(self.d_a)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([[self.d_a0], self.d_a, self.d_b])

    @classmethod
    def from_vector(cls, g) -> "ShapeGradient":
        g = np.asarray(g, dtype=float)
        K = (g.size - 1) // 2
        return cls(float(g[0]), g[1 : K + 1].copy(), g[K + 1 :].copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_vector()))

    def dilation_component(self, fb: FourierBoundary) -> float:
        """Derivative along the dilation direction (the coefficient vector itself)."""
        return float(self.to_vector() @ fb.to_vector())

    def translation_components(self) -> np.ndarray:
        """``(d_a1, d_b1)``: first-order translations, frozen by the optimizer."""
        if self.K == 0:
            return np.zeros(2)
        return np.array([self.d_a[0], self.d_b[0]])

    def __add__(self, other):
        return ShapeGradient.from_vector(self.to_vector() + other.to_vector())

    def __mul__(self, s):
        return ShapeGradient.from_vector(s * self.to_vector())

    __rmul__ = __mul__


def basis_functions(K: int, theta) -> np.ndarray:
    """Rows ``1, cos theta..cos K theta, sin theta..sin K theta`` sampled at ``theta``."""
    theta = np.asarray(theta, dtype=float)
    k = np.arange(1, K + 1)
    kt = np.multiply.outer(k, theta)
    return np.vstack([np.ones((1, theta.size)), np.cos(kt), np.sin(kt)])


def _phi_values(phi, theta):
    if callable(phi):
        return np.broadcast_to(np.asarray(phi(theta), dtype=float), np.shape(theta))
    c = np.asarray(phi, dtype=float)
    return FourierBoundary.from_vector(c).radius(theta)


def d_perimeter(fb: FourierBoundary, n_q: int = N_QUAD, K: int | None = None) -> ShapeGradient:
    """Perimeter gradient ``int C phi r dtheta`` for every basis function."""
    fb.validate(n_q)
    K = fb.K if K is None else K
    theta = theta_grid(n_q)
    w = curvature(fb, theta) * fb.radius(theta) * (2 * np.pi / n_q)
    return ShapeGradient.from_vector(basis_functions(K, theta) @ w)


def directional_d_perimeter(fb: FourierBoundary, phi, n_q: int = N_QUAD) -> float:
    theta = theta_grid(n_q)
    return float(np.sum(curvature(fb, theta) * fb.radius(theta) * _phi_values(phi, theta)) * 2 * np.pi / n_q)


def boundary_trace(fb: FourierBoundary, m: TriangleMesh, sr, which: int, full=None):
    """``(theta, du/dn)`` at the boundary nodes for eigenfunction ``which`` (0-based)."""
    return m.boundary_theta, fem.normal_derivative_trace(m, sr, which, full=full)


def _check_simple(sr, which, gap_tol):
    gap = sr.gap(which)
    if gap < gap_tol:
        raise DegenerateEigenvalue(
            f"eigenvalue {which + 1} has relative gap {gap:.2e} < {gap_tol:.0e}; "
            "use d_lambda_double_matrix"
        )


def _node_velocity(m: TriangleMesh, phi_nodes):
    """Velocity of each mesh node when the radius moves by ``phi``."""
    e = np.column_stack([np.cos(m.node_theta), np.sin(m.node_theta)])
    return (m.node_rho * phi_nodes)[..., None] * e


def _volume_bilinear(m: TriangleMesh, U, lam, velocities):
    """``u_i^T (dK - lam dM) u_j`` for each velocity field.

    ``U`` is (n_nodes, p) full eigenvectors, ``lam`` the shared eigenvalue (or
    per-column eigenvalues for the diagonal case), ``velocities`` is
    (n_dirs, n_nodes, 2). Returns (n_dirs, p, p).
    """
    t = m.triangles
    p = m.nodes[t]
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    area = 0.5 * (e[:, 2, 0] * (-e[:, 1, 1]) - e[:, 2, 1] * (-e[:, 1, 0]))
    ue = U[t]  # (T, 3, p)
    q = np.einsum("tkp,tkd->tpd", ue, e)  # (T, p, 2)
    qq = np.einsum("tpd,tqd->tpq", q, q)
    mm = np.einsum("tkp,kl,tlq->tpq", ue, fem._MASS_REF, ue)
    lam = np.asarray(lam, dtype=float)
    out = np.empty((len(velocities), U.shape[1], U.shape[1]))
    for i, w in enumerate(velocities):
        we = w[t]
        de = np.stack([we[:, 2] - we[:, 1], we[:, 0] - we[:, 2], we[:, 1] - we[:, 0]], axis=1)
        darea = 0.5 * (de[:, 2, 0] * (-e[:, 1, 1]) - de[:, 2, 1] * (-e[:, 1, 0])
                       + e[:, 2, 0] * (-de[:, 1, 1]) - e[:, 2, 1] * (-de[:, 1, 0]))
        dq = np.einsum("tkp,tkd->tpd", ue, de)
        dqq = np.einsum("tpd,tqd->tpq", q, dq)
        dK = ((dqq + dqq.transpose(0, 2, 1)) / (4 * area)[:, None, None]
              - (darea / area)[:, None, None] * qq / (4 * area)[:, None, None])
        dM = darea[:, None, None] * mm
        sK = dK.sum(axis=0)
        sM = dM.sum(axis=0)
        if lam.ndim == 0:
            out[i] = sK - lam * sM
        else:
            out[i] = sK - lam[:, None] * sM
    return out


def d_lambda_simple(fb: FourierBoundary, m: TriangleMesh, sr, which: int = 1,
                    gap_tol: float = GAP_TOL, method: str = "volume",
                    K: int | None = None, full=None) -> ShapeGradient:
    """Gradient of the simple eigenvalue ``which`` (0-based, so 1 is lambda_2).

    Raises :class:`DegenerateEigenvalue` when the relative gap to a neighbour
    is below ``gap_tol``.
    """
    _check_simple(sr, which, gap_tol)
    K = fb.K if K is None else K
    if method == "boundary":
        theta, g = boundary_trace(fb, m, sr, which, full=full)
        w = -(g**2) * fb.radius(theta) * (2 * np.pi / len(theta))
        return ShapeGradient.from_vector(basis_functions(K, theta) @ w)
    if method == "volume":
        u = sr.full_vector(m, which)[:, None]
        vel = _node_velocity(m, basis_functions(K, m.node_theta))
        d = _volume_bilinear(m, u, sr.eigenvalues[which], vel)
        return ShapeGradient.from_vector(d[:, 0, 0])
    raise ValueError(f"unknown method {method!r}")


def d_lambda_double_matrix(fb: FourierBoundary, m: TriangleMesh, sr, phi,
                           pair=(1, 2), method: str = "boundary", full=None) -> np.ndarray:
    """2x2 matrix whose eigenvalues are the one-sided derivatives of a double eigenvalue.

    Entries are ``-int (du_i/dn)(du_j/dn) V.n ds`` over the pair of
    M-orthonormal eigenfunctions ``pair`` (0-based), for the radial
    perturbation ``phi`` (callable of theta, or a coefficient vector).
    """
    i, j = pair
    if method == "boundary":
        theta, gi = boundary_trace(fb, m, sr, i, full=full)
        _, gj = boundary_trace(fb, m, sr, j, full=full)
        w = -_phi_values(phi, theta) * fb.radius(theta) * (2 * np.pi / len(theta))
        m11 = np.sum(gi * gi * w)
        m12 = np.sum(gi * gj * w)
        m22 = np.sum(gj * gj * w)
        return np.array([[m11, m12], [m12, m22]])
    if method == "volume":
        U = np.column_stack([sr.full_vector(m, i), sr.full_vector(m, j)])
        lam = 0.5 * (sr.eigenvalues[i] + sr.eigenvalues[j])
        vel = _node_velocity(m, _phi_values(phi, m.node_theta))[None]
        A = _volume_bilinear(m, U, lam, vel)[0]
        return 0.5 * (A + A.T)
    raise ValueError(f"unknown method {method!r}")


def double_matrices(fb, m, sr, K=None, pair=(1, 2), method="volume", full=None):
    """The 2x2 derivative matrix for every Fourier basis direction, shape (2K+1, 2, 2)."""
    K = fb.K if K is None else K
    if method == "boundary":
        i, j = pair
        theta, gi = boundary_trace(fb, m, sr, i, full=full)
        _, gj = boundary_trace(fb, m, sr, j, full=full)
        w = -basis_functions(K, theta) * fb.radius(theta) * (2 * np.pi / len(theta))
        m11, m12, m22 = w @ (gi * gi), w @ (gi * gj), w @ (gj * gj)
        return np.stack([np.stack([m11, m12], -1), np.stack([m12, m22], -1)], -2)
    U = np.column_stack([sr.full_vector(m, pair[0]), sr.full_vector(m, pair[1])])
    lam = 0.5 * (sr.eigenvalues[pair[0]] + sr.eigenvalues[pair[1]])
    A = _volume_bilinear(m, U, lam, _node_velocity(m, basis_functions(K, m.node_theta)))
    return 0.5 * (A + A.transpose(0, 2, 1))


def rellich_check(fb: FourierBoundary, m: TriangleMesh, sr, which: int = 1, full=None):
    """``(int (du/dn)^2 X.n ds, 2 lambda, relative error)`` for a unit-norm eigenfunction."""
    theta, g = boundary_trace(fb, m, sr, which, full=full)
    lhs = float(np.sum(g**2 * fb.radius(theta) ** 2) * 2 * np.pi / len(theta))
    rhs = 2 * float(sr.eigenvalues[which])
    return lhs, rhs, abs(lhs - rhs) / rhs


def gauss_check(fb: FourierBoundary, n_q: int = N_QUAD):
    """``(int C X.n ds, P, relative error)``."""
    fb.validate(n_q)
    theta = theta_grid(n_q)
    lhs = float(np.sum(curvature(fb, theta) * fb.radius(theta) ** 2) * 2 * np.pi / n_q)
    rhs = perimeter(fb, n_q)
    return lhs, rhs, abs(lhs - rhs) / rhs


def lagrange_multiplier(lambda2: float, P: float) -> float:
    """Multiplier in ``|grad u_2|^2 = mu C`` at an optimum: ``2 lambda_2 / P``."""
    if lambda2 <= 0 or P <= 0:
        raise ValueError("lambda2 and P must be positive")
    return 2.0 * lambda2 / P


def d_objective(fb: FourierBoundary, m: TriangleMesh, sr, which: int = 1,
                gap_tol: float = GAP_TOL, method: str = "volume",
                n_q: int = N_QUAD, full=None) -> ShapeGradient:
    """Gradient of ``J = P^2 lambda`` (``lambda`` is eigenvalue ``which``)."""
    P = perimeter(fb, n_q)
    lam = float(sr.eigenvalues[which])
    dP = d_perimeter(fb, n_q).to_vector()
    dl = d_lambda_simple(fb, m, sr, which, gap_tol, method=method, full=full).to_vector()
    return ShapeGradient.from_vector(2 * P * lam * dP + P * P * dl)
