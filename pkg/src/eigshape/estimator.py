"""scikit-learn style front ends.

``ShapeOptimizer`` fits a shape (it *is* the optimization run);
``DirichletSpectrum`` is a stateless transformer from coefficient rows to
eigenvalues, so it can sit in a ``Pipeline``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import fem
from .curve import FourierBoundary, perimeter
from .mesh import build_polar_mesh
from .optim import OptimConfig, default_init, multistart
from .validation import check_coefficients, check_shape


class ShapeOptimizer(BaseEstimator):
    """Minimize ``P(Omega)^2 lambda_k(Omega)`` over star-shaped domains.

    Parameters mirror :class:`~eigshape.optim.OptimConfig`; ``tol`` is the
    gradient-norm threshold relative to ``J`` and ``eigen_index`` is 0-based
    (the default 1 targets lambda_2).

    Attributes
    ----------
    shape_ : FourierBoundary
        Best shape, rescaled to ``perimeter``.
    trace_ : OptimTrace
        Iteration history of the best start.
    J_ : float
        Final objective at polish resolution.
    termination_ : str
    J_starts_ : list of float
        Final objective of every start.
    """

    def __init__(self, n_modes=16, n_r=32, n_theta=128, polish_n_r=64, polish_n_theta=256,
                 max_iter=400, polish_max_iter=60, tol=1e-5, c1=1e-4, backtrack=0.5,
                 gap_tol=1e-4, eigen_index=1, perimeter=2 * np.pi, n_starts=1, jitter=0.04,
                 gradient_method="volume", random_state=0):
        self.n_modes = n_modes
        self.n_r = n_r
        self.n_theta = n_theta
        self.polish_n_r = polish_n_r
        self.polish_n_theta = polish_n_theta
        self.max_iter = max_iter
        self.polish_max_iter = polish_max_iter
        self.tol = tol
        self.c1 = c1
        self.backtrack = backtrack
        self.gap_tol = gap_tol
        self.eigen_index = eigen_index
        self.perimeter = perimeter
        self.n_starts = n_starts
        self.jitter = jitter
        self.gradient_method = gradient_method
        self.random_state = random_state

    def _config(self) -> OptimConfig:
        return OptimConfig(
            K=self.n_modes, n_r=self.n_r, n_theta=self.n_theta,
            polish_n_r=self.polish_n_r, polish_n_theta=self.polish_n_theta,
            max_iters=self.max_iter, polish_max_iters=self.polish_max_iter,
            c1=self.c1, backtrack=self.backtrack, grad_tol=self.tol, gap_tol=self.gap_tol,
            seed=self.random_state, jitter=self.jitter, perimeter=float(self.perimeter),
            eigen_index=self.eigen_index, gradient_method=self.gradient_method,
        ).validate()

    def fit(self, X=None, y=None):
        """Optimize from initial shape ``X`` (default ``r = 1 + 0.2 cos 2 theta``)."""
        cfg = self._config()
        init = default_init(cfg) if X is None else check_shape(X, K=cfg.K)
        res = multistart(cfg, self.n_starts, init)
        self.config_ = cfg
        self.shape_ = res.shape
        self.trace_ = res.trace
        self.J_ = res.J
        self.termination_ = res.trace.termination
        self.converged_ = res.trace.termination == "converged"
        self.n_iter_ = len(res.trace.records) - 1
        self.J_starts_ = res.J_values
        self.traces_ = res.traces
        self.best_start_ = res.best_index
        return self

    @property
    def coef_(self) -> np.ndarray:
        check_is_fitted(self, "shape_")
        return self.shape_.to_vector()

    def objective(self, X) -> np.ndarray:
        """``P^2 lambda`` of each coefficient row of ``X`` at polish resolution."""
        check_is_fitted(self, "shape_")
        spec = DirichletSpectrum(self.polish_n_r, self.polish_n_theta, n_eigs=4)
        lam = spec.transform(X)[:, self.eigen_index]
        P = np.array([perimeter(FourierBoundary.from_vector(x)) for x in check_coefficients(X)])
        return P**2 * lam


class DirichletSpectrum(TransformerMixin, BaseEstimator):
    """Map coefficient rows to the lowest Dirichlet eigenvalues of their domains."""

    def __init__(self, n_r=48, n_theta=192, n_eigs=4, tol=1e-10):
        self.n_r = n_r
        self.n_theta = n_theta
        self.n_eigs = n_eigs
        self.tol = tol

    def fit(self, X=None, y=None):
        if X is not None:
            X = check_coefficients(X)
            self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        X = check_coefficients(X)
        out = np.empty((X.shape[0], self.n_eigs))
        for i, x in enumerate(X):
            fb = FourierBoundary.from_vector(x).validate()
            m = build_polar_mesh(fb, self.n_r, self.n_theta)
            out[i] = fem.eigensolve(m, self.n_eigs, self.tol).eigenvalues
        return out
