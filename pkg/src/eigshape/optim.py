"""Minimization of the scale-free objective ``J = P^2 lambda_k`` over Fourier shapes.

``J`` is invariant under dilation, so the perimeter constraint is imposed by
rescaling the final shape. Iterates are kept at ``a0 = 1`` and the ``k = 1``
modes (first-order translations) are frozen.

Steps are steepest descent in a Sobolev-weighted coefficient metric
(weight ``1 + k^2`` on mode ``k``), with Barzilai-Borwein trial steps and
Armijo backtracking. Where the target eigenvalue is numerically double the
objective is only directionally differentiable; the direction is then chosen
to make the smallest eigenvalue of the 2x2 derivative matrix as negative as
possible.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import fem
from .curve import FourierBoundary, perimeter, theta_grid
from .exceptions import (
    ConfigError,
    DegenerateEigenvalue,
    DegenerateTriangle,
    EigshapeError,
    InvalidBoundary,
    NoConvergence,
)
from .mesh import TriangleMesh, build_polar_mesh
from .shapegrad import GAP_TOL, d_lambda_simple, d_perimeter, double_matrices

logger = logging.getLogger(__name__)


@dataclass
class OptimConfig:
    """Optimizer settings; ``eigen_index`` is 0-based (1 targets lambda_2)."""

    K: int = 16
    n_r: int = 32
    n_theta: int = 128
    polish_n_r: int = 64
    polish_n_theta: int = 256
    max_iters: int = 400
    polish_max_iters: int = 60
    c1: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    grad_tol: float = 1e-5
    gap_tol: float = GAP_TOL
    seed: int = 0
    jitter: float = 0.04
    perimeter: float = 2 * np.pi
    eigen_index: int = 1
    gradient_method: str = "volume"
    sobolev_order: float = 1.0
    eig_tol: float = 1e-10

    def validate(self) -> "OptimConfig":
        ints = {"K": 4, "n_r": 4, "n_theta": 16, "polish_n_r": 4, "polish_n_theta": 16,
                "max_iters": 0, "polish_max_iters": 0, "max_backtracks": 1}
        for name, low in ints.items():
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < low:
                raise ConfigError(name, f"must be an integer >= {low}, got {v!r}")
        for name in ("c1", "backtrack", "grad_tol", "gap_tol", "perimeter", "eig_tol"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not np.isfinite(v) or v <= 0:
                raise ConfigError(name, f"must be a positive number, got {v!r}")
        if not self.c1 < 1:
            raise ConfigError("c1", "must be < 1")
        if not self.backtrack < 1:
            raise ConfigError("backtrack", "must be < 1")
        if self.jitter < 0:
            raise ConfigError("jitter", "must be >= 0")
        if self.sobolev_order < 0:
            raise ConfigError("sobolev_order", "must be >= 0")
        if self.eigen_index not in range(0, 3):
            raise ConfigError("eigen_index", "must be 0 (lambda_1), 1 (lambda_2) or 2")
        if self.gradient_method not in ("volume", "boundary"):
            raise ConfigError("gradient_method", "must be 'volume' or 'boundary'")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "OptimConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")
        return cls(**d).validate()

    @classmethod
    def load(cls, path) -> "OptimConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass
class Evaluation:
    """Everything computed for one shape at one mesh resolution."""

    fb: FourierBoundary
    mesh: TriangleMesh
    spectrum: fem.SpectralResult
    P: float
    lam: float
    J: float
    gap: float
    which: int

    @property
    def lambdas(self):
        return self.spectrum.eigenvalues


def evaluate(fb: FourierBoundary, n_r: int = 32, n_theta: int = 128, which: int = 1,
             m_eigs: int = 4, tol: float = 1e-10) -> Evaluation:
    """Mesh ``fb``, solve for the lowest eigenpairs and form ``J = P^2 lambda``."""
    fb.validate()
    m = build_polar_mesh(fb, n_r, n_theta)
    sr = fem.eigensolve(m, m_eigs=m_eigs, tol=tol)
    P = perimeter(fb)
    lam = float(sr.eigenvalues[which])
    gap = float((sr.eigenvalues[which + 1] - lam) / lam)
    return Evaluation(fb, m, sr, P, lam, P * P * lam, gap, which)


@dataclass
class IterRecord:
    iter: int
    J: float
    P: float
    lambda2: float
    gap: float
    step: float
    gradnorm: float
    branch: str
    phase: str


@dataclass
class OptimTrace:
    records: list = field(default_factory=list)
    termination: str = ""
    wall_time: float = 0.0
    n_evaluations: int = 0

    CSV_FIELDS = ("iter", "J", "P", "lambda2", "gap", "step", "gradnorm")

    def to_csv(self) -> str:
        lines = [",".join(self.CSV_FIELDS)]
        for r in self.records:
            lines.append(",".join(
                str(r.iter) if k == "iter" else repr(float(getattr(r, k))) for k in self.CSV_FIELDS
            ))
        return "\n".join(lines) + "\n"

    @property
    def J(self) -> np.ndarray:
        return np.array([r.J for r in self.records])


def _mode_numbers(K):
    k = np.arange(1, K + 1)
    return np.concatenate([[0], k, k])


def _free_mask(K):
    mask = np.ones(2 * K + 1, dtype=bool)
    mask[[1, K + 1]] = False
    return mask


class _Problem:
    """Objective, gradient and descent direction on normalized coefficient vectors."""

    def __init__(self, cfg: OptimConfig, n_r: int, n_theta: int):
        self.cfg = cfg
        self.n_r, self.n_theta = n_r, n_theta
        self.K = cfg.K
        self.weights = (1.0 + _mode_numbers(cfg.K) ** 2) ** cfg.sobolev_order
        self.free = _free_mask(cfg.K)
        self.n_eval = 0

    def evaluate(self, x) -> Evaluation:
        self.n_eval += 1
        return evaluate(FourierBoundary.from_vector(x), self.n_r, self.n_theta,
                        which=self.cfg.eigen_index, tol=self.cfg.eig_tol)

    def _project(self, d, x):
        """Zero frozen modes and remove the dilation component in the metric."""
        d = np.where(self.free, d, 0.0)
        xf = np.where(self.free, x, 0.0)
        G = self.weights
        d = d - (d @ (G * xf)) / (xf @ (G * xf)) * xf
        return d

    def gradient(self, ev: Evaluation) -> np.ndarray:
        fb = ev.fb
        dP = d_perimeter(fb).to_vector()
        dl = d_lambda_simple(fb, ev.mesh, ev.spectrum, ev.which, self.cfg.gap_tol,
                             method=self.cfg.gradient_method).to_vector()
        return 2 * ev.P * ev.lam * dP + ev.P**2 * dl

    def direction(self, ev: Evaluation, x):
        """Return ``(direction, directional derivative, gradient norm, branch)``."""
        if ev.gap >= self.cfg.gap_tol:
            g = self.gradient(ev)
            d = self._project(-g / self.weights, x)
            gp = self._project(g, x)
            return d, float(g @ d), float(np.linalg.norm(gp)), "simple", g
        return self._degenerate_direction(ev, x) + (None,)

    def _degenerate_direction(self, ev: Evaluation, x):
        A = self.matrices(ev)  # (n, 2, 2) derivative of J per basis direction
        psi = np.linspace(0.0, np.pi, 181)[:-1]
        w = np.stack([np.cos(psi), np.sin(psi)])
        # g[i, s] = w_s^T A_i w_s: a generalized gradient of the smaller branch
        g = np.einsum("as,iab,bs->is", w, A, w)
        D = np.stack([self._project(-g[:, s] / self.weights, x) for s in range(len(psi))], 1)
        score = np.einsum("is,is->s", g, D)  # w^T A(d) w along each candidate
        s = int(np.argmin(score))
        d = D[:, s]
        slope = float(np.linalg.eigvalsh(np.einsum("i,iab->ab", d, A))[0])
        gp = self._project(g[:, s], x)
        return d, slope, float(np.linalg.norm(gp)), "double"

    def matrices(self, ev: Evaluation) -> np.ndarray:
        """``P^2 M_i + 2 P lambda dP_i I`` for every basis direction ``i``."""
        fb = ev.fb
        pair = (ev.which, ev.which + 1)
        Mi = double_matrices(fb, ev.mesh, ev.spectrum, pair=pair, method=self.cfg.gradient_method)
        dP = d_perimeter(fb).to_vector()
        return ev.P**2 * Mi + (2 * ev.P * ev.lam * dP)[:, None, None] * np.eye(2)


def _normalize(x):
    return x / x[0]


def _run_phase(prob: _Problem, x, trace: OptimTrace, max_iters: int, phase: str):
    cfg = prob.cfg
    ev = prob.evaluate(x)
    alpha = None
    prev = None  # (x, g) for Barzilai-Borwein
    reason = "max_iters"
    for it in range(max_iters + 1):
        d, slope, gnorm, branch, g = prob.direction(ev, x)
        trace.records.append(IterRecord(len(trace.records), ev.J, ev.P, ev.lam, ev.gap,
                                        0.0 if alpha is None else alpha, gnorm, branch, phase))
        logger.debug("%s it=%d J=%.10g gap=%.3e |g|=%.3e", phase, it, ev.J, ev.gap, gnorm)
        if gnorm < cfg.grad_tol * ev.J:
            reason = "converged"
            break
        if it == max_iters:
            break
        if slope >= 0:
            reason = "line_search_stalled"
            break
        # trial step: BB1 in the metric, else a capped move of the coefficients
        trial = 0.02 / max(np.max(np.abs(d)), 1e-300)
        if prev is not None and g is not None:
            s, y = x - prev[0], g - prev[1]
            sy = s @ y
            if sy > 0:
                trial = min(float(s @ (prob.weights * s)) / sy, 10 * trial)
        elif alpha is not None:
            trial = 2 * alpha
        step = trial
        accepted = None
        for _ in range(cfg.max_backtracks):
            xt = _normalize(x + step * d)  # J is dilation invariant
            try:
                evt = prob.evaluate(xt)
            except (InvalidBoundary, DegenerateTriangle, NoConvergence):
                step *= cfg.backtrack
                continue
            if evt.J <= ev.J + cfg.c1 * step * slope:
                accepted = (xt, evt)
                break
            step *= cfg.backtrack
        if accepted is None:
            reason = "line_search_stalled"
            break
        prev = (x, g) if g is not None else None
        x, ev = accepted
        alpha = step
    return x, ev, reason


def minimize(cfg: OptimConfig, init: FourierBoundary):
    """Minimize ``P^2 lambda`` from ``init``; returns ``(shape, trace)``.

    The returned shape is rescaled to perimeter ``cfg.perimeter``. The
    trace's ``termination`` is ``"converged"``, ``"max_iters"`` or
    ``"line_search_stalled"`` (the best iterate is still returned).
    """
    cfg.validate()
    t0 = time.perf_counter()
    init = init.with_modes(cfg.K).validate()
    x = _normalize(init.to_vector())
    trace = OptimTrace()
    coarse = _Problem(cfg, cfg.n_r, cfg.n_theta)
    x, ev, reason = _run_phase(coarse, x, trace, cfg.max_iters, "coarse")
    n_eval = coarse.n_eval
    if cfg.polish_max_iters > 0:
        fine = _Problem(cfg, cfg.polish_n_r, cfg.polish_n_theta)
        x, ev, reason = _run_phase(fine, x, trace, cfg.polish_max_iters, "polish")
        n_eval += fine.n_eval
    fb = FourierBoundary.from_vector(x)
    fb = fb.scaled(cfg.perimeter / perimeter(fb))
    trace.termination = reason
    trace.n_evaluations = n_eval
    trace.wall_time = time.perf_counter() - t0
    return fb, trace


def jittered_start(cfg: OptimConfig, init: FourierBoundary, rng) -> FourierBoundary:
    """``init`` plus seeded noise of size ``jitter / k`` on modes ``k >= 2``."""
    x = init.with_modes(cfg.K).to_vector()
    k = _mode_numbers(cfg.K).astype(float)
    noise = rng.standard_normal(x.size) * cfg.jitter / np.maximum(k, 1) * x[0]
    noise[~_free_mask(cfg.K)] = 0.0
    noise[0] = 0.0
    return FourierBoundary.from_vector(x + noise)


@dataclass
class MultistartResult:
    shape: FourierBoundary
    trace: OptimTrace
    J: float
    best_index: int
    shapes: list
    traces: list
    J_values: list


def multistart(cfg: OptimConfig, n_starts: int, init: FourierBoundary | None = None) -> MultistartResult:
    """Run :func:`minimize` from seeded jittered starts; keep the lowest final ``J``.

    The first start is ``init`` itself; the others add jitter drawn from
    ``numpy.random.default_rng(cfg.seed)``. Runs are serial, so results are
    reproducible bit for bit.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    init = init if init is not None else default_init(cfg)
    rng = np.random.default_rng(cfg.seed)
    shapes, traces, Js = [], [], []
    for i in range(n_starts):
        start = init if i == 0 else jittered_start(cfg, init, rng)
        fb, tr = minimize(cfg, start)
        shapes.append(fb)
        traces.append(tr)
        Js.append(float(tr.records[-1].J))
    best = int(np.argmin(Js))
    return MultistartResult(shapes[best], traces[best], Js[best], best, shapes, traces, Js)


def default_init(cfg: OptimConfig) -> FourierBoundary:
    """Ellipse-like start ``r = 1 + 0.2 cos 2 theta``."""
    a = np.zeros(cfg.K)
    a[1] = 0.2
    return FourierBoundary(1.0, a, np.zeros(cfg.K))


def objective_value(fb: FourierBoundary, n_r=32, n_theta=128, which=1) -> float:
    return evaluate(fb, n_r, n_theta, which).J


__all__ = [
    "OptimConfig", "OptimTrace", "IterRecord", "Evaluation", "evaluate", "minimize",
    "multistart", "MultistartResult", "jittered_start", "default_init", "objective_value",
    "EigshapeError", "DegenerateEigenvalue", "theta_grid",
]
