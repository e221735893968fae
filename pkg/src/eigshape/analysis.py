"""Checks of the optimality condition and qualitative properties on a computed shape.

The continuum statements (exactly two curvature zeros, no segment, no arc,
two nodal boundary points, simple lambda_2) are tested through discrete
surrogates with explicit tolerances.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import jn_zeros

from . import fem
from .curve import (
    N_QUAD,
    FourierBoundary,
    PolygonRadius,
    convex_hull,
    curvature,
    perimeter,
    sample,
    theta_grid,
)
from .exceptions import DegenerateEigenvalue
from .mesh import build_polar_mesh
from .shapegrad import GAP_TOL, lagrange_multiplier

J01_SQ = float(jn_zeros(0, 1)[0] ** 2)  # lambda_1 of the unit disk
J11_SQ = float(jn_zeros(1, 1)[0] ** 2)  # lambda_2 = lambda_3 of the unit disk
DISK_J = 4 * np.pi**2 * J11_SQ
TWO_DISKS_J = 16 * np.pi**2 * J01_SQ

SEGMENT_TOL = 0.01
ARC_TOL = 1e-4
CURVATURE_ZERO_TOL = 1e-2


def optimality_residual(fb: FourierBoundary, m, sr, which: int = 1,
                        gap_tol: float = GAP_TOL, full=None) -> float:
    """Relative L2 mismatch of ``(du/dn)^2 = (2 lambda / P) C`` over the boundary nodes."""
    if sr.gap(which) < gap_tol:
        raise DegenerateEigenvalue(f"eigenvalue {which + 1} is not simple (gap {sr.gap(which):.2e})")
    g = fem.normal_derivative_trace(m, sr, which, full=full)
    mu = lagrange_multiplier(float(sr.eigenvalues[which]), perimeter(fb))
    target = mu * curvature(fb, m.boundary_theta)
    return float(np.linalg.norm(g**2 - target) / np.linalg.norm(target))


def _circular_clusters(mask: np.ndarray, join: int):
    """Runs of ``True`` on a periodic grid, merging runs separated by fewer than ``join`` points."""
    n = mask.size
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    if idx.size == n:
        return [idx]
    # start scanning just after a False entry so no run wraps
    start = int(np.flatnonzero(~mask)[0])
    rolled = np.sort((idx - start) % n)
    breaks = np.flatnonzero(np.diff(rolled) > join)
    groups = np.split(rolled, breaks + 1)
    if len(groups) > 1 and (rolled[0] + n - rolled[-1]) <= join:
        groups[0] = np.concatenate([groups[-1] - n, groups[0]])
        groups.pop()
    return [(g + start) % n for g in groups]


def curvature_zeros(fb: FourierBoundary, tol: float = CURVATURE_ZERO_TOL, n: int = N_QUAD):
    """Clusters of near-zero curvature: ``(count, theta locations)``.

    A cluster is a set of grid angles with ``|C| < tol * max|C|``; clusters
    closer than ``2 pi / 256`` are joined. Each cluster is reported at its
    minimum ``|C|``.
    """
    theta = theta_grid(n)
    C = curvature(fb, theta)
    mask = np.abs(C) < tol * np.max(np.abs(C))
    groups = _circular_clusters(mask, join=max(1, n // 256))
    locs = sorted(float(theta[g[np.argmin(np.abs(C[g]))]]) for g in groups)
    return len(groups), locs


def sign_changes(values: np.ndarray) -> int:
    """Number of sign changes around a periodic sequence (zeros skipped)."""
    s = np.sign(values[values != 0])
    if s.size < 2:
        return 0
    return int(np.sum(s != np.roll(s, -1)))


def segment_arc_detect(fb: FourierBoundary, window: float = np.pi / 16,
                       segment_tol: float = SEGMENT_TOL, arc_tol: float = ARC_TOL,
                       n: int = N_QUAD, stride: int = 8) -> dict:
    """Sliding-window search for segment-like and arc-like boundary pieces.

    A window is segment-like when ``max|C| < segment_tol * mean|C|`` (mean over
    the whole curve) and arc-like when ``std(C) / mean(C) < arc_tol`` with the
    window mean curvature above ``segment_tol * mean|C|``.
    """
    theta = theta_grid(n)
    C = curvature(fb, theta)
    mean_abs = float(np.mean(np.abs(C)))
    w = max(2, int(round(window / (2 * np.pi) * n)))
    starts = np.arange(0, n, stride)
    idx = (starts[:, None] + np.arange(w)[None]) % n
    Cw = C[idx]
    seg_score = np.max(np.abs(Cw), axis=1) / mean_abs
    wmean = Cw.mean(axis=1)
    arc_score = np.where(wmean > segment_tol * mean_abs, Cw.std(axis=1) / np.abs(wmean), np.inf)
    seg = seg_score < segment_tol
    arc = arc_score < arc_tol
    centre = theta[(starts + w // 2) % n]
    return {
        "segment_like": bool(seg.any()),
        "arc_like": bool(arc.any()),
        "segment_windows": centre[seg].tolist(),
        "arc_windows": centre[arc].tolist(),
        "worst_segment_score": float(seg_score.min()),
        "worst_segment_theta": float(centre[np.argmin(seg_score)]),
        "worst_arc_score": float(arc_score.min()),
        "worst_arc_theta": float(centre[np.argmin(arc_score)]),
        "window": float(window),
    }


def nodal_boundary_points(m, sr, which: int = 1, rel_zero: float = 1e-3, full=None) -> int:
    """Sign changes of the normal-derivative trace around the boundary cycle."""
    g = fem.normal_derivative_trace(m, sr, which, full=full)
    g = np.where(np.abs(g) < rel_zero * np.max(np.abs(g)), 0.0, g)
    return sign_changes(g)


def simplicity_gap(sr, which: int = 1) -> float:
    """``(lambda_{k+1} - lambda_k) / lambda_k`` for 0-based ``which``."""
    lam = sr.eigenvalues
    return float((lam[which + 1] - lam[which]) / lam[which])


def symmetry_axes(fb: FourierBoundary, tol: float = 1e-3, n_alpha: int = 360, n: int = 1024) -> dict:
    """Reflection-axis candidates ``alpha`` in ``[0, pi)`` with their mismatch.

    ``mismatch(alpha) = ||r(alpha + t) - r(alpha - t)|| / ||r||``. Reported
    ``axes`` are grid angles under ``tol`` that are local minima of the mismatch.
    """
    alpha = np.pi * np.arange(n_alpha) / n_alpha
    t = theta_grid(n)
    r = fb.radius(t)
    rp = fb.radius(alpha[:, None] + t[None])
    rm = fb.radius(alpha[:, None] - t[None])
    mis = np.linalg.norm(rp - rm, axis=1) / np.linalg.norm(r)
    local = (mis <= np.roll(mis, 1)) & (mis <= np.roll(mis, -1))
    ok = (mis < tol) & local
    order = np.argsort(mis[ok], kind="stable")
    return {
        "axes": alpha[ok][order].tolist(),
        "mismatch": mis[ok][order].tolist(),
        "best_two": [[float(alpha[i]), float(mis[i])] for i in np.argsort(mis, kind="stable")[:2]],
        "tol": tol,
    }


def convexity_defect(fb: FourierBoundary, n: int = N_QUAD) -> float:
    """``(P(polygon) - P(hull)) / P(polygon)`` for the ``n``-point sample."""
    pc = sample(fb, n)
    return float((pc.perimeter() - convex_hull(pc).perimeter()) / pc.perimeter())


def convexification_check(fb: FourierBoundary, n_r: int = 32, n_theta: int = 128,
                          n_sample: int = 2048, which: int = 1) -> dict:
    """Compare ``lambda`` and ``P`` of a shape with those of its convex hull.

    Both domains are meshed with the same polar mesher; the hull through its
    exact polygonal radius.
    """
    pc = sample(fb, n_sample)
    hull = convex_hull(pc)
    hr = PolygonRadius(hull)
    lam = fem.eigensolve(build_polar_mesh(fb, n_r, n_theta), 4).eigenvalues[which]
    lam_h = fem.eigensolve(build_polar_mesh(hr, n_r, n_theta), 4).eigenvalues[which]
    return {
        "lambda_shape": float(lam),
        "lambda_hull": float(lam_h),
        "P_shape": perimeter(fb),
        "P_polygon": pc.perimeter(),
        "P_hull": hull.perimeter(),
    }


def stadium_radius(theta, half_length: float = 1.0, R: float = 1.0):
    """Radius of the stadium ``{dist(x, [-l, l] x {0}) <= R}`` seen from its centre."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.abs(np.cos(theta)), np.abs(np.sin(theta))
    with np.errstate(divide="ignore"):
        flat = np.where(s > 0, R / s, np.inf)
    cap = half_length * c + np.sqrt(R * R - (half_length * s) ** 2 + 0j).real
    return np.where(flat * c <= half_length, flat, cap)


def stadium_fit(K: int = 256, half_length: float = 1.0, R: float = 1.0, n: int = 8192,
                sigma: bool = True) -> FourierBoundary:
    """Fourier fit of the stadium radius.

    The plain fit is the truncated FFT (least squares on the grid). With
    ``sigma`` the coefficients are damped by Lanczos factors
    ``sinc(k / (K + 1))``, which suppresses the Gibbs ringing that the
    curvature jumps of the stadium otherwise leave on the flat sides and caps.
    """
    r = stadium_radius(theta_grid(n), half_length, R)
    F = np.fft.rfft(r) / n
    k = np.arange(1, K + 1)
    damp = np.sinc(k / (K + 1)) if sigma else np.ones(K)
    return FourierBoundary(F[0].real, 2 * F[1 : K + 1].real * damp, -2 * F[1 : K + 1].imag * damp)


def reference_values(kind: str, c: float = 2 * np.pi, n_r: int = 64, n_theta: int = 256) -> dict:
    """``lambda_2``, ``P`` and ``J`` of a comparison shape with perimeter ``c``."""
    if c <= 0:
        raise ValueError("perimeter must be positive")
    if kind == "disk":
        lam = J11_SQ / (c / (2 * np.pi)) ** 2
        return {"kind": kind, "lambda2": lam, "P": c, "J": c * c * lam, "numerical": False}
    if kind == "two-disks":
        # two disks of perimeter c/2 each; lambda_2 of the union is lambda_1 of one
        lam = J01_SQ / (c / (4 * np.pi)) ** 2
        return {"kind": kind, "lambda2": lam, "P": c, "J": c * c * lam, "numerical": False}
    if kind == "stadium-fit":
        fb = stadium_fit()
        fb = fb.scaled(c / perimeter(fb))
        sr = fem.eigensolve(build_polar_mesh(fb, n_r, n_theta), 4)
        lam = float(sr.eigenvalues[1])
        P = perimeter(fb)
        return {"kind": kind, "lambda2": lam, "P": P, "J": P * P * lam, "numerical": True}
    raise ValueError(f"unknown reference kind {kind!r}; expected disk, two-disks or stadium-fit")


def _axes_text(axes, limit: int = 6) -> str:
    axes = np.round(np.asarray(axes), 4).tolist()
    if len(axes) > limit:
        return f"{len(axes)} axes (continuous symmetry)"
    return str(axes)


@dataclass
class QualitativeReport:
    lambdas: list
    perimeter: float
    area: float
    J: float
    lagrange_multiplier: float
    simplicity_gap: float
    optimality_residual: float | None
    curvature_zero_count: int
    curvature_zeros: list
    nodal_boundary_points: int
    segment_arc: dict
    convexity_defect: float
    symmetry: dict
    checks: dict = field(default_factory=dict)
    mesh: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary(self) -> str:
        lines = [
            f"J = P^2 lambda_2      {self.J:.6f}",
            f"lambda_1..4           {', '.join(f'{v:.6f}' for v in self.lambdas)}",
            f"gap (l3-l2)/l2        {self.simplicity_gap:.4%}",
            f"optimality residual   "
            + ("n/a (double eigenvalue)" if self.optimality_residual is None else f"{self.optimality_residual:.4%}"),
            f"curvature zeros       {self.curvature_zero_count} at {np.round(self.curvature_zeros, 4).tolist()}",
            f"nodal boundary pts    {self.nodal_boundary_points}",
            f"segment/arc flags     {self.segment_arc['segment_like']}/{self.segment_arc['arc_like']}",
            f"convexity defect      {self.convexity_defect:.3e}",
            f"symmetry axes         {_axes_text(self.symmetry['axes'])} (diagnostic)",
        ]
        lines += [f"[{'PASS' if ok else 'FAIL'}] {name}" for name, ok in self.checks.items()]
        return "\n".join(lines)


def verify(fb: FourierBoundary, n_r: int = 64, n_theta: int = 256,
           residual_tol: float = 0.05, gap_min: float = 0.01, convexity_tol: float = 1e-6,
           symmetry_tol: float = 1e-3) -> QualitativeReport:
    """Build the full report for ``fb``; ``checks`` holds the pass/fail verdicts."""
    from .curve import area as _area

    fb.validate()
    m = build_polar_mesh(fb, n_r, n_theta)
    full = fem.assemble_full(m)
    sr = fem.eigensolve(m, 4)
    P = perimeter(fb)
    lam2 = float(sr.eigenvalues[1])
    gap = simplicity_gap(sr, 1)
    try:
        res = optimality_residual(fb, m, sr, 1, full=full)
    except DegenerateEigenvalue:
        res = None
    count, locs = curvature_zeros(fb)
    nodal = nodal_boundary_points(m, sr, 1, full=full)
    sa = segment_arc_detect(fb)
    cdef = convexity_defect(fb)
    checks = {
        "curvature_zero_count == 2": count == 2,
        "nodal_boundary_points == 2": nodal == 2,
        f"simplicity_gap > {gap_min:g}": gap > gap_min,
        f"optimality_residual < {residual_tol:g}": res is not None and res < residual_tol,
        "no segment-like window": not sa["segment_like"],
        "no arc-like window": not sa["arc_like"],
        f"convexity defect < {convexity_tol:g}": cdef < convexity_tol,
    }
    return QualitativeReport(
        lambdas=[float(v) for v in sr.eigenvalues],
        perimeter=P,
        area=_area(fb),
        J=P * P * lam2,
        lagrange_multiplier=lagrange_multiplier(lam2, P),
        simplicity_gap=gap,
        optimality_residual=res,
        curvature_zero_count=count,
        curvature_zeros=locs,
        nodal_boundary_points=nodal,
        segment_arc=sa,
        convexity_defect=cdef,
        symmetry=symmetry_axes(fb, symmetry_tol),
        checks=checks,
        mesh={"n_r": n_r, "n_theta": n_theta},
    )
