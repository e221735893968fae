"""Star-shaped boundaries described by a truncated Fourier radius.

The boundary is the curve ``theta -> r(theta) * (cos theta, sin theta)`` with

    r(theta) = a0 + sum_k a_k cos(k theta) + b_k sin(k theta).

All boundary integrals are done with the uniform trapezoid rule in ``theta``,
which is spectrally accurate for these periodic integrands.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import DegenerateInput, InvalidBoundary

N_QUAD = 4096
R_MIN_FACTOR = 1e-6


@dataclass(frozen=True, eq=False)
class FourierBoundary:
    """Truncated Fourier description of a star-shaped boundary.

    Parameters
    ----------
    a0 : float
        Mean radius.
    a, b : array_like
        Cosine and sine coefficients for modes ``1..K``. Shorter of the two is
        zero-padded.
    """

    a0: float
    a: np.ndarray = field(default_factory=lambda: np.zeros(0))
    b: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float)).ravel()
        b = np.atleast_1d(np.asarray(self.b, dtype=float)).ravel()
        K = max(a.size, b.size)
        a = np.concatenate([a, np.zeros(K - a.size)])
        b = np.concatenate([b, np.zeros(K - b.size)])
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def K(self) -> int:
        return self.a.size

    @property
    def r_min(self) -> float:
        return R_MIN_FACTOR * abs(self.a0)

    # -- coefficient vector --------------------------------------------------
    def to_vector(self) -> np.ndarray:
        """Coefficients packed as ``[a0, a_1..a_K, b_1..b_K]``."""
        return np.concatenate([[self.a0], self.a, self.b])

    @classmethod
    def from_vector(cls, x) -> "FourierBoundary":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size % 2 != 1:
            raise ValueError("coefficient vector must have odd length 1 + 2K")
        K = (x.size - 1) // 2
        return cls(x[0], x[1 : K + 1], x[K + 1 :])

    @classmethod
    def circle(cls, radius=1.0, K=0) -> "FourierBoundary":
        return cls(radius, np.zeros(K), np.zeros(K))

    def with_modes(self, K: int) -> "FourierBoundary":
        """Truncate or zero-pad to ``K`` modes."""
        a = np.zeros(K)
        b = np.zeros(K)
        m = min(K, self.K)
        a[:m] = self.a[:m]
        b[:m] = self.b[:m]
        return FourierBoundary(self.a0, a, b)

    def scaled(self, t: float) -> "FourierBoundary":
        """Dilation by ``t`` about the origin."""
        return FourierBoundary(t * self.a0, t * self.a, t * self.b)

    def rotated(self, alpha: float) -> "FourierBoundary":
        """Boundary with radius ``r(theta + alpha)``."""
        k = np.arange(1, self.K + 1)
        c, s = np.cos(k * alpha), np.sin(k * alpha)
        return FourierBoundary(self.a0, self.a * c + self.b * s, self.b * c - self.a * s)

    # -- evaluation ------------------------------------------------------------
    def radius(self, theta, derivative: int = 0):
        """``r`` or its ``derivative``-th theta derivative (0, 1 or 2)."""
        theta = np.asarray(theta, dtype=float)
        out = np.full(theta.shape, self.a0 if derivative == 0 else 0.0)
        if self.K == 0:
            return out
        k = np.arange(1, self.K + 1)
        kt = np.multiply.outer(theta, k)
        c, s = np.cos(kt), np.sin(kt)
        if derivative == 0:
            out = out + c @ self.a + s @ self.b
        elif derivative == 1:
            out = out + s @ (-k * self.a) + c @ (k * self.b)
        elif derivative == 2:
            out = out - c @ (k**2 * self.a) - s @ (k**2 * self.b)
        else:
            raise ValueError("derivative must be 0, 1 or 2")
        return out

    def __call__(self, theta):
        return self.radius(theta)

    def validate(self, n: int = N_QUAD) -> "FourierBoundary":
        """Raise :class:`InvalidBoundary` unless ``r > r_min`` on an ``n``-point grid."""
        if not np.all(np.isfinite(self.to_vector())):
            raise InvalidBoundary("non-finite Fourier coefficient")
        if self.a0 <= 0:
            raise InvalidBoundary(f"mean radius a0={self.a0} must be positive")
        r = self.radius(theta_grid(n))
        i = int(np.argmin(r))
        if r[i] <= self.r_min:
            raise InvalidBoundary(
                f"radius {r[i]:.3e} <= r_min {self.r_min:.3e} at theta={theta_grid(n)[i]:.4f}"
            )
        return self

    # -- JSON ----------------------------------------------------------------
    def to_dict(self) -> dict:
        return {"a0": self.a0, "a": self.a.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "FourierBoundary":
        if not isinstance(d, dict) or "a0" not in d:
            raise ValueError("shape JSON must be an object with key 'a0'")
        for key in ("a", "b"):
            if key in d and not isinstance(d[key], list):
                raise ValueError(f"shape JSON field '{key}' must be a list of numbers")
        return cls(d["a0"], d.get("a", []), d.get("b", []))

    def __repr__(self):
        return f"FourierBoundary(a0={self.a0!r}, K={self.K})"


def theta_grid(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def load_shape(path) -> FourierBoundary:
    with open(path) as f:
        return FourierBoundary.from_dict(json.load(f))


def save_shape(fb: FourierBoundary, path) -> None:
    Path(path).write_text(json.dumps(fb.to_dict(), indent=2) + "\n")


def radius(fb: FourierBoundary, theta, derivative: int = 0):
    return fb.radius(theta, derivative)


def _rrp(fb, n_q):
    theta = theta_grid(n_q)
    return theta, fb.radius(theta), fb.radius(theta, 1)


def perimeter(fb: FourierBoundary, n_q: int = N_QUAD) -> float:
    """Arc length ``int sqrt(r^2 + r'^2) dtheta``."""
    fb.validate(n_q)
    _, r, rp = _rrp(fb, n_q)
    return float(np.sum(np.hypot(r, rp)) * (2 * np.pi / n_q))


def area(fb: FourierBoundary, n_q: int = N_QUAD) -> float:
    fb.validate(n_q)
    _, r, _ = _rrp(fb, n_q)
    return float(0.5 * np.sum(r * r) * (2 * np.pi / n_q))


def curvature(fb: FourierBoundary, theta):
    """Signed curvature, positive where the boundary is locally convex."""
    r = fb.radius(theta)
    rp = fb.radius(theta, 1)
    rpp = fb.radius(theta, 2)
    return (r * r + 2 * rp * rp - r * rpp) / (r * r + rp * rp) ** 1.5


def normal_displacement_factor(fb: FourierBoundary, theta):
    """``V.n`` for the unit radial velocity: ``r / sqrt(r^2 + r'^2)``."""
    r = fb.radius(theta)
    rp = fb.radius(theta, 1)
    return r / np.hypot(r, rp)


@dataclass(frozen=True, eq=False)
class PolygonalCurve:
    """Closed polygon; ``vertices`` is ``(n, 2)`` without repeating the first point."""

    vertices: np.ndarray
    closed: bool = True

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must have shape (n, 2)")
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    def perimeter(self) -> float:
        d = np.diff(self.vertices, axis=0, append=self.vertices[:1])
        return float(np.sum(np.hypot(d[:, 0], d[:, 1])))

    def signed_area(self) -> float:
        x, y = self.vertices.T
        return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def area(self) -> float:
        return abs(self.signed_area())


def sample(fb: FourierBoundary, n: int) -> PolygonalCurve:
    """Polygon through ``n`` boundary points at uniform theta (counter-clockwise)."""
    if n < 4:
        raise ValueError("need at least 4 sample points")
    fb.validate(max(n, N_QUAD))
    theta = theta_grid(n)
    r = fb.radius(theta)
    return PolygonalCurve(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))


def convex_hull(pc: PolygonalCurve, tol: float = 0.0) -> PolygonalCurve:
    """Convex hull by Andrew's monotone chain; collinear vertices are dropped.

    Returned counter-clockwise, starting at the lexicographically smallest point.
    """
    pts = np.unique(pc.vertices, axis=0)  # sorted by x, then y
    if len(pts) < 3:
        raise DegenerateInput("fewer than three distinct points")

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def chain(points):
        out = []
        for p in points:
            while len(out) >= 2 and cross(out[-2], out[-1], p) <= tol:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateInput("all points are collinear")
    return PolygonalCurve(np.array(hull))


class PolygonRadius:
    """Radial function of a polygon that is star-shaped about the origin.

    Duck-types the parts of :class:`FourierBoundary` the mesher needs
    (``radius`` and ``validate``), so polygons such as convex hulls can be
    meshed and solved on.
    """

    def __init__(self, pc: PolygonalCurve):
        v = pc.vertices
        if pc.signed_area() < 0:
            v = v[::-1]
        self.vertices = v
        ang = np.mod(np.arctan2(v[:, 1], v[:, 0]), 2 * np.pi)
        order = np.argsort(ang, kind="stable")
        self._ang = ang[order]
        self._v = v[order]
        r = np.hypot(v[:, 0], v[:, 1])
        self.a0 = float(np.mean(r))

    @property
    def r_min(self) -> float:
        return R_MIN_FACTOR * self.a0

    def radius(self, theta, derivative: int = 0):
        if derivative:
            raise NotImplementedError("polygon radius is only piecewise smooth")
        theta = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
        j = np.searchsorted(self._ang, theta, side="right") - 1  # edge j -> j+1
        p = self._v[j % len(self._v)]
        q = self._v[(j + 1) % len(self._v)]
        d = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        e = q - p
        # ray t*d meets p + s*e: t = cross(p, e) / cross(d, e)
        num = p[..., 0] * e[..., 1] - p[..., 1] * e[..., 0]
        den = d[..., 0] * e[..., 1] - d[..., 1] * e[..., 0]
        return num / den

    def validate(self, n: int = N_QUAD) -> "PolygonRadius":
        r = self.radius(theta_grid(n))
        if not np.all(np.isfinite(r)) or np.min(r) <= self.r_min:
            raise InvalidBoundary("polygon is not star-shaped about the origin")
        return self
