"""Deterministic SVG rendering of a boundary, optionally with a boundary field."""
from __future__ import annotations

import numpy as np

from . import fem
from .analysis import CURVATURE_ZERO_TOL
from .curve import FourierBoundary, curvature, perimeter, theta_grid
from .mesh import build_polar_mesh
from .shapegrad import lagrange_multiplier

FIELDS = ("curvature", "trace2", "residual")


def boundary_field(fb: FourierBoundary, name: str, n_r: int = 64, n_theta: int = 256):
    """``(theta, values)`` of a named boundary field.

    ``trace2`` is ``(du_2/dn)^2`` and ``residual`` is
    ``(du_2/dn)^2 - (2 lambda_2 / P) C``, both at the mesh boundary nodes.
    """
    if name == "curvature":
        theta = theta_grid(1024)
        return theta, curvature(fb, theta)
    if name not in FIELDS:
        raise ValueError(f"unknown field {name!r}; expected one of {FIELDS}")
    m = build_polar_mesh(fb, n_r, n_theta)
    sr = fem.eigensolve(m, 4)
    g2 = fem.normal_derivative_trace(m, sr, 1) ** 2
    if name == "trace2":
        return m.boundary_theta, g2
    mu = lagrange_multiplier(float(sr.eigenvalues[1]), perimeter(fb))
    return m.boundary_theta, g2 - mu * curvature(fb, m.boundary_theta)


def _colour(t: float) -> str:
    """Blue (t=-1) through white (0) to red (t=+1)."""
    t = float(np.clip(t, -1, 1))
    if t < 0:
        c = (int(round(255 * (1 + t))), int(round(255 * (1 + t))), 255)
    else:
        c = (255, int(round(255 * (1 - t))), int(round(255 * (1 - t))))
    return "#%02x%02x%02x" % c


def render_svg(fb: FourierBoundary, field: str | None = None, size: int = 480,
               n: int = 512, n_r: int = 64, n_theta: int = 256) -> str:
    theta = theta_grid(n)
    r = fb.radius(theta)
    x, y = r * np.cos(theta), r * np.sin(theta)
    extent = 1.25 * float(np.max(r))
    scale = size / (2 * extent)

    def px(u, v):
        return (size / 2 + scale * u, size / 2 - scale * v)

    pts = [px(u, v) for u, v in zip(x, y)]
    d = "M " + " L ".join(f"{a:.3f} {b:.3f}" for a, b in pts) + " Z"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if field is not None:
        ft, fv = boundary_field(fb, field, n_r, n_theta)
        vmax = float(np.max(np.abs(fv))) or 1.0
        band = 0.08 * extent
        fr = fb.radius(ft)
        parts.append(f'<g id="field-{field}" stroke-width="{max(2.0, band * scale):.2f}">')
        zero = np.abs(fv) < CURVATURE_ZERO_TOL * vmax if field == "curvature" else np.zeros(len(fv), bool)
        for i in range(len(ft)):
            t0, t1 = ft[i], ft[(i + 1) % len(ft)] + (2 * np.pi if i == len(ft) - 1 else 0.0)
            rr0, rr1 = fr[i] + band, fr[(i + 1) % len(ft)] + band
            a = px(rr0 * np.cos(t0), rr0 * np.sin(t0))
            b = px(rr1 * np.cos(t1), rr1 * np.sin(t1))
            cls = ' class="zero-band"' if zero[i] else ""
            parts.append(f'<line{cls} x1="{a[0]:.3f}" y1="{a[1]:.3f}" x2="{b[0]:.3f}" y2="{b[1]:.3f}" '
                         f'stroke="{_colour(fv[i] / vmax)}"/>')
        parts.append("</g>")
    parts.append(f'<path id="boundary" d="{d}" fill="none" stroke="black" stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
