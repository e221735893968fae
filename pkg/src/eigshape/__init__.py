"""Numerical minimization of the second Dirichlet eigenvalue at fixed perimeter."""

__version__ = "0.1.0"

from .curve import FourierBoundary, PolygonalCurve, area, curvature, perimeter  # noqa: E402
from .estimator import DirichletSpectrum, ShapeOptimizer  # noqa: E402
from .exceptions import (  # noqa: E402
    DegenerateEigenvalue,
    DegenerateInput,
    DegenerateTriangle,
    FactorizationFailure,
    InvalidBoundary,
    LineSearchStalled,
    NoConvergence,
)
from .fem import SpectralResult, eigensolve, solve_lowest  # noqa: E402
from .mesh import TriangleMesh, build_polar_mesh  # noqa: E402
from .optim import OptimConfig, OptimTrace, minimize, multistart  # noqa: E402

__all__ = [
    "FourierBoundary", "PolygonalCurve", "area", "curvature", "perimeter",
    "DirichletSpectrum", "ShapeOptimizer",
    "DegenerateEigenvalue", "DegenerateInput", "DegenerateTriangle", "FactorizationFailure",
    "InvalidBoundary", "LineSearchStalled", "NoConvergence",
    "SpectralResult", "eigensolve", "solve_lowest", "TriangleMesh", "build_polar_mesh",
    "OptimConfig", "OptimTrace", "minimize", "multistart",
]
