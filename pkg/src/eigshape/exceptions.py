"""Exception types raised across the package."""


class EigshapeError(Exception):
    """Base class for all package errors."""


class InvalidBoundary(EigshapeError, ValueError):
    """Radial function drops to or below the admissible minimum radius."""


class DegenerateInput(EigshapeError, ValueError):
    """Geometric input has no area (e.g. all points collinear)."""


class DegenerateTriangle(EigshapeError, ValueError):
    """A mesh triangle has (near) zero area."""


class NoConvergence(EigshapeError, RuntimeError):
    """Eigensolver did not reach its tolerance.

    The best achieved residual is kept on ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class FactorizationFailure(EigshapeError, RuntimeError):
    """Sparse factorization of the shifted stiffness matrix failed."""


class DegenerateEigenvalue(EigshapeError, ValueError):
    """Targeted eigenvalue is (numerically) multiple; use the 2x2 matrix route."""


class LineSearchStalled(EigshapeError, RuntimeError):
    """Backtracking could not find a sufficient decrease."""


class ConfigError(EigshapeError, ValueError):
    """Invalid optimizer configuration; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
