"""Input validation helpers shared by the estimators and the CLI."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .curve import FourierBoundary


def check_coefficients(X) -> np.ndarray:
    """2-D float array of coefficient rows ``[a0, a_1..a_K, b_1..b_K]``."""
    X = check_array(X, dtype=np.float64, ensure_2d=False)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] % 2 != 1:
        raise ValueError(f"coefficient rows must have odd length 1 + 2K, got {X.shape[1]}")
    return X


def check_shape(X, K: int | None = None, validate: bool = True) -> FourierBoundary:
    """Coerce a :class:`FourierBoundary`, shape dict or coefficient vector.

    ``K`` pads or truncates the modes; ``validate`` checks the minimum radius.
    """
    if isinstance(X, FourierBoundary):
        fb = X
    elif isinstance(X, dict):
        fb = FourierBoundary.from_dict(X)
    else:
        X = check_coefficients(X)
        if X.shape[0] != 1:
            raise ValueError(f"expected a single shape, got {X.shape[0]} rows")
        fb = FourierBoundary.from_vector(X[0])
    if K is not None:
        fb = fb.with_modes(K)
    return fb.validate() if validate else fb
