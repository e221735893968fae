import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from eigshape import DirichletSpectrum, ShapeOptimizer
from eigshape.analysis import J11_SQ
from eigshape.curve import FourierBoundary
from eigshape.exceptions import ConfigError, InvalidBoundary
from eigshape.validation import check_coefficients, check_shape

QUICK = dict(n_modes=8, n_r=16, n_theta=64, polish_n_r=24, polish_n_theta=96, max_iter=4, polish_max_iter=1)


def test_params_roundtrip_and_clone():
    est = ShapeOptimizer(n_modes=10, random_state=4)
    params = est.get_params()
    assert params["n_modes"] == 10 and params["random_state"] == 4
    c = clone(est).set_params(n_starts=3)
    assert c.n_starts == 3 and est.n_starts == 1


def test_invalid_params_raise_config_error_on_fit():
    with pytest.raises(ConfigError):
        ShapeOptimizer(n_modes=2).fit()


def test_fit_attributes_and_objective():
    est = ShapeOptimizer(**QUICK).fit()
    assert isinstance(est.shape_, FourierBoundary)
    assert est.J_ == est.J_starts_[0]
    assert est.n_iter_ == len(est.trace_.records) - 1
    assert est.termination_ in {"converged", "max_iters", "line_search_stalled"}
    assert est.coef_.shape == (17,)
    J = est.objective(est.coef_)
    assert J[0] == pytest.approx(est.J_, rel=1e-9)


def test_fit_accepts_shape_dict_and_vector():
    x = np.zeros(17)
    x[0], x[2] = 1.0, 0.15
    a = ShapeOptimizer(**QUICK).fit(x)
    b = ShapeOptimizer(**QUICK).fit(FourierBoundary.from_vector(x).to_dict())
    np.testing.assert_array_equal(a.coef_, b.coef_)


def test_unfitted():
    with pytest.raises(NotFittedError):
        ShapeOptimizer().coef_


def test_spectrum_transformer_on_disks():
    X = np.array([[1.0, 0, 0], [2.0, 0, 0]])
    lam = DirichletSpectrum(n_r=24, n_theta=96).fit(X).transform(X)
    assert lam.shape == (2, 4)
    np.testing.assert_allclose(lam[0] / lam[1], 4.0, rtol=1e-12)
    assert lam[0, 1] == pytest.approx(J11_SQ, rel=5e-3)


def test_spectrum_in_pipeline():
    pipe = make_pipeline(DirichletSpectrum(n_r=12, n_theta=48, n_eigs=2), FunctionTransformer(np.log))
    out = pipe.fit_transform(np.array([[1.0, 0.0, 0.1, 0.0, 0.0]]))
    assert out.shape == (1, 2) and np.all(np.isfinite(out))


def test_spectrum_rejects_invalid_rows():
    with pytest.raises(InvalidBoundary):
        DirichletSpectrum().transform([[1.0, 1.5, 0.0]])
    with pytest.raises(ValueError):
        DirichletSpectrum().transform([[1.0, 0.0]])
    with pytest.raises(ValueError):
        DirichletSpectrum().transform([[np.nan, 0.0, 0.0]])


def test_validation_helpers():
    assert check_coefficients([1.0, 0.0, 0.0]).shape == (1, 3)
    fb = check_shape({"a0": 1.0, "a": [0.1], "b": [0.0]}, K=4)
    assert fb.K == 4
    with pytest.raises(ValueError):
        check_shape(np.ones((2, 3)))
    with pytest.raises(InvalidBoundary):
        check_shape([-1.0, 0.0, 0.0])
    assert check_shape([-1.0, 0.0, 0.0], validate=False).a0 == -1.0
