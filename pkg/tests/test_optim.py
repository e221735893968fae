import json

import numpy as np
import pytest

from eigshape.analysis import DISK_J
from eigshape.curve import FourierBoundary, perimeter
from eigshape.exceptions import ConfigError
from eigshape.optim import (
    OptimConfig,
    OptimTrace,
    default_init,
    evaluate,
    jittered_start,
    minimize,
    multistart,
    objective_value,
)

QUICK = dict(K=8, n_r=16, n_theta=64, polish_n_r=24, polish_n_theta=96, max_iters=6, polish_max_iters=2)


@pytest.mark.parametrize(
    "field,value",
    [("K", 2), ("n_r", 2), ("n_theta", 8), ("c1", 0.0), ("c1", 1.5), ("backtrack", 1.0),
     ("grad_tol", -1.0), ("perimeter", 0.0), ("eigen_index", 5), ("gradient_method", "adjoint"),
     ("jitter", -0.1), ("max_iters", 1.5)],
)
def test_config_validation_names_field(field, value):
    with pytest.raises(ConfigError) as exc:
        OptimConfig(**{field: value}).validate()
    assert exc.value.field == field
    assert str(exc.value).startswith(f"{field}:")


def test_config_roundtrip_and_unknown_field(tmp_path):
    cfg = OptimConfig(K=10, seed=3)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.to_dict()))
    assert OptimConfig.load(p) == cfg
    with pytest.raises(ConfigError) as exc:
        OptimConfig.from_dict({"K": 8, "colour": "red"})
    assert exc.value.field == "colour"


def test_evaluate_fields():
    fb = FourierBoundary(1.0, [0.0, 0.2], [0.0, 0.0])
    ev = evaluate(fb, 16, 64)
    assert ev.J == pytest.approx(perimeter(fb) ** 2 * ev.lambdas[1])
    assert ev.gap == pytest.approx((ev.lambdas[2] - ev.lambdas[1]) / ev.lambdas[1])
    assert objective_value(fb, 16, 64) == ev.J


def test_objective_is_dilation_invariant():
    fb = FourierBoundary(1.0, [0.0, 0.2, 0.05], [0.0, 0.0, 0.03])
    assert objective_value(fb.scaled(2.0)) == pytest.approx(objective_value(fb), rel=1e-10)


def test_minimize_decreases_monotonically_and_rescales():
    cfg = OptimConfig(**QUICK)
    fb, tr = minimize(cfg, default_init(cfg))
    J = tr.J
    assert np.all(np.diff(J[tr_phase(tr, "coarse")]) <= 0)
    assert np.all(np.diff(J[tr_phase(tr, "polish")]) <= 0)
    assert perimeter(fb) == pytest.approx(cfg.perimeter, rel=1e-12)
    assert tr.termination in {"converged", "max_iters", "line_search_stalled"}
    assert tr.n_evaluations >= len(tr.records)
    # translations are frozen
    assert fb.a[0] == 0 and fb.b[0] == 0


def tr_phase(tr, phase):
    return np.array([r.phase == phase for r in tr.records])


def test_minimize_is_deterministic():
    cfg = OptimConfig(**QUICK)
    a = minimize(cfg, default_init(cfg))
    b = minimize(cfg, default_init(cfg))
    np.testing.assert_array_equal(a[0].to_vector(), b[0].to_vector())
    assert a[1].to_csv() == b[1].to_csv()


def test_degenerate_start_uses_double_branch_and_descends():
    cfg = OptimConfig(**{**QUICK, "max_iters": 3, "polish_max_iters": 0})
    fb, tr = minimize(cfg, FourierBoundary.circle(1.0, 8))
    assert tr.records[0].branch == "double"
    assert tr.records[-1].J < tr.records[0].J
    assert tr.records[-1].J < DISK_J


def test_trace_csv_format():
    cfg = OptimConfig(**{**QUICK, "max_iters": 2, "polish_max_iters": 0})
    _, tr = minimize(cfg, default_init(cfg))
    lines = tr.to_csv().splitlines()
    assert lines[0] == "iter,J,P,lambda2,gap,step,gradnorm"
    assert len(lines) == len(tr.records) + 1
    row = lines[1].split(",")
    assert int(row[0]) == 0 and float(row[1]) == tr.records[0].J
    assert isinstance(OptimTrace().to_csv(), str)


def test_jittered_start_is_seeded_and_keeps_frozen_modes():
    cfg = OptimConfig(K=8, jitter=0.05)
    init = default_init(cfg)
    a = jittered_start(cfg, init, np.random.default_rng(1))
    b = jittered_start(cfg, init, np.random.default_rng(1))
    np.testing.assert_array_equal(a.to_vector(), b.to_vector())
    assert a.a0 == init.a0 and a.a[0] == 0 and a.b[0] == 0
    assert not np.array_equal(a.to_vector(), init.to_vector())


def test_multistart_keeps_best():
    cfg = OptimConfig(**{**QUICK, "max_iters": 2, "polish_max_iters": 0})
    res = multistart(cfg, 2)
    assert len(res.J_values) == 2
    assert res.J == min(res.J_values)
    assert res.shape is res.shapes[res.best_index]
    with pytest.raises(ValueError):
        multistart(cfg, 0)


def test_lambda1_optimization_reaches_disk():
    cfg = OptimConfig(K=8, eigen_index=0, polish_max_iters=10)
    fb, tr = minimize(cfg, FourierBoundary(1.0, [0.0, 0.15], [0.0, 0.0]))
    assert tr.termination == "converged"
    th = np.linspace(0, 2 * np.pi, 512, endpoint=False)
    assert np.max(np.abs(fb.radius(th) - 1)) < 1e-2
