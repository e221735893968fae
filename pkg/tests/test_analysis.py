import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import jn_zeros

from eigshape import fem
from eigshape.analysis import (
    DISK_J,
    J01_SQ,
    J11_SQ,
    TWO_DISKS_J,
    convexification_check,
    convexity_defect,
    curvature_zeros,
    nodal_boundary_points,
    optimality_residual,
    reference_values,
    segment_arc_detect,
    sign_changes,
    simplicity_gap,
    stadium_fit,
    stadium_radius,
    symmetry_axes,
    verify,
)
from eigshape.curve import FourierBoundary, perimeter
from eigshape.exceptions import DegenerateEigenvalue
from eigshape.mesh import build_polar_mesh

from conftest import random_shape

OVAL = FourierBoundary(1.0, [0.0, 0.2], [0.0, 0.0])  # curvature vanishes at theta = pi/2, 3pi/2


def _solved(fb, n_r=24, n_t=96):
    m = build_polar_mesh(fb, n_r, n_t)
    return m, fem.eigensolve(m, 4)


def test_bessel_constants():
    assert J01_SQ == pytest.approx(5.78318596, rel=1e-8)
    assert J11_SQ == pytest.approx(14.68197064, rel=1e-8)
    assert DISK_J == pytest.approx(4 * np.pi**2 * jn_zeros(1, 1)[0] ** 2, rel=1e-14)
    assert DISK_J == pytest.approx(579.61, abs=0.02)
    assert TWO_DISKS_J == pytest.approx(16 * np.pi**2 * jn_zeros(0, 1)[0] ** 2)
    assert TWO_DISKS_J == pytest.approx(913.18, abs=0.1)


@pytest.mark.parametrize("c", [2 * np.pi, 3.0, 17.0])
def test_reference_values_analytic(c):
    d = reference_values("disk", c)
    assert d["J"] == pytest.approx(DISK_J, rel=1e-14) and d["P"] == c and not d["numerical"]
    t = reference_values("two-disks", c)
    assert t["J"] == pytest.approx(TWO_DISKS_J, rel=1e-14)
    with pytest.raises(ValueError):
        reference_values("square")
    with pytest.raises(ValueError):
        reference_values("disk", 0.0)


def test_stadium_fit_baseline():
    ref = reference_values("stadium-fit", n_r=32, n_theta=128)
    assert ref["numerical"]
    assert ref["P"] == pytest.approx(2 * np.pi, rel=1e-12)
    assert ref["J"] < DISK_J


def test_stadium_radius_geometry():
    assert stadium_radius(0.0, 1.0, 1.0) == pytest.approx(2.0)
    assert stadium_radius(np.pi / 2, 1.0, 1.0) == pytest.approx(1.0)
    fb = stadium_fit(K=128)
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    np.testing.assert_allclose(fb.radius(th), stadium_radius(th), atol=2e-3)


def test_stadium_is_flagged_segment_and_arc():
    sa = segment_arc_detect(stadium_fit())
    assert sa["segment_like"] and sa["arc_like"]
    assert sa["worst_segment_theta"] == pytest.approx(np.pi / 2, abs=0.3) or \
        sa["worst_segment_theta"] == pytest.approx(3 * np.pi / 2, abs=0.3)


def test_smooth_oval_is_not_flagged():
    sa = segment_arc_detect(FourierBoundary(1.0, [0.0, 0.12, 0.0, 0.02], [0.0] * 4))
    assert not sa["segment_like"] and not sa["arc_like"]


def test_circle_is_arc_like():
    assert segment_arc_detect(FourierBoundary.circle(1.0, 4))["arc_like"]


@pytest.mark.parametrize(
    "x,count",
    [([1, 0, 0.1], 0), ([1, 0, 0.2], 2), ([1, 0, 0.3], 4), ([1, 0, 0, 0.15], 6)],
)
def test_curvature_zero_counts(x, count):
    fb = FourierBoundary.from_vector(np.concatenate([x, np.zeros(len(x) - 1)]))
    n, locs = curvature_zeros(fb)
    assert n == count and len(locs) == count


def test_curvature_zero_locations_of_tangent_oval():
    _, locs = curvature_zeros(OVAL)
    np.testing.assert_allclose(locs, [np.pi / 2, 3 * np.pi / 2], atol=1e-3)


def test_sign_changes():
    assert sign_changes(np.array([1.0, -1.0, 2.0, -3.0])) == 4
    assert sign_changes(np.array([1.0, 0.0, 1.0])) == 0
    assert sign_changes(np.array([1.0, 0.0, -1.0, -1.0])) == 2
    assert sign_changes(np.array([0.0])) == 0


def test_nodal_points_and_gap_on_oval():
    m, sr = _solved(OVAL)
    assert nodal_boundary_points(m, sr) == 2
    assert simplicity_gap(sr) > 0.1


def test_optimality_residual_disk_is_degenerate():
    m, sr = _solved(FourierBoundary.circle(1.0))
    with pytest.raises(DegenerateEigenvalue):
        optimality_residual(FourierBoundary.circle(1.0), m, sr)


def test_symmetry_axes():
    axes = symmetry_axes(OVAL)["axes"]
    np.testing.assert_allclose(sorted(axes), [0.0, np.pi / 2], atol=1e-12)
    lopsided = FourierBoundary(1.0, [0.0, 0.1, 0.05], [0.0, 0.07, 0.0])
    assert len(symmetry_axes(lopsided)["axes"]) == 0


def test_convexity_defect():
    assert convexity_defect(OVAL) < 1e-12
    assert convexity_defect(FourierBoundary(1.0, [0.0, 0.3], [0.0, 0.0])) > 1e-4


def test_convexification_lowers_perimeter_and_eigenvalue():
    c = convexification_check(FourierBoundary(1.0, [0.0, 0.0, 0.25], [0.0] * 3), 16, 64)
    assert c["P_hull"] < c["P_shape"]
    assert c["lambda_hull"] < c["lambda_shape"]


def test_verify_on_circle_fails_expected_checks():
    rep = verify(FourierBoundary.circle(1.0, 4), 24, 96)
    assert not rep.passed
    assert rep.curvature_zero_count == 0
    assert rep.optimality_residual is None
    assert not rep.checks["curvature_zero_count == 2"]
    assert rep.nodal_boundary_points % 2 == 0
    d = json.loads(rep.to_json())
    assert d["checks"] == {k: bool(v) for k, v in rep.checks.items()}
    assert "continuous symmetry" in rep.summary()


def test_verify_symmetry_is_diagnostic_only():
    rep = verify(OVAL, 24, 96)
    assert all("symmetry" not in k for k in rep.checks)


@pytest.mark.parametrize("t", [0.5, 3.0])
def test_report_quantities_are_dilation_invariant(t):
    fb = random_shape(5)
    m, sr = _solved(fb)
    ms, srs = _solved(fb.scaled(t))
    assert optimality_residual(fb.scaled(t), ms, srs) == pytest.approx(optimality_residual(fb, m, sr), rel=1e-8)
    assert simplicity_gap(srs) == pytest.approx(simplicity_gap(sr), rel=1e-8)
    assert nodal_boundary_points(ms, srs) == nodal_boundary_points(m, sr)
    assert curvature_zeros(fb.scaled(t))[0] == curvature_zeros(fb)[0]


def test_report_quantities_are_rotation_invariant():
    # a rotation by two mesh angles maps the mesh onto itself
    fb = random_shape(6)
    alpha = 2 * 2 * np.pi / 96
    m, sr = _solved(fb)
    mr, srr = _solved(fb.rotated(alpha))
    assert optimality_residual(fb.rotated(alpha), mr, srr) == pytest.approx(optimality_residual(fb, m, sr),
                                                                             rel=1e-6)
    assert simplicity_gap(srr) == pytest.approx(simplicity_gap(sr), rel=1e-6)
    assert nodal_boundary_points(mr, srr) == nodal_boundary_points(m, sr)


coef = st.floats(-0.06, 0.06, allow_nan=False)


@settings(max_examples=25, deadline=None)
@given(st.lists(coef, min_size=5, max_size=5), st.lists(coef, min_size=5, max_size=5),
       st.floats(0, 2 * np.pi), st.floats(0.3, 3.0))
def test_curvature_zero_count_invariances(a, b, alpha, t):
    fb = FourierBoundary(1.0, np.array([0.0, 0.2] + a[2:]), np.array(b))
    n = curvature_zeros(fb)[0]
    assert curvature_zeros(fb.scaled(t))[0] == n
    assert convexity_defect(fb.scaled(t)) == pytest.approx(convexity_defect(fb), abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.lists(coef, min_size=4, max_size=4), st.lists(coef, min_size=4, max_size=4))
def test_nodal_count_is_even(a, b):
    fb = FourierBoundary(1.0, np.array([0.0, 0.15] + a[2:]), np.array(b))
    m, sr = _solved(fb, 12, 48)
    assert nodal_boundary_points(m, sr) % 2 == 0
