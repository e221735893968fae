import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from eigshape.curve import FourierBoundary
from eigshape.plot import FIELDS, boundary_field, render_svg

NS = {"svg": "http://www.w3.org/2000/svg"}
OVAL = FourierBoundary(1.0, [0.0, 0.2], [0.0, 0.0])


def zero_band_clusters(svg: str) -> int:
    root = ET.fromstring(svg)
    lines = root.findall(".//svg:g/svg:line", NS)
    flags = np.array([ln.get("class") == "zero-band" for ln in lines])
    if flags.all() or not flags.any():
        return int(flags.all())
    starts = flags & ~np.roll(flags, 1)
    return int(starts.sum())


def test_circle_svg_has_single_closed_path():
    svg = render_svg(FourierBoundary.circle(1.0))
    root = ET.fromstring(svg)
    paths = root.findall(".//svg:path", NS)
    assert len(paths) == 1
    d = paths[0].get("d")
    assert d.startswith("M ") and d.endswith(" Z")
    assert d.count("M") == 1


def test_svg_is_deterministic():
    assert render_svg(OVAL, field="curvature") == render_svg(OVAL, field="curvature")


def test_curvature_band_highlights_zeros_of_tangent_oval():
    svg = render_svg(OVAL, field="curvature")
    assert zero_band_clusters(svg) == 2
    assert 'id="field-curvature"' in svg


@pytest.mark.parametrize("name", ["trace2", "residual"])
def test_eigenfunction_fields(name):
    th, v = boundary_field(OVAL, name, 16, 64)
    assert th.shape == v.shape == (64,)
    svg = render_svg(OVAL, field=name, n_r=16, n_theta=64)
    assert len(re.findall("<line", svg)) == 64


def test_trace2_is_nonnegative():
    _, v = boundary_field(OVAL, "trace2", 16, 64)
    assert np.all(v >= 0)


def test_unknown_field():
    assert "curvature" in FIELDS
    with pytest.raises(ValueError):
        render_svg(OVAL, field="pressure")
