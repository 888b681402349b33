from __future__ import annotations

import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from lagmin import svgplot
from lagmin.errors import InvalidInputError


def _points(svg):
    pts = re.findall(r'points="([^"]+)"', svg)
    return np.array([[float(v) for v in p.split(",")] for chunk in pts for p in chunk.split()])


def test_curve_plot_keeps_aspect_ratio():
    t = np.linspace(0, 2 * np.pi, 200)
    svg = svgplot.curves_svg([(3 * np.cos(t), np.sin(t))], "ellipse")
    ET.fromstring(svg.split("\n", 1)[1])
    xy = _points(svg)
    width = np.ptp(xy[:, 0])
    height = np.ptp(xy[:, 1])
    assert width / height == pytest.approx(3.0, rel=1e-3)


def test_nan_splits_polyline():
    x = np.array([0.0, 1.0, np.nan, 2.0, 3.0])
    svg = svgplot.curves_svg([(x, x)], "gap")
    assert svg.count("<polyline") == 2


def test_heatmap_is_valid_and_deterministic():
    x, y = np.meshgrid(np.arange(5.0), np.arange(4.0), indexing="ij")
    v = 10.0 ** (-x - y)
    a = svgplot.heatmap_svg(x, y, v, "field")
    assert a == svgplot.heatmap_svg(x, y, v, "field")
    root = ET.fromstring(a.split("\n", 1)[1])
    assert len([e for e in root.iter() if e.tag.endswith("rect")]) == 1 + 20


def test_empty_inputs_rejected():
    with pytest.raises(InvalidInputError):
        svgplot.curves_svg([], "none")
    with pytest.raises(InvalidInputError):
        svgplot.heatmap_svg([], [], [], "none")
