import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from vecslep.errors import DomainError, FormatError
from vecslep.region import (Mask, PolarCap, PolygonUnion, cap_quadrature, read_mask,
                            read_polygons, region_quadrature, sphere_quadrature, write_mask,
                            write_polygons)
from vecslep.specfun import xlm_table

SQUARE = [(0, 0), (90, 0), (90, 45), (0, 45)]


def test_cap_area():
    assert_allclose(PolarCap(math.radians(60)).area(), math.pi)
    assert_allclose(PolarCap(math.pi).area(), 4 * math.pi)
    with pytest.raises(DomainError):
        PolarCap(0.0)
    with pytest.raises(DomainError):
        PolarCap(3.5)


@settings(max_examples=30)
@given(st.floats(0.01, 3.0), st.floats(0.001, 0.1))
def test_cap_area_monotone(a, d):
    assert PolarCap(a + d).area() > PolarCap(a).area()


def test_cap_contains():
    cap = PolarCap(math.radians(40))
    assert cap.contains(math.radians(10), 0.0)
    assert not cap.contains(math.radians(41), 0.0)


def test_polygon_contains_square():
    sq = PolygonUnion([SQUARE])
    assert sq.contains(math.radians(90 - 20), math.radians(22))
    assert not sq.contains(math.radians(90 - 20), math.radians(100))
    assert not sq.contains(math.radians(90 + 20), math.radians(22))


def test_polygon_area_exact_triangle():
    # octant triangle: area pi/2
    tri = PolygonUnion([[(0, 0), (90, 0), (0, 90)]])
    assert_allclose(tri.area(), math.pi / 2, rtol=1e-14)


def test_polygon_orientation_complement():
    cw = PolygonUnion([SQUARE[::-1]])
    sq = PolygonUnion([SQUARE])
    assert_allclose(sq.area() + cw.area(), 4 * math.pi, rtol=1e-14)
    rng = np.random.default_rng(1)
    th = rng.uniform(0.01, math.pi - 0.01, 400)
    ph = rng.uniform(0, 2 * math.pi, 400)
    assert np.all(sq.contains(th, ph) ^ cw.contains(th, ph))


def test_polygon_small_planar_limit():
    # a tiny square at the equator approaches its planar area
    d = 0.01
    sq = PolygonUnion([[(0, 0), (d, 0), (d, d), (0, d)]])
    assert_allclose(sq.area(), math.radians(d) ** 2, rtol=1e-5)


def test_polygon_union_additive():
    a = [(0, 0), (30, 0), (30, 30), (0, 30)]
    b = [(100, -20), (140, -20), (140, 10), (100, 10)]
    u = PolygonUnion([a, b])
    assert_allclose(u.area(), PolygonUnion([a]).area() + PolygonUnion([b]).area())


def test_polygon_area_matches_quadrature():
    sq = PolygonUnion([SQUARE])
    rule = region_quadrature(sq, 30)
    assert_allclose(rule.weights.sum(), sq.area(), rtol=1e-3)


def test_sphere_rule_constant():
    assert_allclose(sphere_quadrature(0).weights.sum(), 4 * math.pi, rtol=1e-13)
    assert_allclose(sphere_quadrature(18).weights.sum(), 4 * math.pi, rtol=1e-13)


def test_sphere_rule_orthonormality_certificate():
    L = 12
    rule = sphere_quadrature(L)
    X = xlm_table(L, rule.thetas)
    for m in range(L + 1):
        # theta_weights include the longitude spacing 2 pi / nphi
        G = (X[m:, m] * rule.theta_weights * rule.phis.size) @ X[m:, m].T
        assert_allclose(G, np.eye(L - m + 1), atol=1e-12)


def test_sphere_rule_x18_4():
    rule = sphere_quadrature(18)
    X = xlm_table(18, rule.thetas)[18, 4]
    assert_allclose((X * X * rule.theta_weights).sum() * rule.phis.size, 1.0, rtol=1e-12)


def test_cap_rule_area():
    cap = PolarCap(math.radians(40))
    assert_allclose(region_quadrature(cap, 18).weights.sum(), cap.area(), rtol=1e-13)
    assert_allclose(cap_quadrature(cap.Theta, 3).weights.sum(), cap.area(), rtol=1e-13)


def test_unfitted_cap_rule_area():
    # filtered global rule: boundary-limited accuracy
    cap = PolarCap(math.radians(40))
    plain = region_quadrature(cap, 18, fitted=False, subsample=1).weights.sum()
    frac = region_quadrature(cap, 18, fitted=False).weights.sum()
    assert abs(plain / cap.area() - 1) < 5e-2
    assert abs(frac / cap.area() - 1) < 1e-3


def test_mask_area_and_complement():
    cap = PolarCap(math.radians(30))
    m = Mask.from_region(cap, 180, 360)
    assert_allclose(m.area(), cap.area(), rtol=1e-2)
    assert_allclose(m.area() + m.complement().area(), 4 * math.pi, rtol=1e-13)
    assert m.contains(0.1, 1.0) and not m.complement().contains(0.1, 1.0)


def test_empty_region():
    with pytest.raises(DomainError):
        Mask(np.zeros((4, 8))).area()


def test_polygon_file_roundtrip(tmp_path):
    p = tmp_path / "r.poly"
    p.write_text("0 0\n90 0\n90 45\n0 45\n\n100 -20\n140 -20\n140 10\n")
    r = read_polygons(p)
    assert len(r.polygons) == 2
    write_polygons(tmp_path / "s.poly", r)
    assert_allclose(read_polygons(tmp_path / "s.poly").area(), r.area())


def test_polygon_file_errors(tmp_path):
    p = tmp_path / "bad.poly"
    p.write_text("0 0\n90 zero\n")
    with pytest.raises(FormatError, match=":2:"):
        read_polygons(p)


def test_mask_file(tmp_path):
    p = tmp_path / "m.mask"
    p.write_text("MASK 2 4\n1 1 0 0\n0 0 0 1\n")
    m = read_mask(p)
    assert m.cells.sum() == 3
    write_mask(tmp_path / "n.mask", m)
    assert (tmp_path / "n.mask").read_text() == p.read_text()
    p.write_text("MASK 2 4\n1 1 0 0\n0 2 0 1\n")
    with pytest.raises(FormatError, match=":3:"):
        read_mask(p)
