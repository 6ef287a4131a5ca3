import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from vecslep import vsh
from vecslep.errors import PoleSingularityError, ResolutionError
from vecslep.region import sphere_quadrature
from vecslep.vsh import (CoeffVector, analyze, basis_matrix, eval_B, eval_C, eval_P,
                         evaluate, synth)


def real_ylm(l, m, theta, phi):
    return eval_P(l, m, theta, phi).r


def test_layout():
    L = 3
    assert vsh.n_radial(L) == 16 and vsh.n_tangential(L) == 15 and vsh.n_full(L) == 46
    ls, ms = vsh.degrees_orders(L)
    k = vsh.lm_index(ls, ms)
    assert_allclose(k, np.arange(16))
    ls, ms = vsh.degrees_orders(L, 1)
    assert_allclose(vsh.lm_index(ls, ms, 1), np.arange(15))


def test_coeffvector_roundtrip():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(vsh.n_full(5))
    c = CoeffVector.from_array(5, x)
    assert_allclose(c.to_array(), x)
    assert_allclose(c.pad(7).truncate(5).to_array(), x)
    with pytest.raises(ValueError):
        CoeffVector.from_array(5, x[:-1])


def test_p00_constant():
    v = eval_P(0, 0, 1.234, 5.0)
    assert_allclose(v, (1 / math.sqrt(4 * math.pi), 0.0, 0.0))


@pytest.mark.parametrize("l,m", [(1, 0), (1, 1), (1, -1), (3, 2), (3, -2), (6, -5)])
def test_b_and_c_are_gradients(l, m):
    # B = grad_1 Y / sqrt(l(l+1)), C = -r x B, checked by central differences
    th, ph, h = 0.7, 1.1, 1e-6
    n = math.sqrt(l * (l + 1))
    gt = (real_ylm(l, m, th + h, ph) - real_ylm(l, m, th - h, ph)) / (2 * h)
    gp = (real_ylm(l, m, th, ph + h) - real_ylm(l, m, th, ph - h)) / (2 * h * math.sin(th))
    b, c = eval_B(l, m, th, ph), eval_C(l, m, th, ph)
    assert_allclose((b.r, b.t, b.p), (0, gt / n, gp / n), atol=1e-8)
    assert_allclose((c.r, c.t, c.p), (0, gp / n, -gt / n), atol=1e-8)


def test_real_harmonic_azimuth_convention():
    # m > 0 carries sin(m phi), m < 0 carries cos(|m| phi)
    assert abs(real_ylm(2, 1, 0.8, 0.0)) < 1e-15
    assert abs(real_ylm(2, -1, 0.8, math.pi / 2)) < 1e-15


def test_pole_errors():
    with pytest.raises(PoleSingularityError):
        eval_B(3, 1, 0.0, 0.0)
    with pytest.raises(PoleSingularityError):
        eval_C(2, -1, math.pi, 0.0)
    assert_allclose(eval_B(3, 2, 0.0, 0.0), (0, 0, 0))
    assert_allclose(eval_P(3, 0, 0.0, 0.0).r, math.sqrt(7 / (4 * math.pi)))


@pytest.mark.parametrize("L", [0, 1, 5, 12])
def test_orthonormality(L):
    rule = sphere_quadrature(L)
    H = basis_matrix(L, rule.theta, rule.phi, "K" if L else "P")
    G = np.einsum("i,iak,ial->kl", rule.weights, H, H)
    assert_allclose(G, np.eye(G.shape[0]), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**31 - 1))
def test_synth_analyze_roundtrip(L, seed):
    rng = np.random.default_rng(seed)
    c = CoeffVector.from_array(L, rng.standard_normal(vsh.n_full(L)))
    rule = sphere_quadrature(L)
    g = synth(c, rule.thetas, rule.phis)
    assert_allclose(analyze(g, L).to_array(), c.to_array(), atol=1e-10)


def test_analyze_rejects_coarse_grid():
    c = CoeffVector.zeros(6)
    rule = sphere_quadrature(4)
    g = synth(c, rule.thetas, rule.phis)
    with pytest.raises(ResolutionError):
        analyze(g, 6)


def test_synth_matches_pointwise():
    rng = np.random.default_rng(3)
    c = CoeffVector.from_array(7, rng.standard_normal(vsh.n_full(7)))
    th = rng.uniform(0.05, 3.0, 6)
    ph = rng.uniform(0, 2 * math.pi, 6)
    pts = evaluate(c, th, ph)
    for k in range(6):
        assert_allclose(synth(c, [th[k]], [ph[k]]).samples[0, 0], pts[k], atol=1e-13)


def test_synth_pole_rows_clamped():
    c = CoeffVector.zeros(3)
    c.V[vsh.lm_index(1, 1, 1)] = 1.0
    g = synth(c, [0.0, 1.0, math.pi], [0.0, 1.0])
    assert np.all(np.isfinite(g.samples))
    assert_allclose(g.samples[0], synth(c, [1e-7], [0.0, 1.0]).samples[0], atol=1e-12)


def test_tangential_fields_have_no_radial_part():
    rng = np.random.default_rng(5)
    c = CoeffVector.from_array(4, rng.standard_normal(vsh.n_full(4)))
    c.U[:] = 0
    g = synth(c, np.linspace(0.1, 3.0, 5), np.linspace(0, 6, 7))
    assert_allclose(g.samples[..., 0], 0.0, atol=0)
