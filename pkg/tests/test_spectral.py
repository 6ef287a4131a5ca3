import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from vecslep import vsh
from vecslep.errors import DomainError
from vecslep.kernel import KernelMatrix, assemble_polarcap, assemble_quadrature
from vecslep.region import PolarCap, PolygonUnion, cap_quadrature
from vecslep.spectral import (merge_fixed_order, mercer_sum, polarcap_basis, shannon,
                              shannon_formula, solve, solve_polarcap, spacelimit,
                              tangential_partner, weighted_energy)
from vecslep.vsh import CoeffVector, evaluate

from conftest import THETA40


def test_toy_two_by_two():
    b = solve(KernelMatrix("P", 0, [[0.7, 0.1], [0.1, 0.3]]))
    r = math.sqrt((0.7 - 0.3) ** 2 / 4 + 0.1**2)
    assert_allclose(b.lambdas, [0.5 + r, 0.5 - r], rtol=1e-14)
    assert_allclose(b.lambdas, [0.7236067977499790, 0.2763932022500210], rtol=1e-14)
    assert b.vectors[0, 0] > 0


def test_identity_spectrum():
    b = solve(KernelMatrix("K", 2, np.eye(vsh.n_full(2))))
    assert_allclose(b.lambdas, 1.0)


def test_sign_convention():
    pk = assemble_polarcap(0.5, 6)
    b = solve(pk.dense("P"))
    for k in range(len(b)):
        v = b.vectors[:, k]
        assert v[np.flatnonzero(np.abs(v) > 1e-9)[0]] > 0


def test_cap40_step_shape(cap40_tangential):
    lam = cap40_tangential.lambdas
    assert len(lam) == 720
    assert 0.9 < lam[0] < 1.0 + 1e-15
    assert abs(int((lam > 0.5).sum()) - 84) <= 1
    assert np.all(np.diff(lam) <= 0)


def test_even_multiplicity(cap40_tangential):
    lam = cap40_tangential.lambdas
    assert_allclose(lam[0::2], lam[1::2], atol=1e-9)


def test_merged_vs_dense(cap40, cap40_tangential):
    dense = solve(cap40.dense("Q"))
    assert_allclose(cap40_tangential.lambdas, dense.lambdas, atol=1e-10)
    V = cap40_tangential.vectors
    Q = cap40.dense("Q").entries
    assert_allclose(V.T @ V, np.eye(720), atol=1e-10)
    assert_allclose(V.T @ Q @ V, np.diag(cap40_tangential.lambdas), atol=1e-10)


def test_merge_rejects_mixed_bandlimits():
    a = solve_polarcap(assemble_polarcap(0.5, 3), "radial")
    b = solve_polarcap(assemble_polarcap(0.5, 4), "radial")
    with pytest.raises(DomainError):
        merge_fixed_order(a[:1] + b[1:2])


def test_exclusion_duality(cap40_radial):
    # energy outside the cap equals 1 - lambda, by quadrature over the complement
    Theta = THETA40
    south = cap_quadrature(math.pi - Theta, 18)
    for k in (0, 5, 30):
        g = cap40_radial.coeffs(k)
        f = evaluate(g, math.pi - south.theta, south.phi)
        out = south.integrate((f**2).sum(axis=1))
        assert_allclose(out, 1 - cap40_radial.lambdas[k], atol=1e-10)


def test_shannon_reports(cap40):
    rep = shannon(cap40)
    assert_allclose(rep.N_total, rep.N_radial + rep.N_tangential, atol=1e-12)
    pred = shannon_formula(PolarCap(THETA40).area(), 18)
    assert_allclose([rep.N_radial, rep.N_tangential], [pred.N_radial, pred.N_tangential],
                    rtol=1e-12)
    assert rep.partial_tangential.size == 19
    assert_allclose(shannon(cap40.dense("K")).N_total, rep.N_total, rtol=1e-12)


def test_shannon_full_sphere():
    rep = shannon(assemble_polarcap(math.pi, 18))
    assert_allclose(rep.N_total, 1081, atol=1e-9)


def test_shannon_published_fractions():
    assert round(shannon_formula(0.0581 * 4 * math.pi, 18).N_tangential) == 42
    assert round(shannon_formula(0.2792 * 4 * math.pi, 18).N_total) == 302


def test_partner_twice_is_negation():
    rng = np.random.default_rng(0)
    g = CoeffVector.from_array(4, rng.standard_normal(vsh.n_full(4)))
    g.U[:] = 0
    assert_allclose(tangential_partner(tangential_partner(g)).to_array(), -g.to_array())
    g.U[0] = 1
    with pytest.raises(DomainError):
        tangential_partner(g)


def test_partner_pointwise(cap40_tangential):
    rng = np.random.default_rng(2)
    th = rng.uniform(0.05, 3.0, 20)
    ph = rng.uniform(0, 2 * math.pi, 20)
    for k in (0, 3, 17):
        g = cap40_tangential.coeffs(k)
        a = evaluate(g, th, ph)
        b = evaluate(tangential_partner(g), th, ph)
        assert_allclose(np.linalg.norm(a, axis=1), np.linalg.norm(b, axis=1), atol=1e-10)
        assert_allclose((a * b).sum(axis=1), 0, atol=1e-10)


def test_spacelimit_full_sphere():
    rng = np.random.default_rng(1)
    g = CoeffVector.from_array(5, rng.standard_normal(vsh.n_full(5)))
    h = spacelimit(g, PolarCap(math.pi), 5)
    assert_allclose(h.to_array(), g.to_array(), atol=1e-12)
    with pytest.raises(DomainError):
        spacelimit(g, PolarCap(1.0), 4)


def test_spacelimit_spectral_concentration(cap40_tangential):
    g = cap40_tangential.coeffs(0)
    lam = cap40_tangential.lambdas[0]
    prev = None
    for Lout in (18, 30, 48):
        h = spacelimit(g, PolarCap(THETA40), Lout)
        e = h.to_array()
        ratio = (h.truncate(18).to_array() ** 2).sum() / (e**2).sum()
        assert ratio >= lam - 1e-12
        if prev is not None:
            assert ratio <= prev + 1e-12
        prev = ratio


def test_mercer_polygon():
    R = PolygonUnion([[(10, -20), (50, -25), (45, 15), (5, 10)]])
    b = solve(assemble_quadrature(R, 4, "K"))
    s = mercer_sum(b, np.array([0.3, 2.0]), np.array([1.0, 4.0]))
    assert_allclose(s, (3 * 25 - 2) / (4 * math.pi), rtol=1e-12)


def test_mercer_requires_complete(cap40_tangential):
    from vecslep.spectral import SlepianBasis

    b = cap40_tangential
    part = SlepianBasis(b.L, b.kind, b.vectors[:, :10], b.lambdas[:10])
    with pytest.raises(DomainError):
        mercer_sum(part, 0.3, 0.3)


def test_weighted_energy():
    b = polarcap_basis(THETA40, 18, "full")
    NA = shannon(b).N_total / PolarCap(THETA40).area()
    assert abs(weighted_energy(b, math.radians(5), 0.4) / NA - 1) < 0.15
    assert weighted_energy(b, math.radians(150), 0.4) < 0.05 * NA
