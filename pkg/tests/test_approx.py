import numpy as np
import pytest
from numpy.testing import assert_allclose

from vecslep import vsh
from vecslep.approx import error_bias, project, reconstruct, regional_norms, sweep
from vecslep.errors import DomainError
from vecslep.region import PolarCap
from vecslep.spectral import embed
from vecslep.vsh import CoeffVector

from conftest import THETA40


@pytest.fixture(scope="module")
def field(cap40):
    # tangential field concentrated in the cap: Q applied to a random vector
    Q = cap40.dense("Q").entries
    x = Q @ np.random.default_rng(11).standard_normal(Q.shape[0])
    return embed(x, "tangential", 18)


def test_project_unit(cap40_tangential):
    b = cap40_tangential
    ua = project(b.coeffs(2), b)
    e = np.zeros(len(b))
    e[2] = 1
    assert_allclose(ua, e, atol=1e-12)
    assert_allclose(project(CoeffVector.zeros(18), b), 0)


def test_parseval(cap40_tangential, field):
    ua = project(field, cap40_tangential)
    assert_allclose((ua**2).sum(), field.norm() ** 2, rtol=1e-10)


def test_reconstruct_complete(cap40_tangential, field):
    v = reconstruct(field, cap40_tangential, 720)
    assert_allclose(v.to_array(), field.to_array(), atol=1e-10)
    with pytest.raises(DomainError):
        reconstruct(field, cap40_tangential, 0)
    with pytest.raises(DomainError):
        reconstruct(field, cap40_tangential, 721)


def test_reconstruct_first_term(cap40_tangential, field):
    b = cap40_tangential
    v = reconstruct(field, b, 1)
    assert_allclose(v.to_array(), project(field, b)[0] * b.coeffs(0).to_array())


def test_error_bias_limits(cap40, field):
    Q = cap40.dense("Q")
    # v = u: no regional error, and the leakage ratio is u's own, i.e. 1
    eps, b = error_bias(field, field, Q)
    assert eps == 0.0
    assert_allclose(b, 1.0, rtol=1e-12)
    eps, b = error_bias(field, CoeffVector.zeros(18), Q)
    assert_allclose([eps, b], [1.0, 0.0])


def test_complement_identity(cap40, field):
    K = cap40.dense("K")
    rng = np.random.default_rng(4)
    x = CoeffVector.from_array(18, rng.standard_normal(vsh.n_full(18)))
    a, b = regional_norms(x, K)
    assert_allclose(a + b, x.norm() ** 2, rtol=1e-12)


def test_error_bias_with_region(field):
    v = CoeffVector.zeros(18)
    eps, b = error_bias(field, v, PolarCap(THETA40))
    assert_allclose([eps, b], [1.0, 0.0])


def test_kernel_kind_mismatch(cap40):
    x = CoeffVector.zeros(18)
    x.U[0] = 1
    with pytest.raises(DomainError):
        error_bias(x, x, cap40.dense("Q"))


def test_sweep_monotone_global_error(cap40, cap40_tangential, field):
    Js = [1, 10, 42, 84, 126, 300, 720]
    reps = sweep(field, cap40_tangential, cap40.dense("Q"), Js)
    assert [r.J for r in reps] == Js
    glob = [np.linalg.norm(field.to_array()
                           - reconstruct(field, cap40_tangential, J).to_array()) for J in Js]
    assert np.all(np.diff(glob) <= 1e-12)
    assert reps[-1].epsilon < 1e-8
