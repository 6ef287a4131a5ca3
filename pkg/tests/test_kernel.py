import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from vecslep import vsh
from vecslep.errors import ContractViolation, DomainError, ResolutionError
from vecslep.kernel import (assemble_polarcap, assemble_polarcap_quadrature,
                            assemble_quadrature, clip_eigenvalues, read_kernel, write_kernel)
from vecslep.region import PolarCap, PolygonUnion, region_quadrature, sphere_quadrature

QUAD = [(10, -20), (50, -25), (45, 15), (5, 10)]


def test_full_sphere_identity():
    K = assemble_quadrature(PolarCap(math.pi), 5, "K")
    assert_allclose(K.entries, np.eye(vsh.n_full(5)), atol=1e-13)


def test_sizes():
    cap = PolarCap(0.5)
    assert assemble_quadrature(cap, 4, "P").n == 25
    assert assemble_quadrature(cap, 4, "Q").n == 48
    assert assemble_quadrature(cap, 4, "K").n == 73
    with pytest.raises(DomainError):
        assemble_quadrature(cap, 0, "Q")


def test_resolution_certificate():
    with pytest.raises(ResolutionError):
        assemble_quadrature(PolarCap(0.5), 8, "P", rule=sphere_quadrature(5))


@pytest.mark.parametrize("Theta", [0.05, 0.7, 2.0, 3.0])
def test_analytic_vs_colatitude_quadrature(Theta):
    L = 10
    a = assemble_polarcap(Theta, L)
    q = assemble_polarcap_quadrature(Theta, L)
    for blocks in ("P", "B", "D"):
        for x, y in zip(getattr(a, blocks), getattr(q, blocks)):
            assert_allclose(x, y, atol=1e-12)


def test_block_sizes():
    pk = assemble_polarcap(0.6, 6)
    for m in range(7):
        assert pk.P[m].shape == (7 - m,) * 2
        assert pk.Q[m].shape == (2 * (6 - max(m, 1) + 1),) * 2
    assert not np.any(pk.D[0])


def test_full_sphere_blocks():
    pk = assemble_polarcap(math.pi, 6)
    for m in range(7):
        assert_allclose(pk.P[m], np.eye(pk.P[m].shape[0]), atol=1e-13)
        assert_allclose(pk.B[m], np.eye(pk.B[m].shape[0]), atol=1e-13)
        assert_allclose(pk.D[m], 0, atol=1e-13)


def test_dense_expansion_matches_vector_quadrature():
    Theta, L = math.radians(40), 8
    K = assemble_quadrature(PolarCap(Theta), L, "K")
    assert_allclose(assemble_polarcap(Theta, L).dense("K").entries, K.entries, atol=1e-13)


def test_quadrature_structure():
    # C = B and D^T = -D for any region
    L = 5
    K = assemble_quadrature(PolygonUnion([QUAD]), L, "Q").entries
    n = vsh.n_tangential(L)
    B, D, C = K[:n, :n], K[:n, n:], K[n:, n:]
    assert_allclose(C, B, atol=1e-12)
    assert_allclose(D, -D.T, atol=1e-12)
    assert_allclose(K, K.T, atol=0)


def test_k_block_diagonal():
    L = 4
    R = PolygonUnion([QUAD])
    K = assemble_quadrature(R, L, "K").entries
    nu = vsh.n_radial(L)
    assert_allclose(K[:nu, nu:], 0, atol=1e-13)
    assert_allclose(K[:nu, :nu], assemble_quadrature(R, L, "P").entries, atol=1e-14)


def test_block_spectrum_equivalence():
    Theta, L = 0.9, 7
    pk = assemble_polarcap(Theta, L)
    dense = np.sort(np.linalg.eigvalsh(pk.dense("Q").entries))
    blocks = list(np.linalg.eigvalsh(pk.Q[0]))
    for m in range(1, L + 1):
        blocks += 2 * list(np.linalg.eigvalsh(pk.Q[m]))
    assert_allclose(np.sort(blocks), dense, atol=1e-12)


def test_spectrum_in_unit_interval():
    lam = np.linalg.eigvalsh(assemble_quadrature(PolygonUnion([QUAD]), 6, "K").entries)
    assert lam.min() > -1e-10 and lam.max() < 1 + 1e-10


def test_mask_path_elementwise():
    # indicator-weighted global rule against the analytic kernel; boundary-limited
    Theta, L = math.radians(40), 18
    cap = PolarCap(Theta)
    K = assemble_quadrature(cap, L, "K", rule=region_quadrature(cap, L, fitted=False))
    err = np.abs(K.entries - assemble_polarcap(Theta, L).dense("K").entries).max()
    assert err < 2e-3


def test_clip_policy():
    assert_allclose(clip_eigenvalues([-5e-11, 0.5, 1 + 5e-11]), [0, 0.5, 1])
    with pytest.raises(ContractViolation):
        clip_eigenvalues([-1e-8, 0.5])


def test_kernel_dump_roundtrip(tmp_path):
    pk = assemble_polarcap(0.5, 3)
    write_kernel(tmp_path / "k.txt", pk.blocks())
    back = read_kernel(tmp_path / "k.txt")
    assert [b.kind for b in back] == [b.kind for b in pk.blocks()]
    for a, b in zip(pk.blocks(), back):
        assert_allclose(a.entries, b.entries, rtol=0, atol=0)
        assert a.m == b.m
    write_kernel(tmp_path / "k2.txt", back)
    assert (tmp_path / "k.txt").read_text() == (tmp_path / "k2.txt").read_text()
