"""
Expansion of bandlimited vector fields in a Slepian basis, truncation, and
the regional error / external leakage of the truncated reconstruction.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .kernel import KernelMatrix, PolarCapKernel, assemble_quadrature
from .region import Region
from .spectral import embed, restrict


@dataclass
class ReconstructionReport:
    J: int
    epsilon: float
    bias: float
    coefficients: np.ndarray


def _check_L(u, basis):
    if u.L != basis.L:
        raise DomainError(f"field bandlimit {u.L} differs from basis bandlimit {basis.L}")


def project(u, basis):
    """Slepian coefficients u_alpha = g_alpha^T u."""
    _check_L(u, basis)
    if basis.m is not None:
        raise DomainError("merge fixed-order bases before projecting")
    return basis.vectors.T @ restrict(u, basis.kind)


def reconstruct(u, basis, J, u_alpha=None):
    """Truncated expansion v_J = sum_{alpha <= J} u_alpha g_alpha."""
    _check_L(u, basis)
    if not 1 <= J <= len(basis):
        raise DomainError(f"J must lie in [1, {len(basis)}]")
    if u_alpha is None:
        u_alpha = project(u, basis)
    x = basis.vectors[:, :J] @ u_alpha[:J]
    return embed(x, basis.kind, basis.L)


def region_kernel(region, L, kind="full"):
    """The K (or Q, P) matrix of a region, as used for regional norms."""
    which = {"full": "K", "tangential": "Q", "radial": "P"}[kind]
    from .region import PolarCap

    if isinstance(region, PolarCap):
        from .kernel import assemble_polarcap

        return assemble_polarcap(region.Theta, L).dense(which)
    return assemble_quadrature(region, L, which)


def _as_matrix(kernel, L):
    if isinstance(kernel, PolarCapKernel):
        kernel = kernel.dense("K")
    if not isinstance(kernel, KernelMatrix):
        raise TypeError("expected a KernelMatrix, PolarCapKernel or Region")
    if kernel.L != L:
        raise DomainError("kernel bandlimit differs from field bandlimit")
    return kernel


def _split_norms(x, K):
    """(||x||_R^2, ||x||_{Omega\\R}^2) via x^T K x and x^T (I - K) x."""
    inside = float(x @ K @ x)
    total = float(x @ x)
    return inside, total - inside


def _vector_for(c, block):
    if block == "P":
        return c.U
    if block == "Q":
        if np.any(c.U != 0):
            raise DomainError("Q kernel given but the field has a radial part")
        return c.tangential()
    return c.to_array()


def regional_norms(c, kernel):
    """Squared norms of a field inside and outside the region."""
    K = _as_matrix(kernel, c.L)
    return _split_norms(_vector_for(c, K.block), K.entries)


def error_bias(u, v, kernel):
    """
    Relative regional error and external leakage of an approximation.

    epsilon = sqrt(||u - v||_R^2 / ||u||_R^2) and
    b = sqrt(||v||_{Omega\\R}^2 / ||u||_{Omega\\R}^2), with all norms taken in
    coefficient space with the region's kernel matrix. ``kernel`` may be a
    KernelMatrix (K, or Q for tangential fields, or P for radial ones), a
    PolarCapKernel, or a Region (assembled on the fly).
    """
    if u.L != v.L:
        raise DomainError("u and v must share a bandlimit")
    if isinstance(kernel, Region):
        tang = not np.any(u.U != 0) and not np.any(v.U != 0)
        kernel = region_kernel(kernel, u.L, "tangential" if tang else "full")
    K = _as_matrix(kernel, u.L)
    uu = _vector_for(u, K.block)
    vv = _vector_for(v, K.block)
    u_in, u_out = _split_norms(uu, K.entries)
    d_in, _ = _split_norms(uu - vv, K.entries)
    _, v_out = _split_norms(vv, K.entries)
    if u_in <= 0.0:
        raise DomainError("u has no energy inside the region")
    if u_out <= 0.0:
        raise DomainError("u has no energy outside the region")
    return math.sqrt(max(d_in, 0.0) / u_in), math.sqrt(max(v_out, 0.0) / u_out)


def sweep(u, basis, kernel, Js):
    """ReconstructionReport for each truncation level in ``Js``."""
    if isinstance(kernel, Region):
        kernel = region_kernel(kernel, u.L, basis.kind)
    ua = project(u, basis)
    out = []
    for J in Js:
        v = reconstruct(u, basis, int(J), ua)
        eps, b = error_bias(u, v, kernel)
        out.append(ReconstructionReport(int(J), eps, b, ua[:int(J)].copy()))
    return out
