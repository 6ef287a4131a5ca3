"""
Real vector spherical harmonics P_lm, B_lm, C_lm.

Vectors are given by their components in the local (r, theta, phi) frame.
Coefficient layout is degree-major with orders ascending from -l to l;
the U block starts at l = 0 and the V and W blocks at l = 1, concatenated
as [U; V; W].
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, PoleSingularityError, ResolutionError
from .specfun import xlm_dtheta_table, xlm_over_sin_table, xlm_table

POLE_EPS = 1e-7


# ---------------------------------------------------------------------------
# coefficient bookkeeping


def n_radial(L):
    return (L + 1) ** 2


def n_tangential(L):
    """Length of the V (or W) block."""
    return (L + 1) ** 2 - 1


def n_full(L):
    return 3 * (L + 1) ** 2 - 2


def lm_index(l, m, lmin=0):
    """Position of (l, m) inside a block starting at degree ``lmin``."""
    return l * l + l + m - lmin * lmin


def degrees_orders(L, lmin=0):
    """Arrays (l, m) in canonical block order."""
    ls = np.concatenate([np.full(2 * l + 1, l) for l in range(lmin, L + 1)]).astype(int)
    ms = np.concatenate([np.arange(-l, l + 1) for l in range(lmin, L + 1)]).astype(int)
    return ls, ms


@dataclass
class CoeffVector:
    """Vector spherical-harmonic coefficients of a field bandlimited to L."""

    L: int
    U: np.ndarray
    V: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=float)
        self.V = np.asarray(self.V, dtype=float)
        self.W = np.asarray(self.W, dtype=float)
        if self.U.shape != (n_radial(self.L),) or self.V.shape != (n_tangential(self.L),) \
                or self.W.shape != (n_tangential(self.L),):
            raise ValueError(f"coefficient blocks do not match bandlimit L={self.L}")

    @classmethod
    def zeros(cls, L):
        return cls(L, np.zeros(n_radial(L)), np.zeros(n_tangential(L)), np.zeros(n_tangential(L)))

    @classmethod
    def from_array(cls, L, arr):
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (n_full(L),):
            raise ValueError(f"expected {n_full(L)} coefficients, got {arr.shape}")
        nu, nt = n_radial(L), n_tangential(L)
        return cls(L, arr[:nu].copy(), arr[nu:nu + nt].copy(), arr[nu + nt:].copy())

    @classmethod
    def unit(cls, L, k):
        arr = np.zeros(n_full(L))
        arr[k] = 1.0
        return cls.from_array(L, arr)

    def to_array(self):
        return np.concatenate([self.U, self.V, self.W])

    def tangential(self):
        return np.concatenate([self.V, self.W])

    def norm(self):
        return float(np.linalg.norm(self.to_array()))

    def truncate(self, L):
        """Coefficients of degree <= L."""
        if L > self.L:
            raise ValueError("cannot truncate to a larger bandlimit")
        nu, nt = n_radial(L), n_tangential(L)
        return CoeffVector(L, self.U[:nu].copy(), self.V[:nt].copy(), self.W[:nt].copy())

    def pad(self, L):
        """Zero-extend to bandlimit L >= self.L."""
        if L < self.L:
            raise ValueError("cannot pad to a smaller bandlimit")
        out = CoeffVector.zeros(L)
        out.U[: self.U.size] = self.U
        out.V[: self.V.size] = self.V
        out.W[: self.W.size] = self.W
        return out

    def __add__(self, other):
        return CoeffVector.from_array(self.L, self.to_array() + other.to_array())

    def __sub__(self, other):
        return CoeffVector.from_array(self.L, self.to_array() - other.to_array())

    def __mul__(self, a):
        return CoeffVector.from_array(self.L, a * self.to_array())

    __rmul__ = __mul__


class TangentVector3(NamedTuple):
    r: float
    t: float
    p: float


@dataclass
class VectorGrid:
    """Field samples on a colatitude x longitude product grid, (r, t, p) last."""

    thetas: np.ndarray
    phis: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=float)
        self.phis = np.asarray(self.phis, dtype=float)
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape != (self.thetas.size, self.phis.size, 3):
            raise ValueError("samples must have shape (len(thetas), len(phis), 3)")

    def magnitude(self):
        return np.linalg.norm(self.samples, axis=-1)


# ---------------------------------------------------------------------------
# evaluation


def _profiles(L, theta):
    """
    Colatitude factors per canonical (l, m) column, shape (n_radial(L),) + theta.shape.

    Returns X_{l|m|}, X'_{l|m|} and |m| X_{l|m|} / sin(theta).
    """
    X = xlm_table(L, theta)
    dX = xlm_dtheta_table(L, theta, X)
    S = xlm_over_sin_table(L, theta, X)
    ls, ms = degrees_orders(L)
    am = np.abs(ms)
    return X[ls, am], dX[ls, am], S[ls, am]


def _azimuth(L, phi):
    """
    Azimuthal factors per column: ``az`` multiplies Y_lm's colatitude part and
    ``daz`` is d(az)/dphi / |m| (zero for m = 0).
    """
    phi = np.asarray(phi, dtype=float)
    _, ms = degrees_orders(L)
    am = np.abs(ms)
    shape = (ms.size,) + (1,) * phi.ndim
    ms_b = ms.reshape(shape)
    arg = np.abs(ms_b) * phi
    r2 = math.sqrt(2.0)
    az = np.where(ms_b > 0, r2 * np.sin(arg), np.where(ms_b < 0, r2 * np.cos(arg), 1.0))
    daz = np.where(ms_b > 0, r2 * np.cos(arg), np.where(ms_b < 0, -r2 * np.sin(arg), 0.0))
    return az, daz, am


def _inv_norm(L):
    ls, _ = degrees_orders(L)
    out = np.zeros(ls.size)
    out[ls > 0] = 1.0 / np.sqrt(ls[ls > 0] * (ls[ls > 0] + 1.0))
    return out


def basis_matrix(L, theta, phi, block="K", pole="raise"):
    """
    Harmonic values at scattered points.

    Parameters
    ----------
    L : int
        Bandlimit.
    theta, phi : array_like
        Point coordinates (broadcast together, flattened).
    block : {"P", "Q", "K"}
        Radial harmonics only, tangential (B then C) only, or all three.
    pole : {"raise", "clamp"}
        What to do with points exactly at a pole.

    Returns
    -------
    H : ndarray, shape (npoints, 3, ncoef)
        ``H[i, :, k]`` is the (r, t, p) vector of harmonic k at point i.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    theta = theta.ravel()
    phi = phi.ravel()
    if block != "P":
        at_pole = (theta == 0.0) | (theta == math.pi)
        if np.any(at_pole):
            if pole == "raise":
                raise PoleSingularityError(
                    "tangential harmonics with |m|=1 are singular at the poles")
            theta = np.clip(theta, POLE_EPS, math.pi - POLE_EPS)
    Xc, dXc, Sc = _profiles(L, theta)
    az, daz, _ = _azimuth(L, phi)
    npts = theta.size
    blocks = []
    if block in ("P", "K"):
        Hp = np.zeros((npts, 3, n_radial(L)))
        Hp[:, 0, :] = (Xc * az).T
        blocks.append(Hp)
    if block in ("Q", "K"):
        inv = _inv_norm(L)[1:, None]
        gt = (dXc[1:] * az[1:] * inv).T       # d_theta Y / sqrt(l(l+1))
        gp = (Sc[1:] * daz[1:] * inv).T       # (1/sin) d_phi Y / sqrt(l(l+1))
        nt = n_tangential(L)
        Hb = np.zeros((npts, 3, nt))
        Hb[:, 1, :] = gt
        Hb[:, 2, :] = gp
        Hc = np.zeros((npts, 3, nt))
        Hc[:, 1, :] = gp
        Hc[:, 2, :] = -gt
        blocks.extend([Hb, Hc])
    if not blocks:
        raise ValueError(f"unknown block {block!r}")
    return np.concatenate(blocks, axis=2)


def _eval_single(kind, l, m, theta, phi):
    if abs(m) > l or l < 0 or (kind != "P" and l < 1):
        raise DomainError(f"invalid degree/order (l={l}, m={m}) for {kind}")
    if not 0.0 <= theta <= math.pi:
        raise DomainError("theta must lie in [0, pi]")
    if kind != "P" and abs(m) == 1 and theta in (0.0, math.pi):
        raise PoleSingularityError(f"{kind}_{l},{m} is singular at the pole")
    if kind != "P" and theta in (0.0, math.pi):
        # every other tangential harmonic vanishes at the poles
        return TangentVector3(0.0, 0.0, 0.0)
    block = "P" if kind == "P" else "Q"
    H = basis_matrix(l, theta, phi, block=block)[0]
    k = lm_index(l, m, 0 if kind == "P" else 1)
    if kind == "C":
        k += n_tangential(l)
    return TangentVector3(*map(float, H[:, k]))


def eval_P(l, m, theta, phi):
    """Radial harmonic P_lm = r Y_lm at one point."""
    return _eval_single("P", l, m, theta, phi)


def eval_B(l, m, theta, phi):
    """Gradient harmonic B_lm = grad_1 Y_lm / sqrt(l(l+1)) at one point."""
    return _eval_single("B", l, m, theta, phi)


def eval_C(l, m, theta, phi):
    """Curl harmonic C_lm = -r x grad_1 Y_lm / sqrt(l(l+1)) at one point."""
    return _eval_single("C", l, m, theta, phi)


# ---------------------------------------------------------------------------
# synthesis / analysis


def evaluate(coeffs, theta, phi, pole="clamp"):
    """Field values (npoints, 3) of a coefficient vector at scattered points."""
    tang = np.any(coeffs.V != 0) or np.any(coeffs.W != 0)
    H = basis_matrix(coeffs.L, theta, phi, block="K" if tang else "P", pole=pole)
    x = coeffs.to_array() if tang else coeffs.U
    return H @ x


def synth(coeffs, thetas, phis):
    """
    Synthesize a field on the product grid ``thetas x phis``.

    Rows exactly at a pole are evaluated at a colatitude moved inward by
    1e-7 when any tangential |m| = 1 coefficient is nonzero; all other
    tangential harmonics vanish there.
    """
    L = coeffs.L
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    _, ms = degrees_orders(L)
    t_eval = thetas
    at_pole = (thetas == 0.0) | (thetas == math.pi)
    if np.any(at_pole):
        m1 = np.abs(ms[1:]) == 1
        if np.any(coeffs.V[m1] != 0) or np.any(coeffs.W[m1] != 0):
            t_eval = np.clip(thetas, POLE_EPS, math.pi - POLE_EPS)
    Xc, dXc, Sc = _profiles(L, t_eval)              # (ncoef, ntheta)
    az, daz, _ = _azimuth(L, phis)                  # (ncoef, nphi)
    inv = _inv_norm(L)
    V = np.concatenate([[0.0], coeffs.V]) * inv
    W = np.concatenate([[0.0], coeffs.W]) * inv
    out = np.zeros((thetas.size, phis.size, 3))
    out[..., 0] = (Xc.T * coeffs.U) @ az
    out[..., 1] = (dXc.T * V) @ az + (Sc.T * W) @ daz
    out[..., 2] = (Sc.T * V) @ daz - (dXc.T * W) @ az
    return VectorGrid(thetas, phis, out)


def analyze(grid, L):
    """
    Coefficients of a field sampled on a global Gauss product grid.

    The grid must have at least L+1 Gauss-Legendre colatitudes and 2L+1
    equispaced longitudes starting at 0, i.e. it must integrate products of
    two degree-L fields exactly; otherwise ResolutionError.
    """
    from .region import sphere_rule_for_grid

    rule = sphere_rule_for_grid(grid.thetas, grid.phis)
    if rule.exactness < L:
        raise ResolutionError(
            f"grid integrates degree {2 * rule.exactness} products, need {2 * L}")
    Xc, dXc, Sc = _profiles(L, grid.thetas)
    az, daz, _ = _azimuth(L, grid.phis)
    w_t = rule.theta_weights                       # includes the phi spacing
    f = grid.samples
    inv = _inv_norm(L)
    # integrate over phi first: (ntheta, nphi) @ (nphi, ncoef)
    fr_az = f[..., 0] @ az.T
    ft_az = f[..., 1] @ az.T
    ft_daz = f[..., 1] @ daz.T
    fp_az = f[..., 2] @ az.T
    fp_daz = f[..., 2] @ daz.T
    U = np.einsum("t,ct,tc->c", w_t, Xc, fr_az)
    Vf = np.einsum("t,ct,tc->c", w_t, dXc, ft_az) + np.einsum("t,ct,tc->c", w_t, Sc, fp_daz)
    Wf = np.einsum("t,ct,tc->c", w_t, Sc, ft_daz) - np.einsum("t,ct,tc->c", w_t, dXc, fp_az)
    return CoeffVector(L, U, (Vf * inv)[1:], (Wf * inv)[1:])
