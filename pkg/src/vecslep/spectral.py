"""
Concentration eigenproblems, Slepian bases, Shannon numbers and derived sums.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import vsh
from .errors import ContractViolation, DomainError
from .kernel import KernelMatrix, PolarCapKernel, clip_eigenvalues
from .region import PolarCap, region_quadrature
from .vsh import CoeffVector

SIGN_TOL = 1e-9
TIE_TOL = 1e-10

KIND_OF_BLOCK = {"P": "radial", "Q": "tangential", "K": "full"}


def basis_dim(kind, L):
    return {"radial": vsh.n_radial(L), "tangential": 2 * vsh.n_tangential(L),
            "full": vsh.n_full(L)}[kind]


@dataclass
class SlepianBasis:
    """
    Eigenvectors of a localization kernel.

    ``vectors[:, alpha]`` is eigenvector alpha in the coefficient space of
    ``kind``: U for "radial", [V; W] for "tangential", [U; V; W] for "full".
    Fixed-order bases (``m`` set) live in the local space of one block.
    ``orders`` tags each column with its signed order when known.
    """

    L: int
    kind: str
    vectors: np.ndarray
    lambdas: np.ndarray
    region: str = ""
    orders: np.ndarray = None
    m: int = None

    def __len__(self):
        return self.lambdas.size

    @property
    def dim(self):
        return self.vectors.shape[0]

    def is_complete(self):
        return len(self) == self.dim

    def coeffs(self, alpha):
        """Column alpha (0-based) as a full CoeffVector."""
        if self.m is not None:
            raise DomainError("fixed-order basis; merge it before extracting fields")
        return embed(self.vectors[:, alpha], self.kind, self.L)

    def full_vectors(self):
        """Columns embedded in the full [U; V; W] space."""
        if self.kind == "full":
            return self.vectors
        out = np.zeros((vsh.n_full(self.L), len(self)))
        off = 0 if self.kind == "radial" else vsh.n_radial(self.L)
        out[off:off + self.dim] = self.vectors
        return out

    def evaluate(self, theta, phi, J=None):
        """Field values, shape (npoints, 3, ncols), of the first J columns."""
        block = {"radial": "P", "tangential": "Q", "full": "K"}[self.kind]
        H = vsh.basis_matrix(self.L, theta, phi, block=block, pole="clamp")
        return H @ self.vectors[:, :J]


def embed(x, kind, L):
    """Place a radial, tangential or full coefficient array into a CoeffVector."""
    x = np.asarray(x, dtype=float)
    nu, nt = vsh.n_radial(L), vsh.n_tangential(L)
    if x.size != basis_dim(kind, L):
        raise ValueError(f"{kind} vector of length {x.size} does not match L={L}")
    if kind == "radial":
        return CoeffVector(L, x, np.zeros(nt), np.zeros(nt))
    if kind == "tangential":
        return CoeffVector(L, np.zeros(nu), x[:nt], x[nt:])
    return CoeffVector.from_array(L, x)


def restrict(c, kind):
    """Inverse of ``embed``: the part of a CoeffVector used by ``kind``."""
    if kind == "radial":
        return c.U.copy()
    if kind == "tangential":
        return c.tangential()
    return c.to_array()


def _fix_signs(V):
    for k in range(V.shape[1]):
        nz = np.flatnonzero(np.abs(V[:, k]) > SIGN_TOL)
        if nz.size and V[nz[0], k] < 0:
            V[:, k] = -V[:, k]
    return V


def _order_ties(lam, V, extra=None):
    """Within groups of equal eigenvalues sort columns lexicographically, largest first."""
    idx = np.arange(lam.size)
    start = 0
    while start < lam.size:
        stop = start + 1
        while stop < lam.size and lam[start] - lam[stop] < TIE_TOL:
            stop += 1
        if stop - start > 1:
            grp = list(range(start, stop))
            grp.sort(key=lambda k: tuple(-np.round(V[:, k], 12)))
            idx[start:stop] = grp
        start = stop
    return idx


def _eigh_sorted(M):
    M = 0.5 * (M + M.T)
    try:
        lam, V = scipy.linalg.eigh(M)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ContractViolation(f"eigensolver failed: {exc}") from exc
    lam = clip_eigenvalues(lam)
    order = np.argsort(-lam, kind="stable")
    lam, V = lam[order], _fix_signs(V[:, order].copy())
    idx = _order_ties(lam, V)
    return lam[idx], V[:, idx]


def solve(kernel):
    """
    Full symmetric eigendecomposition of a localization kernel.

    Eigenvalues are checked to lie in [-1e-10, 1+1e-10], clipped to [0, 1]
    and sorted nonincreasing. Each eigenvector is signed so its first entry
    above 1e-9 in magnitude is positive, and columns sharing an eigenvalue
    are ordered lexicographically.
    """
    lam, V = _eigh_sorted(kernel.entries)
    kind = KIND_OF_BLOCK[kernel.block]
    orders = None if kernel.m is None else np.full(lam.size, kernel.m)
    return SlepianBasis(kernel.L, kind, V, lam, kernel.region, orders, kernel.m)


def solve_polarcap(pk, kind="tangential"):
    """
    Solve every order block of a polar-cap kernel.

    Returns a list of (m, SlepianBasis) for m = 0..L. For the tangential
    m = 0 block, whose two halves decouple, each eigenvector x of B_0 yields
    the doublet (x, 0), (0, x).
    """
    out = []
    for m in range(pk.L + 1):
        if kind == "radial":
            lam, V = _eigh_sorted(pk.P[m])
        elif kind == "tangential":
            if m == 0:
                lb, Vb = _eigh_sorted(pk.B[0])
                n = lb.size
                V = np.zeros((2 * n, 2 * n))
                V[:n, 0::2] = Vb
                V[n:, 1::2] = Vb
                lam = np.repeat(lb, 2)
            else:
                lam, V = _eigh_sorted(pk.Q[m])
        else:
            raise ValueError("kind must be 'radial' or 'tangential'")
        out.append((m, SlepianBasis(pk.L, kind, V, lam, pk.region, np.full(lam.size, m), m)))
    return out


def merge_fixed_order(blocks):
    """
    Combine fixed-order solutions into one globally sorted basis.

    Each order-m eigenvector is placed into the full coefficient space of its
    kind. For m > 0 a second copy is made for order -m: radial vectors are
    copied to U_{l,-m}; a tangential eigenvector (x, y) of Q_m on
    (V_{l,m}, W_{l,-m}) gives the order -m eigenvector (-y, x) on
    (V_{l,-m}, W_{l,m}).
    """
    if not blocks:
        raise ValueError("no blocks to merge")
    Ls = {b.L for _, b in blocks}
    kinds = {b.kind for _, b in blocks}
    if len(Ls) != 1:
        raise DomainError("inconsistent bandlimits among blocks")
    if len(kinds) != 1:
        raise DomainError("cannot merge radial and tangential blocks; use combine()")
    L, kind = Ls.pop(), kinds.pop()
    dim = basis_dim(kind, L)
    nt = vsh.n_tangential(L)
    cols, lams, orders = [], [], []
    for m, b in sorted(blocks, key=lambda t: t[0]):
        if kind == "radial":
            ls = np.arange(m, L + 1)
            for sm in ((m, -m) if m else (0,)):
                V = np.zeros((dim, len(b)))
                V[vsh.lm_index(ls, sm)] = b.vectors
                cols.append(V)
                lams.append(b.lambdas)
                orders.append(np.full(len(b), sm))
        else:
            ls = np.arange(max(m, 1), L + 1)
            if ls.size == 0:
                continue
            k = ls.size
            x, y = b.vectors[:k], b.vectors[k:]
            V = np.zeros((dim, len(b)))
            V[vsh.lm_index(ls, m, 1)] = x
            V[nt + vsh.lm_index(ls, -m, 1)] = y
            cols.append(V)
            lams.append(b.lambdas)
            orders.append(np.full(len(b), m))
            if m:
                V = np.zeros((dim, len(b)))
                V[vsh.lm_index(ls, -m, 1)] = -y
                V[nt + vsh.lm_index(ls, m, 1)] = x
                cols.append(V)
                lams.append(b.lambdas)
                orders.append(np.full(len(b), -m))
    V = np.concatenate(cols, axis=1)
    lam = np.concatenate(lams)
    orders = np.concatenate(orders)
    order = np.argsort(-lam, kind="stable")
    region = blocks[0][1].region
    return SlepianBasis(L, kind, V[:, order], lam[order], region, orders[order])


def combine(radial, tangential):
    """Full basis from a radial and a tangential basis of the same region and L."""
    if radial.L != tangential.L:
        raise DomainError("inconsistent bandlimits")
    if radial.kind != "radial" or tangential.kind != "tangential":
        raise DomainError("expected one radial and one tangential basis")
    V = np.concatenate([radial.full_vectors(), tangential.full_vectors()], axis=1)
    lam = np.concatenate([radial.lambdas, tangential.lambdas])
    orders = None
    if radial.orders is not None and tangential.orders is not None:
        orders = np.concatenate([radial.orders, tangential.orders])
    order = np.argsort(-lam, kind="stable")
    return SlepianBasis(radial.L, "full", V[:, order], lam[order], radial.region,
                        None if orders is None else orders[order])


def polarcap_basis(Theta, L, kind="tangential", pk=None):
    """Merged polar-cap basis of the given kind ("radial", "tangential" or "full")."""
    from .kernel import assemble_polarcap

    if pk is None:
        pk = assemble_polarcap(Theta, L)
    if kind == "full":
        return combine(merge_fixed_order(solve_polarcap(pk, "radial")),
                       merge_fixed_order(solve_polarcap(pk, "tangential")))
    return merge_fixed_order(solve_polarcap(pk, kind))


# ---------------------------------------------------------------------------
# Shannon numbers


@dataclass
class ShannonReport:
    """Shannon numbers; per-order partials are filled in for polar caps only."""

    N_total: float
    N_radial: float
    N_tangential: float
    partial_radial: np.ndarray = field(default=None, repr=False)
    partial_tangential: np.ndarray = field(default=None, repr=False)

    @property
    def rounded(self):
        return round(self.N_total), round(self.N_radial), round(self.N_tangential)


def shannon_formula(area, L):
    """Shannon numbers (N, N^r, N^t) predicted from the region area alone."""
    f = area / (4.0 * math.pi)
    Nr = (L + 1) ** 2 * f
    Nt = (2 * (L + 1) ** 2 - 2) * f
    return ShannonReport(Nr + Nt, Nr, Nt)


def shannon(obj):
    """
    Shannon numbers from a kernel (traces), a polar-cap kernel (with
    per-order partials N^r_m = sum_l P^m_ll and N^t_m = 2 sum_l B^m_ll)
    or a basis (sum of eigenvalues).
    """
    if isinstance(obj, PolarCapKernel):
        Nr, Nt = obj.shannon()
        pr, pt = obj.partial_traces()
        return ShannonReport(Nr + Nt, Nr, Nt, pr, pt)
    if isinstance(obj, KernelMatrix):
        L = obj.L
        d = np.diag(obj.entries)
        if obj.block == "P":
            return ShannonReport(d.sum(), d.sum(), 0.0)
        if obj.block == "Q":
            return ShannonReport(d.sum(), 0.0, d.sum())
        nu = vsh.n_radial(L)
        return ShannonReport(d.sum(), d[:nu].sum(), d[nu:].sum())
    if isinstance(obj, SlepianBasis):
        s = float(obj.lambdas.sum())
        if obj.kind == "radial":
            return ShannonReport(s, s, 0.0)
        if obj.kind == "tangential":
            return ShannonReport(s, 0.0, s)
        V = obj.vectors
        nu = vsh.n_radial(obj.L)
        # split each eigenvalue by the share of its vector in each block
        wr = (V[:nu] ** 2).sum(axis=0)
        Nr = float(obj.lambdas @ wr)
        return ShannonReport(s, Nr, s - Nr)
    raise TypeError(f"cannot compute Shannon numbers of {type(obj).__name__}")


# ---------------------------------------------------------------------------
# derived operations


def tangential_partner(g):
    """Rotate a tangential field by 90 degrees pointwise: (V, W) -> (-W, V)."""
    if np.any(g.U != 0):
        raise DomainError("tangential_partner needs a field with zero radial block")
    return CoeffVector(g.L, g.U.copy(), -g.W, g.V.copy())


def spacelimit(g, region, L_out, oversample=None):
    """
    Coefficients up to degree L_out of the field g restricted to ``region``.

    Computed by quadrature of g times the indicator of the region against
    every harmonic of degree <= L_out. For degrees <= L the result of an
    eigenfield equals lambda * g.
    """
    if L_out < g.L:
        raise DomainError("L_out must be at least the bandlimit of g")
    if oversample is None:
        oversample = 1 if isinstance(region, PolarCap) else 4
    # products of degree L and L_out fields need exactness (L + L_out) / 2
    Lq = (g.L + L_out + 1) // 2
    rule = region_quadrature(region, Lq, oversample)
    gg = g.pad(L_out)
    out = np.zeros(vsh.n_full(L_out))
    tang = np.any(g.V != 0) or np.any(g.W != 0)
    for s in range(0, len(rule), 2048):
        sl = slice(s, s + 2048)
        H = vsh.basis_matrix(L_out, rule.theta[sl], rule.phi[sl], "K", pole="clamp")
        f = H @ gg.to_array() if tang else H[..., : vsh.n_radial(L_out)] @ gg.U
        out += np.einsum("i,ia,iak->k", rule.weights[sl], f, H)
    return CoeffVector.from_array(L_out, out)


def _point_values(basis, theta, phi, J=None):
    theta = np.atleast_1d(np.asarray(theta, float))
    phi = np.atleast_1d(np.asarray(phi, float))
    if np.any((theta == 0.0) | (theta == math.pi)) and basis.kind != "radial":
        from .errors import PoleSingularityError

        raise PoleSingularityError("point sums are not defined at the poles")
    G = basis.evaluate(theta, phi, J)             # (npts, 3, ncols)
    return (G ** 2).sum(axis=1)                    # (npts, ncols)


def mercer_sum(basis, theta, phi):
    """
    Sum over all basis fields of |g_alpha|^2 at the given point(s).

    For a complete basis this equals dim / (4 pi), i.e.
    [3(L+1)^2 - 2] / (4 pi) for a full basis.
    """
    if not basis.is_complete():
        raise DomainError("mercer_sum needs a complete basis")
    s = _point_values(basis, theta, phi).sum(axis=1)
    return float(s[0]) if np.ndim(theta) == 0 else s


def weighted_energy(basis, theta, phi, J=None):
    """Sum of lambda_alpha |g_alpha|^2 over the first J fields (all by default)."""
    s = _point_values(basis, theta, phi, J) @ basis.lambdas[:J]
    return float(s[0]) if np.ndim(theta) == 0 else s
