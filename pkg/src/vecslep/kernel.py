"""
Localization matrices P, Q = [[B, D], [D^T, C]] and K = diag(P, Q).

Arbitrary regions are handled by quadrature. Polar caps decouple by order
and are assembled per order, either analytically (Gaunt expansion plus cap
integrals) or by a boundary-fitted quadrature in colatitude only.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import vsh
from .errors import ContractViolation, DomainError, FormatError, ResolutionError
from .region import PolarCap, region_quadrature
from .specfun import (gaunt_vector, paul_table, xlm_dtheta_table, xlm_over_sin_table,
                      xlm_table)

CHUNK = 2048


@dataclass
class KernelMatrix:
    """
    Dense symmetric localization matrix.

    ``kind`` is "P", "Q" or "K" for full matrices, or "P_m"/"Q_m" style
    fixed-order blocks, in which case ``m`` is set. ``region`` is the
    fingerprint of the region the matrix was built for.
    """

    kind: str
    L: int
    entries: np.ndarray
    region: str = ""
    m: int = None

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        n = self.entries.shape
        if len(n) != 2 or n[0] != n[1]:
            raise ValueError("kernel entries must be a square matrix")

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def block(self):
        """"P", "Q" or "K" regardless of fixed-order tagging."""
        return self.kind[0]

    def trace(self):
        return float(np.trace(self.entries))

    def asymmetry(self):
        return float(np.abs(self.entries - self.entries.T).max()) if self.n else 0.0


def expected_size(which, L):
    return {"P": vsh.n_radial(L), "Q": 2 * vsh.n_tangential(L), "K": vsh.n_full(L)}[which]


# ---------------------------------------------------------------------------
# quadrature assembly


def assemble_quadrature(region, L, which="K", oversample=None, rule=None):
    """
    Localization matrix by quadrature over ``region``.

    Parameters
    ----------
    region : Region
    L : int
        Bandlimit.
    which : {"P", "Q", "K"}
    oversample : int, optional
        Oversampling of the region rule. Defaults to 1 for polar caps, whose
        boundary-fitted rule is already exact, and 4 otherwise.
    rule : QuadratureRule, optional
        Use this rule instead of ``region_quadrature``.

    Returns
    -------
    KernelMatrix
        Symmetrized as (M + M^T) / 2.
    """
    if which not in ("P", "Q", "K"):
        raise ValueError(f"unknown kernel kind {which!r}")
    if L < 0 or (which == "Q" and L < 1):
        raise DomainError("bandlimit too small for this kernel")
    if rule is None:
        if oversample is None:
            oversample = 1 if isinstance(region, PolarCap) else 4
        rule = region_quadrature(region, L, oversample)
        if rule.exactness >= 0 and rule.exactness < L:
            raise ResolutionError("quadrature rule is too coarse for the bandlimit")
    elif 0 <= rule.exactness < L:
        raise ResolutionError(
            f"rule is exact to degree {rule.exactness}, bandlimit is {L}")
    n = expected_size(which, L)
    M = np.zeros((n, n))
    for s in range(0, len(rule), CHUNK):
        sl = slice(s, s + CHUNK)
        H = vsh.basis_matrix(L, rule.theta[sl], rule.phi[sl], block=which, pole="clamp")
        Hw = H * rule.weights[sl, None, None]
        M += np.einsum("iak,ial->kl", Hw, H, optimize=True)
    M = 0.5 * (M + M.T)
    return KernelMatrix(which, L, M, region.fingerprint)


# ---------------------------------------------------------------------------
# polar caps, per order


@dataclass
class PolarCapKernel:
    """
    Per-order blocks of the polar-cap kernel for orders m = 0..L.

    ``P[m]`` acts on U_{l,m} (l = m..L). ``B[m]`` and ``D[m]`` act on
    degrees l = max(m,1)..L; ``Q[m] = [[B, D], [D, B]]`` acts on the stacked
    pair (V_{l,m}, W_{l,-m}), and the order -m block acting on
    (V_{l,-m}, W_{l,m}) is the same with D replaced by -D. D[0] is zero.
    """

    Theta: float
    L: int
    P: list
    B: list
    D: list
    region: str = field(default="")

    @property
    def Q(self):
        return [np.block([[b, d], [d, b]]) for b, d in zip(self.B, self.D)]

    def Q_signed(self, m):
        """Block for signed order m (uses -D for negative m)."""
        k = abs(m)
        d = -self.D[k] if m < 0 else self.D[k]
        return np.block([[self.B[k], d], [d, self.B[k]]])

    def blocks(self):
        """All blocks as KernelMatrix objects, P_m then Q_m for m = 0..L."""
        out = [KernelMatrix(f"P_{m}", self.L, p, self.region, m) for m, p in enumerate(self.P)]
        out += [KernelMatrix(f"Q_{m}", self.L, q, self.region, m) for m, q in enumerate(self.Q)]
        return out

    def partial_traces(self):
        """Per-order partial Shannon numbers (N^r_m, N^t_m) for m = 0..L."""
        Nr = np.array([np.trace(p) for p in self.P])
        Nt = np.array([2.0 * np.trace(b) for b in self.B])
        return Nr, Nt

    def shannon(self):
        """Radial and tangential Shannon numbers summed over all signed orders."""
        Nr, Nt = self.partial_traces()
        mult = np.where(np.arange(self.L + 1) == 0, 1.0, 2.0)
        return float(mult @ Nr), float(mult @ Nt)

    def dense(self, which="K"):
        """Expand the blocks into the full P, Q or K matrix (canonical order)."""
        L = self.L
        nt = vsh.n_tangential(L)
        P = np.zeros((vsh.n_radial(L), vsh.n_radial(L)))
        Q = np.zeros((2 * nt, 2 * nt))
        for m in range(L + 1):
            ls = np.arange(m, L + 1)
            for sm in ((m, -m) if m else (0,)):
                idx = vsh.lm_index(ls, sm)
                P[np.ix_(idx, idx)] = self.P[m]
            lt = np.arange(max(m, 1), L + 1)
            if lt.size == 0:
                continue
            for sm in ((m, -m) if m else (0,)):
                iv = vsh.lm_index(lt, sm, 1)
                iw = nt + vsh.lm_index(lt, -sm, 1)
                idx = np.concatenate([iv, iw])
                Q[np.ix_(idx, idx)] = self.Q_signed(sm)
        if which == "P":
            return KernelMatrix("P", L, P, self.region)
        if which == "Q":
            return KernelMatrix("Q", L, Q, self.region)
        K = np.zeros((vsh.n_full(L),) * 2)
        nu = P.shape[0]
        K[:nu, :nu] = P
        K[nu:, nu:] = Q
        return KernelMatrix("K", L, K, self.region)


def _check_Theta(Theta):
    Theta = float(Theta)
    if not 0.0 < Theta <= math.pi:
        raise DomainError("cap radius must lie in (0, pi]")
    return Theta


def _a_coeffs(l, m):
    """X'_lm = a- X_{l,m-1} + a+ X_{l,m+1}."""
    am = -0.5 * math.sqrt((l + m) * (l - m + 1))
    ap = 0.5 * math.sqrt((l - m) * (l + m + 1))
    return [(am, l, m - 1), (ap, l, m + 1)]


def _b_coeffs(l, m):
    """m X_lm / sin = b- X_{l-1,m-1} + b+ X_{l-1,m+1}."""
    f = -0.5 * math.sqrt((2 * l + 1) / (2 * l - 1))
    bm = f * math.sqrt((l + m) * (l + m - 1))
    bp = f * math.sqrt((l - m) * (l - m - 1))
    return [(bm, l - 1, m - 1), (bp, l - 1, m + 1)]


def assemble_polarcap(Theta, L):
    """
    Analytic per-order blocks of the polar-cap kernel.

    Products of normalized Legendre functions are reduced to single
    functions by the Gaunt expansion and integrated with the cap integral
    recursion; derivative terms are first rewritten with the order-raising
    and order-lowering relations. D blocks use the closed form
    -2 pi m X_lm(Theta) X_l'm(Theta) / sqrt(l(l+1) l'(l'+1)).
    """
    Theta = _check_Theta(Theta)
    if L < 0:
        raise DomainError("bandlimit must be nonnegative")
    I = paul_table(2 * L + 2, Theta)
    cache = {}

    def Pi(l, p, l2, q):
        # int_cap X_lp X_l2q sin(theta) dtheta, signed orders allowed
        if abs(p) > l or abs(q) > l2 or l < 0 or l2 < 0:
            return 0.0
        key = (l, p, l2, q) if (l, p) <= (l2, q) else (l2, q, l, p)
        v = cache.get(key)
        if v is None:
            nmin, c = gaunt_vector(*key)
            k = p + q
            col = I[nmin:nmin + c.size, abs(k)]
            v = float(c @ col)
            if k < 0 and k % 2:
                v = -v
            cache[key] = v
        return v

    two_pi = 2.0 * math.pi
    XT = xlm_table(L, Theta)
    Pb, Bb, Db = [], [], []
    for m in range(L + 1):
        ls = range(m, L + 1)
        n = L - m + 1
        P = np.zeros((n, n))
        for i, l in enumerate(ls):
            for j in range(i, n):
                P[i, j] = P[j, i] = two_pi * Pi(l, m, m + j, m)
        Pb.append(P)

        lt = list(range(max(m, 1), L + 1))
        nt = len(lt)
        B = np.zeros((nt, nt))
        D = np.zeros((nt, nt))
        terms = []
        for l in lt:
            t = _a_coeffs(l, m)
            if m > 0:
                t = t + _b_coeffs(l, m)
            terms.append(t)
        norm = np.array([math.sqrt(l * (l + 1.0)) for l in lt])
        for i in range(nt):
            for j in range(i, nt):
                s = 0.0
                # derivative products pair with derivative products, sine with sine
                for a in range(0, len(terms[i]), 2):
                    for (ci, li, pi_) in terms[i][a:a + 2]:
                        if ci == 0.0:
                            continue
                        for (cj, lj, pj) in terms[j][a:a + 2]:
                            if cj != 0.0:
                                s += ci * cj * Pi(li, pi_, lj, pj)
                B[i, j] = B[j, i] = two_pi * s / (norm[i] * norm[j])
        if m > 0:
            x = XT[lt, m]
            D = -two_pi * m * np.outer(x, x) / np.outer(norm, norm)
        Bb.append(B)
        Db.append(D)
    return PolarCapKernel(Theta, L, Pb, Bb, Db, PolarCap(Theta).fingerprint)


def assemble_polarcap_quadrature(Theta, L, nodes=None):
    """
    Per-order polar-cap blocks by Gauss-Legendre integration in cos(theta)
    over [cos(Theta), 1], the azimuthal integral being done analytically.

    With the default ``L + 2`` nodes the rule is exact, because every
    integrand is a polynomial of degree <= 2L in cos(theta).
    """
    Theta = _check_Theta(Theta)
    n = nodes if nodes is not None else L + 2
    x, w = np.polynomial.legendre.leggauss(n)
    c = math.cos(Theta)
    mu = 0.5 * (1.0 - c) * x + 0.5 * (1.0 + c)
    w = 0.5 * (1.0 - c) * w * 2.0 * math.pi
    th = np.arccos(mu)
    X = xlm_table(L, th)
    dX = xlm_dtheta_table(L, th, X)
    S = xlm_over_sin_table(L, th, X)
    Pb, Bb, Db = [], [], []
    for m in range(L + 1):
        Xm = X[m:, m]
        Pb.append((Xm * w) @ Xm.T)
        lo = max(m, 1)
        lt = np.arange(lo, L + 1)
        norm = np.sqrt(lt * (lt + 1.0))
        nn = np.outer(norm, norm)
        dXm, Sm = dX[lo:, m], S[lo:, m]
        Bb.append(((dXm * w) @ dXm.T + (Sm * w) @ Sm.T) / nn)
        cross = (dXm * w) @ Sm.T
        Db.append(-(cross + cross.T) / nn)
    return PolarCapKernel(Theta, L, Pb, Bb, Db, PolarCap(Theta).fingerprint)


# ---------------------------------------------------------------------------
# eigenvalue range policy


def clip_eigenvalues(lam, tol=1e-10):
    """Assert eigenvalues lie in [-tol, 1+tol] and clip them into [0, 1]."""
    lam = np.asarray(lam, dtype=float)
    if lam.size and (lam.min() < -tol or lam.max() > 1.0 + tol):
        raise ContractViolation(
            f"eigenvalues outside [0, 1]: min {lam.min():.3e}, max {lam.max():.3e}")
    return np.clip(lam, 0.0, 1.0)


# ---------------------------------------------------------------------------
# dump format


def write_kernel(path, kernels):
    """Write one or more KernelMatrix sections ("KERNEL kind L n" + rows)."""
    if isinstance(kernels, KernelMatrix):
        kernels = [kernels]
    with open(path, "w") as fh:
        for k in kernels:
            fh.write(f"KERNEL {k.kind} {k.L} {k.n}\n")
            for row in k.entries:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_kernel(path):
    """Read all sections of a kernel dump; returns a list of KernelMatrix."""
    out = []
    with open(path) as fh:
        lines = list(enumerate(fh, 1))
    i = 0
    while i < len(lines):
        lineno, line = lines[i]
        parts = line.split()
        i += 1
        if not parts:
            continue
        if len(parts) != 4 or parts[0] != "KERNEL":
            raise FormatError("expected 'KERNEL kind L n'", path, lineno)
        kind = parts[1]
        try:
            L, n = int(parts[2]), int(parts[3])
        except ValueError:
            raise FormatError("non-integer L or n", path, lineno) from None
        if kind[0] not in "PQK":
            raise FormatError(f"unknown kernel kind {kind!r}", path, lineno)
        M = np.zeros((n, n))
        for r in range(n):
            if i >= len(lines):
                raise FormatError("unexpected end of file", path, lineno)
            lineno, row = lines[i]
            i += 1
            try:
                vals = [float(v) for v in row.split()]
            except ValueError:
                raise FormatError("non-numeric matrix entry", path, lineno) from None
            if len(vals) != n:
                raise FormatError(f"expected {n} values", path, lineno)
            M[r] = vals
        m = None
        if "_" in kind:
            try:
                m = int(kind.split("_", 1)[1])
            except ValueError:
                raise FormatError(f"bad block order in {kind!r}", path, lineno) from None
        out.append(KernelMatrix(kind, L, M, "", m))
    if not out:
        raise FormatError("no kernel sections", path)
    return out
