"""
Normalized associated Legendre functions and coupling coefficients.

The functions here use the unit-normalized convention

    X_lm(theta) = (-1)^m sqrt((2l+1)/(4 pi)) sqrt((l-m)!/(l+m)!) P_lm(cos theta)

where P_lm carries no Condon-Shortley phase, so that the real harmonics
built from X_lm are orthonormal over the unit sphere.  Negative orders obey
X_{l,-m} = (-1)^m X_lm.

Everything is evaluated by recursions on normalized quantities, never by
factorials of the degree, so values stay finite well past l = 150.
"""

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "xlm",
    "xlm_table",
    "xlm_dtheta",
    "xlm_dtheta_table",
    "xlm_over_sin",
    "xlm_over_sin_table",
    "paul_integral",
    "paul_table",
    "wigner3j",
    "wigner3j_range",
    "wigner3j_zero_range",
    "gaunt_expand",
    "gaunt_vector",
]

_INV_SQRT_4PI = 1.0 / math.sqrt(4.0 * math.pi)


def _check_theta(theta, name="theta"):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0.0) or np.any(theta > math.pi) or np.any(np.isnan(theta)):
        raise DomainError(f"{name} must lie in [0, pi]")
    return theta


def _check_degree_order(l, m):
    if l < 0 or abs(m) > l:
        raise DomainError(f"invalid degree/order (l={l}, m={m})")


# ---------------------------------------------------------------------------
# Legendre functions


def xlm_table(lmax, theta):
    """
    Evaluate X_lm(theta) for all 0 <= m <= l <= lmax.

    Parameters
    ----------
    lmax : int
        Maximum degree.
    theta : float or array_like
        Colatitudes in radians, within [0, pi].

    Returns
    -------
    X : ndarray, shape (lmax+1, lmax+1) + theta.shape
        ``X[l, m]`` holds X_lm; entries with m > l are zero.
    """
    if lmax < 0:
        raise DomainError("lmax must be non-negative")
    theta = _check_theta(theta)
    x = np.cos(theta)
    s = np.sin(theta)
    out = np.zeros((lmax + 1, lmax + 1) + theta.shape)

    # log2 of the sectoral magnitudes; a binary shift keeps the seed of the
    # degree recursion representable when sin(theta)^m underflows
    with np.errstate(divide="ignore"):
        log2s = np.log2(s)
    log2c = math.log2(_INV_SQRT_4PI)
    for m in range(lmax + 1):
        if m > 0:
            log2c += 0.5 * math.log2((2 * m + 1) / (2 * m))
        if m == 0:
            log2mm = np.full(theta.shape, log2c)
        else:
            log2mm = log2c + m * log2s
        finite = np.isfinite(log2mm)
        shift = np.where(finite & (log2mm < -900.0), np.floor(-np.where(finite, log2mm, 0.0)), 0.0)
        shift = shift.astype(int)
        mant = np.where(finite, np.exp2(np.where(finite, log2mm + shift, 0.0)), 0.0)
        if m % 2:
            mant = -mant
        p_prev = np.zeros_like(mant)
        p_cur = mant
        out[m, m] = np.ldexp(p_cur, -shift)
        for l in range(m + 1, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p_next = a * (x * p_cur - b * p_prev)
            p_prev, p_cur = p_cur, p_next
            out[l, m] = np.ldexp(p_cur, -shift)
    return out


def xlm(l, m, theta):
    """Normalized Legendre function X_lm(theta); negative m allowed."""
    _check_degree_order(l, m)
    theta = _check_theta(theta)
    val = xlm_table(l, theta)[l, abs(m)]
    if m < 0 and m % 2:
        val = -val
    return val[()] if np.ndim(val) == 0 else val


def xlm_dtheta_table(lmax, theta, X=None):
    """
    Derivatives dX_lm/dtheta for all 0 <= m <= l <= lmax.

    Uses X'_lm = a-_lm X_{l,m-1} + a+_lm X_{l,m+1}.  At m = 0 the order -1
    function is X_{l,-1} = -X_{l,1}, which collapses the pair to
    sqrt(l(l+1)) X_l1.
    """
    theta = np.asarray(theta, dtype=float)
    if X is None:
        X = xlm_table(lmax, theta)
    dX = np.zeros_like(X)
    for l in range(1, lmax + 1):
        dX[l, 0] = math.sqrt(l * (l + 1.0)) * X[l, 1]
        for m in range(1, l + 1):
            am = -0.5 * math.sqrt((l + m) * (l - m + 1.0))
            acc = am * X[l, m - 1]
            if m < l:
                ap = 0.5 * math.sqrt((l - m) * (l + m + 1.0))
                acc = acc + ap * X[l, m + 1]
            dX[l, m] = acc
    return dX


def xlm_dtheta(l, m, theta):
    """dX_lm/dtheta for 0 <= m <= l."""
    if m < 0:
        raise DomainError("xlm_dtheta requires m >= 0")
    _check_degree_order(l, m)
    theta = _check_theta(theta)
    val = xlm_dtheta_table(l, theta)[l, m]
    return val[()] if np.ndim(val) == 0 else val


def xlm_over_sin_table(lmax, theta, X=None):
    """
    m X_lm(theta) / sin(theta) for all 0 <= m <= l <= lmax, finite at poles.

    Built from degree l-1 functions with the b-coefficients
    b+-_lm = -sqrt((2l+1)/(2l-1)) sqrt((l-+m)(l-+m-1)) / 2.
    The m = 0 row is identically zero.
    """
    theta = np.asarray(theta, dtype=float)
    if X is None:
        X = xlm_table(lmax, theta)
    out = np.zeros_like(X)
    for l in range(1, lmax + 1):
        c = -0.5 * math.sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0))
        for m in range(1, l + 1):
            acc = c * math.sqrt((l + m) * (l + m - 1.0)) * X[l - 1, m - 1]
            if m + 1 <= l - 1:
                acc = acc + c * math.sqrt((l - m) * (l - m - 1.0)) * X[l - 1, m + 1]
            out[l, m] = acc
    return out


def xlm_over_sin(l, m, theta):
    """m X_lm(theta) / sin(theta) for 1 <= m <= l."""
    if m < 1:
        raise DomainError("xlm_over_sin requires m >= 1")
    _check_degree_order(l, m)
    theta = _check_theta(theta)
    val = xlm_over_sin_table(l, theta)[l, m]
    return val[()] if np.ndim(val) == 0 else val


# ---------------------------------------------------------------------------
# Cap integrals


def paul_table(lmax, Theta):
    """
    Cap integrals I_lm(Theta) = int_0^Theta X_lm(theta) sin(theta) dtheta.

    Returns an array of shape (lmax+1, lmax+1) indexed ``[l, m]``, zero for
    m > l.  The degree-two recursion is seeded by closed forms for
    (0,0), (1,0) and (1,1).
    """
    Theta = float(_check_theta(Theta, "Theta"))
    I = np.zeros((lmax + 1, lmax + 1))
    c = math.cos(Theta)
    s2 = math.sin(Theta) ** 2
    I[0, 0] = (1.0 - c) / (2.0 * math.sqrt(math.pi))
    if lmax == 0:
        return I
    I[1, 0] = 0.25 * math.sqrt(3.0 / math.pi) * s2
    I[1, 1] = -0.25 * math.sqrt(1.5 / math.pi) * (Theta - 0.5 * math.sin(2.0 * Theta))
    if lmax == 1:
        return I
    X = xlm_table(lmax - 1, Theta)
    for l in range(2, lmax + 1):
        for m in range(l):
            t = 0.0
            if m <= l - 2:
                t = (l - 2.0) / (l + 1.0) * math.sqrt(
                    (2.0 * l + 1.0) * ((l - 1.0) ** 2 - m * m)
                    / ((2.0 * l - 3.0) * (l * l - m * m))
                ) * I[l - 2, m]
            t += math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m)) / (l + 1.0) * s2 * X[l - 1, m]
            I[l, m] = t
        I[l, l] = math.sqrt((2.0 * l + 1.0) / (4.0 * l * l - 4.0 * l)) / (l + 1.0) * (
            l * math.sqrt(2.0 * l - 1.0) * I[l - 2, l - 2] - s2 * X[l - 1, l - 2]
        )
    return I


def paul_integral(l, m, Theta):
    """Cap integral I_lm(Theta) for 0 <= m <= l and 0 <= Theta <= pi."""
    if m < 0:
        raise DomainError("paul_integral requires m >= 0")
    _check_degree_order(l, m)
    return float(paul_table(l, Theta)[l, m])


# ---------------------------------------------------------------------------
# Wigner 3-j symbols


def _triangle(a, b, c):
    return abs(a - b) <= c <= a + b


def wigner3j(l1, l2, l3, m1, m2, m3):
    """
    Wigner 3-j symbol for integer arguments by the Racah formula.

    The alternating sum is accumulated in exact rational arithmetic, so the
    only rounding is the final square root.  Forbidden couplings return 0.
    """
    if m1 + m2 + m3 != 0:
        return 0.0
    if min(l1, l2, l3) < 0 or abs(m1) > l1 or abs(m2) > l2 or abs(m3) > l3:
        return 0.0
    if not _triangle(l1, l2, l3):
        return 0.0
    if m1 == m2 == m3 == 0 and (l1 + l2 + l3) % 2:
        return 0.0
    return _wigner3j_exact(l1, l2, l3, m1, m2, m3)


@lru_cache(maxsize=65536)
def _wigner3j_exact(l1, l2, l3, m1, m2, m3):
    f = math.factorial
    kmin = max(0, l2 - l3 - m1, l1 - l3 + m2)
    kmax = min(l1 + l2 - l3, l1 - m1, l2 + m2)
    s = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (f(k) * f(l3 - l2 + k + m1) * f(l3 - l1 + k - m2)
               * f(l1 + l2 - l3 - k) * f(l1 - k - m1) * f(l2 - k + m2))
        s += Fraction(-1 if k % 2 else 1, den)
    if s == 0:
        return 0.0
    sq = Fraction(
        f(l1 + l2 - l3) * f(l1 - l2 + l3) * f(-l1 + l2 + l3)
        * f(l1 + m1) * f(l1 - m1) * f(l2 + m2) * f(l2 - m2) * f(l3 + m3) * f(l3 - m3),
        f(l1 + l2 + l3 + 1),
    ) * s * s
    val = math.sqrt(sq.numerator / sq.denominator) if sq < 1 else 1.0
    # int / int true division is correctly rounded even for huge operands
    if s < 0:
        val = -val
    if (l1 - l2 - m3) % 2:
        val = -val
    return val


def wigner3j_zero_range(l2, l3):
    """
    Symbols (l1 l2 l3; 0 0 0) for l1 = |l2-l3| ... l2+l3 in closed form.
    """
    l1 = np.arange(abs(l2 - l3), l2 + l3 + 1)
    J = l1 + l2 + l3
    out = np.zeros(l1.shape)
    even = J % 2 == 0
    if not np.any(even):
        return out
    g = J[even] // 2
    a = l1[even]
    lg = _lgamma
    logv = 0.5 * (lg(J[even] - 2 * a + 1) + lg(J[even] - 2 * l2 + 1)
                  + lg(J[even] - 2 * l3 + 1) - lg(J[even] + 2))
    logv += lg(g + 1) - lg(g - a + 1) - lg(g - l2 + 1) - lg(g - l3 + 1)
    out[even] = np.where(g % 2, -1.0, 1.0) * np.exp(logv)
    return out


def _lgamma(n):
    from scipy.special import gammaln

    return gammaln(np.asarray(n, dtype=float))


def wigner3j_range(l2, l3, m2, m3):
    """
    All symbols (l1 l2 l3; -m2-m3 m2 m3) over the allowed l1 range.

    Uses the three-term recursion in l1 run forward from the lower end and
    backward from the upper end, spliced in the oscillatory middle and
    normalized by sum_l1 (2 l1 + 1) w^2 = 1.

    Returns
    -------
    l1min : int
    w : ndarray
        Values for l1 = l1min ... l2 + l3 (empty if nothing is allowed).
    """
    m1 = -m2 - m3
    if abs(m2) > l2 or abs(m3) > l3 or l2 < 0 or l3 < 0:
        return 0, np.zeros(0)
    jmin = max(abs(l2 - l3), abs(m1))
    jmax = l2 + l3
    if jmin > jmax:
        return jmin, np.zeros(0)
    if m1 == 0 and m2 == 0 and m3 == 0:
        w = wigner3j_zero_range(l2, l3)
        return jmin, w[jmin - abs(l2 - l3):]
    n = jmax - jmin + 1
    if n == 1:
        w = np.array([1.0 / math.sqrt(2 * jmin + 1)])
        return jmin, _fix_sign(w, l2, l3, m1)

    def A(j):
        return math.sqrt((j * j - (l2 - l3) ** 2) * ((l2 + l3 + 1) ** 2 - j * j)
                         * (j * j - m1 * m1))

    def B(j):
        return -(2 * j + 1) * (l2 * (l2 + 1) * m1 - l3 * (l3 + 1) * m1
                               - j * (j + 1) * (m3 - m2))

    fwd = np.zeros(n)
    fwd[0] = 1.0
    if jmin == 0:
        # l2 == l3 and m1 == 0; ratio of the closed forms at l1 = 1 and 0
        fwd[1] = m2 / math.sqrt(l2 * (l2 + 1.0))
    else:
        fwd[1] = -B(jmin) / (jmin * A(jmin + 1))
    stop = n - 1
    for i in range(1, n - 1):
        if abs(fwd[i]) < abs(fwd[i - 1]):
            stop = i - 1
            break
        j = jmin + i
        fwd[i + 1] = -(B(j) * fwd[i] + (j + 1) * A(j) * fwd[i - 1]) / (j * A(j + 1))
        if abs(fwd[i + 1]) > 1e200:
            fwd[: i + 2] *= 1e-200
    else:
        if abs(fwd[n - 1]) < abs(fwd[n - 2]):
            stop = n - 2

    if stop >= n - 1:
        w = fwd
    else:
        bwd = np.zeros(n)
        bwd[n - 1] = 1.0
        lo = max(stop - 1, 0)
        for i in range(n - 1, lo, -1):
            j = jmin + i
            nxt = bwd[i + 1] if i + 1 < n else 0.0
            ap = A(j + 1) if i + 1 < n else 0.0
            bwd[i - 1] = -(j * ap * nxt + B(j) * bwd[i]) / ((j + 1) * A(j))
            if abs(bwd[i - 1]) > 1e200:
                bwd[i - 1:] *= 1e-200
        win = slice(lo, min(stop + 2, n))
        scale = np.dot(fwd[win], bwd[win]) / np.dot(bwd[win], bwd[win])
        w = np.concatenate([fwd[:stop], scale * bwd[stop:]])
    norm = math.sqrt(np.sum((2 * np.arange(jmin, jmax + 1) + 1) * w * w))
    return jmin, _fix_sign(w / norm, l2, l3, m1)


def _fix_sign(w, l2, l3, m1):
    # sign of the stretched symbol (l2+l3 l2 l3; m1 m2 m3) is (-1)^(l2-l3+m1)
    want = -1.0 if (l2 - l3 + m1) % 2 else 1.0
    if w[-1] * want < 0:
        w = -w
    return w


# ---------------------------------------------------------------------------
# Gaunt expansion of products


@lru_cache(maxsize=None)
def gaunt_vector(l, m, l2, m2):
    """
    Coefficients c_n with X_lm X_{l2 m2} = sum_n c_n X_{n, m+m2}.

    Orders may be negative.  Returns ``(nmin, c)`` covering
    n = nmin ... l + l2; entries of the wrong parity are exactly zero.
    The array is shared through the cache and must not be modified.
    """
    lo = abs(l - l2)
    w0 = wigner3j_zero_range(l, l2)
    # (l n l2; m, -M, m2) = (-1)^(l+n+l2) (n l l2; -M, m, m2); only even
    # l+n+l2 survive the (l n l2; 0 0 0) factor so the sign drops out
    nmin, wm = wigner3j_range(l, l2, m, m2)
    nmin = max(nmin, lo)
    if wm.size == 0 or nmin > l + l2:
        return l + l2 + 1, np.zeros(0)
    wm = wm[len(wm) - (l + l2 - nmin + 1):]
    w0 = w0[nmin - lo:]
    n = np.arange(nmin, l + l2 + 1)
    c = np.sqrt((2 * n + 1) * (2 * l + 1) * (2 * l2 + 1) / (4 * math.pi)) * w0 * wm
    if (m + m2) % 2:
        c = -c
    c.setflags(write=False)
    return nmin, c


def gaunt_expand(l, m, l2, m2):
    """
    Expand X_lm X_{l2 m2} as a list of ``(n, coeff)`` terms in X_{n, m+m2}.

    Only non-vanishing terms are listed.
    """
    _check_degree_order(l, m)
    _check_degree_order(l2, m2)
    nmin, c = gaunt_vector(l, m, l2, m2)
    return [(nmin + i, float(v)) for i, v in enumerate(c) if v != 0.0]
