"""
Concentration regions on the unit sphere and quadrature rules over them.

Coordinates inside the package are colatitude ``theta`` in [0, pi] and
longitude ``phi`` in radians; polygon vertices and file formats use
longitude/latitude in degrees.
"""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FormatError

FOUR_PI = 4.0 * math.pi
MIN_AREA = 1e-12


@dataclass
class QuadratureRule:
    """
    Nodes and positive weights on (part of) the sphere.

    ``exactness`` is the largest L such that products of two degree-L
    harmonics are integrated exactly (``-1`` when no such claim is made,
    e.g. for indicator-filtered rules). Product rules additionally keep
    their 1-D factors in ``thetas``, ``phis`` and ``theta_weights``.
    """

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    exactness: int = -1
    thetas: np.ndarray = field(default=None, repr=False)
    phis: np.ndarray = field(default=None, repr=False)
    theta_weights: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return self.weights.size

    def integrate(self, values):
        """Weighted sum over the first axis of ``values``."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))


def _product_rule(mu, wmu, nphi, exactness):
    thetas = np.arccos(np.clip(mu, -1.0, 1.0))
    order = np.argsort(thetas)
    thetas, wmu = thetas[order], wmu[order]
    phis = 2.0 * math.pi * np.arange(nphi) / nphi
    w_t = wmu * (2.0 * math.pi / nphi)
    T, P = np.meshgrid(thetas, phis, indexing="ij")
    W = np.repeat(w_t, nphi)
    return QuadratureRule(T.ravel(), P.ravel(), W, exactness, thetas, phis, w_t)


def sphere_quadrature(L_exactness, oversample=1):
    """
    Gauss-Legendre in cos(theta) times the trapezoid rule in phi.

    With ``oversample=1`` there are L+1 colatitudes and 2L+1 longitudes,
    which integrates products of two degree-L harmonics exactly.
    """
    if L_exactness < 0:
        raise DomainError("L_exactness must be nonnegative")
    if oversample < 1:
        raise DomainError("oversample must be at least 1")
    nth = oversample * (L_exactness + 1)
    nphi = oversample * (2 * L_exactness + 1)
    mu, w = np.polynomial.legendre.leggauss(nth)
    exact = min(nth - 1, (nphi - 1) // 2)
    return _product_rule(mu, w, nphi, exact)


def cap_quadrature(Theta, L_exactness, oversample=1):
    """
    Boundary-fitted rule on the polar cap theta <= Theta.

    Gauss-Legendre on [cos(Theta), 1] in cos(theta) times the trapezoid rule
    in phi. After azimuthal integration every product of two degree-L vector
    harmonics is a polynomial of degree <= 2L in cos(theta), so the rule is
    exact for kernel entries.
    """
    if not 0.0 < Theta <= math.pi:
        raise DomainError("cap radius must lie in (0, pi]")
    nth = oversample * (L_exactness + 1)
    nphi = oversample * (2 * L_exactness + 1)
    x, w = np.polynomial.legendre.leggauss(nth)
    c = math.cos(Theta)
    mu = 0.5 * (1.0 - c) * x + 0.5 * (1.0 + c)
    w = 0.5 * (1.0 - c) * w
    exact = min(nth - 1, (nphi - 1) // 2)
    return _product_rule(mu, w, nphi, exact)


def sphere_rule_for_grid(thetas, phis, rtol=1e-10):
    """
    Recover the global product Gauss rule whose nodes are ``thetas x phis``.

    Raises DomainError if the grid is not such a rule.
    """
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    n, nphi = thetas.size, phis.size
    if n == 0 or nphi == 0:
        raise DomainError("empty grid")
    mu, w = np.polynomial.legendre.leggauss(n)
    ref = np.sort(np.arccos(mu))
    if not np.allclose(np.sort(thetas), ref, rtol=0, atol=rtol) or np.any(np.diff(thetas) <= 0):
        raise DomainError("colatitudes are not ascending Gauss-Legendre nodes")
    if not np.allclose(phis, 2.0 * math.pi * np.arange(nphi) / nphi, rtol=0, atol=rtol):
        raise DomainError("longitudes are not equispaced from 0")
    return _product_rule(mu, w, nphi, min(n - 1, (nphi - 1) // 2))


# ---------------------------------------------------------------------------
# regions


def _fingerprint(tag, *arrays):
    h = hashlib.sha1(tag.encode())
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=float).tobytes())
    return f"{tag}:{h.hexdigest()[:12]}"


def _unit(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def lonlat_to_unit(lon_deg, lat_deg):
    lon = np.radians(np.asarray(lon_deg, dtype=float))
    lat = np.radians(np.asarray(lat_deg, dtype=float))
    return _unit(0.5 * math.pi - lat, lon)


class Region:
    """Base class. Subclasses implement ``contains``, ``area`` and ``fingerprint``."""

    def contains(self, theta, phi):
        raise NotImplementedError

    def area(self):
        raise NotImplementedError

    @property
    def fingerprint(self):
        raise NotImplementedError

    def complement(self):
        return Complement(self)

    def _checked(self, a):
        if a < MIN_AREA:
            raise DomainError("region area underflows (empty region)")
        return a


class PolarCap(Region):
    """Axisymmetric cap theta <= Theta about the north pole."""

    def __init__(self, Theta):
        Theta = float(Theta)
        if not 0.0 < Theta <= math.pi:
            raise DomainError("cap radius must lie in (0, pi]")
        self.Theta = Theta

    def __repr__(self):
        return f"PolarCap({math.degrees(self.Theta):g} deg)"

    def contains(self, theta, phi=None):
        return np.asarray(theta) <= self.Theta

    def area(self):
        return self._checked(2.0 * math.pi * (1.0 - math.cos(self.Theta)))

    @property
    def fingerprint(self):
        return f"cap:{self.Theta!r}"


class Complement(Region):
    """Points of the sphere not in ``base``."""

    def __init__(self, base):
        self.base = base

    def contains(self, theta, phi):
        return ~np.asarray(self.base.contains(theta, phi))

    def area(self):
        return self._checked(FOUR_PI - self.base.area())

    def complement(self):
        return self.base

    @property
    def fingerprint(self):
        return "not:" + self.base.fingerprint


class PolygonUnion(Region):
    """
    Union of spherical polygons with great-circle edges.

    Each polygon is a sequence of (lon_deg, lat_deg) vertices traversed
    counterclockwise when seen from outside the sphere, so the interior lies
    to the left of every edge. A repeated closing vertex is dropped. Parts
    are assumed disjoint.
    """

    def __init__(self, polygons):
        self.polygons = []
        for poly in polygons:
            p = np.asarray(poly, dtype=float)
            if p.ndim != 2 or p.shape[1] != 2:
                raise DomainError("polygon vertices must be (lon, lat) pairs")
            if p.shape[0] > 1 and np.allclose(p[0], p[-1]):
                p = p[:-1]
            if p.shape[0] < 3:
                raise DomainError("polygon needs at least three vertices")
            if np.any(np.abs(p[:, 1]) > 90.0):
                raise DomainError("latitude outside [-90, 90]")
            self.polygons.append(p)
        if not self.polygons:
            raise DomainError("no polygons given")
        self._verts = [lonlat_to_unit(p[:, 0], p[:, 1]) for p in self.polygons]
        self._refs = [self._reference_point(v) for v in self._verts]

    def __repr__(self):
        return f"PolygonUnion({len(self.polygons)} parts)"

    @staticmethod
    def _reference_point(v):
        # a point just to the left of the first edge midpoint is interior
        a, b = v[0], v[1]
        n = np.cross(a, b)
        nn = np.linalg.norm(n)
        if nn == 0.0:
            raise DomainError("degenerate polygon edge")
        mid = (a + b) / np.linalg.norm(a + b)
        arc = math.atan2(nn, float(a @ b))
        q = mid + 1e-6 * arc * n / nn
        return q / np.linalg.norm(q)

    @staticmethod
    def _signed_area(v):
        # Gauss-Bonnet: area = 2 pi - sum of left turning angles
        k = v.shape[0]
        turn = 0.0
        for i in range(k):
            a, b, c = v[i - 1], v[i], v[(i + 1) % k]
            t_in = np.cross(np.cross(a, b), b)
            t_out = np.cross(np.cross(b, c), b)
            turn += math.atan2(float(np.cross(t_in, t_out) @ b), float(t_in @ t_out))
        return 2.0 * math.pi - turn

    def area(self):
        return self._checked(sum(self._signed_area(v) for v in self._verts))

    def contains(self, theta, phi):
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        p = _unit(theta, phi).reshape(-1, 3)
        inside = np.zeros(p.shape[0], dtype=bool)
        for v, q in zip(self._verts, self._refs):
            inside |= _crossing_parity(q, p, v)
        return inside.reshape(theta.shape)

    @property
    def fingerprint(self):
        return _fingerprint("poly", *self.polygons)


def _crossing_parity(q, p, v):
    """True where the minor arc q->p crosses the closed polygon v an even number of times."""
    n1 = np.cross(q, p)                                   # (N, 3)
    count = np.zeros(p.shape[0], dtype=int)
    k = v.shape[0]
    for i in range(k):
        c, d = v[i], v[(i + 1) % k]
        n2 = np.cross(c, d)
        sc, sd = n1 @ c, n1 @ d                           # sides of c, d w.r.t. arc q-p
        sq, sp = float(n2 @ q), p @ n2                    # sides of q, p w.r.t. edge
        opp1 = sc * sd < 0
        opp2 = sq * sp < 0
        # the two great circles meet at +-x; both minor arcs must hit the same one
        y = (sd[:, None] * c - sc[:, None] * d) * np.sign(sd)[:, None]
        z = (sp[:, None] * q - sq * p) * np.sign(sp)[:, None]
        same = np.einsum("ij,ij->i", y, z) > 0
        count += opp1 & opp2 & same
    return count % 2 == 0


class Mask(Region):
    """
    Raster region on an equiangular grid.

    ``cells[i, j]`` covers colatitudes [i, i+1] * pi/nlat (row 0 is the
    northernmost) and longitudes [j, j+1] * 2 pi/nlon east of 0.
    """

    def __init__(self, cells):
        cells = np.asarray(cells)
        if cells.ndim != 2 or cells.size == 0:
            raise DomainError("mask must be a nonempty 2-D array")
        self.cells = cells.astype(bool)

    def __repr__(self):
        return f"Mask({self.nlat}x{self.nlon})"

    @property
    def nlat(self):
        return self.cells.shape[0]

    @property
    def nlon(self):
        return self.cells.shape[1]

    @classmethod
    def from_region(cls, region, nlat, nlon):
        """Rasterize by testing cell centres."""
        th = (np.arange(nlat) + 0.5) * math.pi / nlat
        ph = (np.arange(nlon) + 0.5) * 2.0 * math.pi / nlon
        T, P = np.meshgrid(th, ph, indexing="ij")
        return cls(region.contains(T, P))

    def contains(self, theta, phi):
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        i = np.clip((theta / math.pi * self.nlat).astype(int), 0, self.nlat - 1)
        j = np.floor(np.mod(phi, 2.0 * math.pi) / (2.0 * math.pi) * self.nlon).astype(int)
        j = np.clip(j, 0, self.nlon - 1)
        return self.cells[i, j]

    def area(self):
        edges = np.cos(np.arange(self.nlat + 1) * math.pi / self.nlat)
        band = (edges[:-1] - edges[1:]) * 2.0 * math.pi / self.nlon
        return self._checked(float(self.cells.sum(axis=1) @ band))

    def complement(self):
        return Mask(~self.cells)

    @property
    def fingerprint(self):
        return _fingerprint(f"mask{self.nlat}x{self.nlon}", self.cells)


def region_quadrature(region, L_exactness, oversample=4, fitted=True, subsample=16):
    """
    Quadrature rule over a region.

    Polar caps get the boundary-fitted ``cap_quadrature`` unless
    ``fitted=False``. Every other region (and unfitted caps) use the global
    rule oversampled ``oversample`` times in both directions, restricted to
    the region with ``region.contains``.

    With ``subsample=1`` nodes are simply kept or dropped, which is accurate
    to O(1/n) only. By default each node is instead weighted by the fraction
    of its quadrature cell lying inside the region, estimated on a
    ``subsample x subsample`` point lattice for cells cut by the boundary.
    """
    if isinstance(region, PolarCap) and fitted:
        return cap_quadrature(region.Theta, L_exactness, oversample)
    rule = sphere_quadrature(L_exactness, oversample)
    if subsample <= 1:
        frac = np.asarray(region.contains(rule.theta, rule.phi), dtype=float)
    else:
        frac = _cell_fractions(region, rule, subsample).ravel()
    keep = frac > 0.0
    return QuadratureRule(rule.theta[keep], rule.phi[keep],
                          rule.weights[keep] * frac[keep], -1)


def _cell_fractions(region, rule, k):
    """Fraction of each product-rule cell inside ``region``, shape (ntheta, nphi)."""
    nphi = rule.phis.size
    dphi = 2.0 * math.pi / nphi
    wmu = rule.theta_weights / dphi
    # cells in cos(theta) tile [-1, 1] with widths equal to the Gauss weights
    mu_edges = np.clip(1.0 - np.concatenate([[0.0], np.cumsum(wmu)]), -1.0, 1.0)
    th_edges = np.arccos(mu_edges)
    ph_edges = rule.phis[0] - 0.5 * dphi + dphi * np.arange(nphi + 1)
    corners = region.contains(*np.meshgrid(th_edges, ph_edges, indexing="ij"))
    centres = region.contains(*np.meshgrid(rule.thetas, rule.phis, indexing="ij"))
    c = corners.astype(int)
    votes = c[:-1, :-1] + c[1:, :-1] + c[:-1, 1:] + c[1:, 1:] + centres
    frac = (votes == 5).astype(float)
    cut = np.argwhere((votes > 0) & (votes < 5))
    if cut.size:
        s = (np.arange(k) + 0.5) / k
        i, j = cut[:, 0], cut[:, 1]
        mu = mu_edges[i, None] + (mu_edges[i + 1] - mu_edges[i])[:, None] * s
        ph = ph_edges[j, None] + dphi * s
        T = np.arccos(np.clip(mu, -1.0, 1.0))[:, :, None]
        P = ph[:, None, :]
        T, P = np.broadcast_arrays(T, P)
        frac[i, j] = region.contains(T, P).reshape(len(cut), -1).mean(axis=1)
    return frac


# ---------------------------------------------------------------------------
# file formats


def read_polygons(path):
    """Polygon file: "lon_deg lat_deg" lines, polygons separated by blank lines."""
    polys, cur = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                if cur:
                    polys.append(cur)
                    cur = []
                continue
            parts = s.split()
            if len(parts) != 2:
                raise FormatError("expected 'lon_deg lat_deg'", path, lineno)
            try:
                lon, lat = float(parts[0]), float(parts[1])
            except ValueError:
                raise FormatError("non-numeric coordinate", path, lineno) from None
            if not (math.isfinite(lon) and -90.0 <= lat <= 90.0):
                raise FormatError("coordinate out of range", path, lineno)
            cur.append((lon, lat))
    if cur:
        polys.append(cur)
    if not polys:
        raise FormatError("no polygons found", path)
    for p in polys:
        if len(p) < 3:
            raise FormatError("polygon with fewer than three vertices", path)
    return PolygonUnion(polys)


def write_polygons(path, region):
    with open(path, "w") as fh:
        blocks = ["\n".join(f"{lon:.17g} {lat:.17g}" for lon, lat in p) for p in region.polygons]
        fh.write("\n\n".join(blocks) + "\n")


def read_mask(path):
    """Mask file: header "MASK nlat nlon" then nlat rows of 0/1 (north first)."""
    with open(path) as fh:
        lines = [(i, l.strip()) for i, l in enumerate(fh, 1)]
    lines = [(i, l) for i, l in lines if l]
    if not lines:
        raise FormatError("empty mask file", path)
    lineno, head = lines[0]
    parts = head.split()
    if len(parts) != 3 or parts[0] != "MASK":
        raise FormatError("expected header 'MASK nlat nlon'", path, lineno)
    try:
        nlat, nlon = int(parts[1]), int(parts[2])
    except ValueError:
        raise FormatError("non-integer mask size", path, lineno) from None
    if nlat <= 0 or nlon <= 0:
        raise FormatError("mask size must be positive", path, lineno)
    rows = lines[1:]
    if len(rows) != nlat:
        raise FormatError(f"expected {nlat} rows, found {len(rows)}", path,
                          rows[-1][0] if rows else lineno)
    cells = np.zeros((nlat, nlon), dtype=bool)
    for r, (lineno, row) in enumerate(rows):
        tok = row.split() if " " in row else list(row)
        if len(tok) != nlon or any(t not in ("0", "1") for t in tok):
            raise FormatError(f"row must hold {nlon} values of 0/1", path, lineno)
        cells[r] = [t == "1" for t in tok]
    return Mask(cells)


def write_mask(path, mask):
    with open(path, "w") as fh:
        fh.write(f"MASK {mask.nlat} {mask.nlon}\n")
        for row in mask.cells:
            fh.write(" ".join("1" if c else "0" for c in row) + "\n")
