"""
Plain-text file formats. Floats are written with 17 significant digits so
that every write/read round trip is exact.

Coefficients::

    VSHCOEF 1 L kind          # kind is scalar-U or full-UVW
    U l m value
    ...

Grids (rows north to south, then west to east)::

    VGRID nlat nlon r theta phi
    lat_deg lon_deg vr vt vp

Eigenvalue tables have rows "alpha m lambda" (m is "*" when unknown);
basis files are described in ``write_basis``.
"""

import math

import numpy as np

from . import vsh
from .errors import FormatError
from .spectral import SlepianBasis
from .vsh import CoeffVector, VectorGrid

FMT = "{:.17g}"
KINDS = ("scalar-U", "full-UVW")


def _f(x):
    return FMT.format(float(x))


def _records(path):
    """Non-empty, non-comment lines with their 1-based numbers."""
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].strip()
            if s:
                yield lineno, s.split()


def _num(tok, path, lineno, conv=float):
    try:
        v = conv(tok)
    except ValueError:
        raise FormatError(f"cannot parse {tok!r}", path, lineno) from None
    if conv is float and not math.isfinite(v):
        raise FormatError("non-finite value", path, lineno)
    return v


# ---------------------------------------------------------------------------
# coefficients


def write_coeffs(path, c, kind=None):
    if kind is None:
        kind = "full-UVW" if (np.any(c.V != 0) or np.any(c.W != 0)) else "scalar-U"
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    with open(path, "w") as fh:
        fh.write(f"VSHCOEF 1 {c.L} {kind}\n")
        ls, ms = vsh.degrees_orders(c.L)
        for l, m, v in zip(ls, ms, c.U):
            fh.write(f"U {l} {m} {_f(v)}\n")
        if kind == "full-UVW":
            ls, ms = vsh.degrees_orders(c.L, 1)
            for tag, block in (("V", c.V), ("W", c.W)):
                for l, m, v in zip(ls, ms, block):
                    fh.write(f"{tag} {l} {m} {_f(v)}\n")


def read_coeffs(path):
    """Read a coefficient file; omitted records are zero."""
    recs = _records(path)
    try:
        lineno, head = next(recs)
    except StopIteration:
        raise FormatError("empty coefficient file", path) from None
    if len(head) != 4 or head[0] != "VSHCOEF":
        raise FormatError("expected header 'VSHCOEF 1 L kind'", path, lineno)
    if head[1] != "1":
        raise FormatError(f"unsupported format version {head[1]}", path, lineno)
    L = _num(head[2], path, lineno, int)
    kind = head[3]
    if L < 0 or kind not in KINDS:
        raise FormatError("bad bandlimit or kind", path, lineno)
    c = CoeffVector.zeros(L)
    seen = set()
    for lineno, tok in recs:
        if len(tok) != 4 or tok[0] not in "UVW" or len(tok[0]) != 1:
            raise FormatError("expected 'TAG l m value'", path, lineno)
        tag = tok[0]
        l = _num(tok[1], path, lineno, int)
        m = _num(tok[2], path, lineno, int)
        v = _num(tok[3], path, lineno)
        if tag != "U" and kind == "scalar-U":
            raise FormatError("tangential record in a scalar-U file", path, lineno)
        lmin = 0 if tag == "U" else 1
        if not (lmin <= l <= L and abs(m) <= l):
            raise FormatError(f"degree/order ({l}, {m}) out of range", path, lineno)
        if (tag, l, m) in seen:
            raise FormatError(f"duplicate record {tag} {l} {m}", path, lineno)
        seen.add((tag, l, m))
        getattr(c, tag)[vsh.lm_index(l, m, lmin)] = v
    return c


# ---------------------------------------------------------------------------
# grids


def render_grid(nlat=181, nlon=361):
    """Equiangular rendering grid: colatitudes 0..pi, longitudes -180..180 deg."""
    thetas = np.linspace(0.0, math.pi, nlat)
    phis = np.radians(np.linspace(-180.0, 180.0, nlon))
    return thetas, phis


def write_grid(path, grid):
    """Write a VectorGrid; rows must already run north to south, west to east."""
    if np.any(np.diff(grid.thetas) <= 0) or np.any(np.diff(grid.phis) <= 0):
        raise ValueError("grid must be ordered north to south and west to east")
    if not np.all(np.isfinite(grid.samples)):
        raise ValueError("grid holds non-finite values")
    lat = 90.0 - np.degrees(grid.thetas)
    lon = np.degrees(grid.phis)
    with open(path, "w") as fh:
        fh.write(f"VGRID {grid.thetas.size} {grid.phis.size} r theta phi\n")
        for i in range(grid.thetas.size):
            for j in range(grid.phis.size):
                vr, vt, vp = grid.samples[i, j]
                fh.write(" ".join(map(_f, (lat[i], lon[j], vr, vt, vp))) + "\n")


def read_grid(path):
    recs = _records(path)
    try:
        lineno, head = next(recs)
    except StopIteration:
        raise FormatError("empty grid file", path) from None
    if len(head) != 6 or head[0] != "VGRID" or head[3:] != ["r", "theta", "phi"]:
        raise FormatError("expected header 'VGRID nlat nlon r theta phi'", path, lineno)
    nlat = _num(head[1], path, lineno, int)
    nlon = _num(head[2], path, lineno, int)
    rows = []
    for lineno, tok in recs:
        if len(tok) != 5:
            raise FormatError("expected 'lat lon vr vt vp'", path, lineno)
        rows.append([_num(t, path, lineno) for t in tok])
    if len(rows) != nlat * nlon:
        raise FormatError(f"expected {nlat * nlon} rows, found {len(rows)}", path)
    a = np.array(rows).reshape(nlat, nlon, 5)
    thetas = np.radians(90.0 - a[:, 0, 0])
    phis = np.radians(a[0, :, 1])
    return VectorGrid(thetas, phis, a[..., 2:])


# ---------------------------------------------------------------------------
# eigenvalue tables and bases


def write_eigenvalues(path, basis):
    with open(path, "w") as fh:
        fh.write("# alpha m lambda\n")
        for a, lam in enumerate(basis.lambdas, 1):
            m = "*" if basis.orders is None else str(int(basis.orders[a - 1]))
            fh.write(f"{a} {m} {_f(lam)}\n")


def read_eigenvalues(path):
    """Returns (lambdas, orders); orders is None when any row has m = '*'."""
    lams, orders = [], []
    for lineno, tok in _records(path):
        if len(tok) != 3:
            raise FormatError("expected 'alpha m lambda'", path, lineno)
        a = _num(tok[0], path, lineno, int)
        if a != len(lams) + 1:
            raise FormatError("rows must be numbered 1, 2, ...", path, lineno)
        orders.append(None if tok[1] == "*" else _num(tok[1], path, lineno, int))
        lams.append(_num(tok[2], path, lineno))
    o = None if any(m is None for m in orders) else np.array(orders, dtype=int)
    return np.array(lams), o


def write_basis(path, basis):
    """
    Basis file::

        VSHBASIS 1 L kind ncols
        LAMBDA l1 ... ln
        ORDER m1 ... mn          (optional)
        TAG l m v1 ... vn        (one row per coefficient)
    """
    if basis.m is not None:
        raise ValueError("write merged bases only")
    L, n = basis.L, len(basis)
    with open(path, "w") as fh:
        fh.write(f"VSHBASIS 1 {L} {basis.kind} {n}\n")
        fh.write("LAMBDA " + " ".join(map(_f, basis.lambdas)) + "\n")
        if basis.orders is not None:
            fh.write("ORDER " + " ".join(str(int(m)) for m in basis.orders) + "\n")
        for tag, l, m, row in _basis_rows(basis):
            fh.write(f"{tag} {l} {m} " + " ".join(map(_f, row)) + "\n")


def _basis_layout(L, kind):
    out = []
    blocks = {"radial": ("U",), "tangential": ("V", "W"), "full": ("U", "V", "W")}[kind]
    for tag in blocks:
        ls, ms = vsh.degrees_orders(L, 0 if tag == "U" else 1)
        out.extend((tag, int(l), int(m)) for l, m in zip(ls, ms))
    return out


def _basis_rows(basis):
    for (tag, l, m), row in zip(_basis_layout(basis.L, basis.kind), basis.vectors):
        yield tag, l, m, row


def read_basis(path):
    recs = list(_records(path))
    if not recs:
        raise FormatError("empty basis file", path)
    lineno, head = recs[0]
    if len(head) != 5 or head[0] != "VSHBASIS" or head[1] != "1":
        raise FormatError("expected header 'VSHBASIS 1 L kind ncols'", path, lineno)
    L = _num(head[2], path, lineno, int)
    kind = head[3]
    n = _num(head[4], path, lineno, int)
    if kind not in ("radial", "tangential", "full"):
        raise FormatError(f"unknown basis kind {kind!r}", path, lineno)
    i = 1
    if i >= len(recs) or recs[i][1][0] != "LAMBDA":
        raise FormatError("missing LAMBDA line", path, lineno)
    lineno, tok = recs[i]
    if len(tok) != n + 1:
        raise FormatError(f"expected {n} eigenvalues", path, lineno)
    lam = np.array([_num(t, path, lineno) for t in tok[1:]])
    i += 1
    orders = None
    if i < len(recs) and recs[i][1][0] == "ORDER":
        lineno, tok = recs[i]
        if len(tok) != n + 1:
            raise FormatError(f"expected {n} orders", path, lineno)
        orders = np.array([_num(t, path, lineno, int) for t in tok[1:]])
        i += 1
    layout = _basis_layout(L, kind)
    if len(recs) - i != len(layout):
        raise FormatError(f"expected {len(layout)} coefficient rows, found {len(recs) - i}",
                          path)
    V = np.zeros((len(layout), n))
    for k, (want, (lineno, tok)) in enumerate(zip(layout, recs[i:])):
        if len(tok) != n + 3:
            raise FormatError(f"expected 'TAG l m' and {n} values", path, lineno)
        got = (tok[0], _num(tok[1], path, lineno, int), _num(tok[2], path, lineno, int))
        if got != want:
            raise FormatError(f"expected row {want}, found {got}", path, lineno)
        V[k] = [_num(t, path, lineno) for t in tok[3:]]
    return SlepianBasis(L, kind, V, lam, "", orders)


def write_report(path, reports):
    with open(path, "w") as fh:
        fh.write("# J epsilon b\n")
        for r in reports:
            fh.write(f"{r.J} {_f(r.epsilon)} {_f(r.bias)}\n")
