"""
Command-line interface: ``vecslep kernel|solve|synth|reconstruct``.

Angles are given in degrees on the command line. Exit status is 0 on
success, 1 on usage, input or parse errors and 2 when a numerical contract
is violated.
"""

import argparse
import math
import sys

import numpy as np

from . import io, kernel, spectral, vsh
from .approx import region_kernel, sweep
from .errors import ContractViolation, DomainError, FormatError, ResolutionError
from .region import PolarCap, read_mask, read_polygons


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_region(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--cap", type=float, metavar="DEG", help="polar cap radius in degrees")
    g.add_argument("--polygon", metavar="FILE", help="polygon file (lon lat per line)")
    g.add_argument("--mask", metavar="FILE", help="raster mask file")
    p.add_argument("--oversample", type=int, default=4,
                   help="quadrature oversampling for polygons and masks (default 4)")


def _region(args):
    if args.cap is not None:
        if not 0.0 < args.cap <= 180.0:
            raise DomainError("--cap must lie in (0, 180]")
        return PolarCap(math.radians(args.cap))
    if args.polygon:
        return read_polygons(args.polygon)
    if args.mask:
        return read_mask(args.mask)
    return None


def _print_shannon(label, rep, out):
    print(f"{label} N {rep.N_total:.10f} ({round(rep.N_total)})", file=out)
    print(f"{label} N^r {rep.N_radial:.10f} ({round(rep.N_radial)})", file=out)
    print(f"{label} N^t {rep.N_tangential:.10f} ({round(rep.N_tangential)})", file=out)


def cmd_kernel(args, out):
    reg = _region(args)
    L = args.L
    if isinstance(reg, PolarCap) and not args.quadrature:
        pk = kernel.assemble_polarcap(reg.Theta, L)
        rep = spectral.shannon(pk)
        if args.out:
            kernel.write_kernel(args.out, pk.blocks())
    else:
        K = kernel.assemble_quadrature(reg, L, args.which, oversample=args.oversample)
        rep = spectral.shannon(K)
        if args.out:
            kernel.write_kernel(args.out, K)
    print(f"trace {rep.N_total:.17g}", file=out)
    _print_shannon("computed", rep, out)
    _print_shannon("predicted", spectral.shannon_formula(reg.area(), L), out)
    return 0


def _basis_from_args(args):
    kind = args.kind
    if args.kernel:
        ks = kernel.read_kernel(args.kernel)
        if len(ks) == 1 and ks[0].m is None:
            b = spectral.solve(ks[0])
            return b
        raise FormatError("per-order block files cannot be solved directly; "
                          "use --cap instead", args.kernel)
    reg = _region(args)
    if reg is None:
        raise DomainError("give a region or --kernel")
    if isinstance(reg, PolarCap) and reg.Theta < math.pi:
        return spectral.polarcap_basis(reg.Theta, args.L, kind)
    which = {"radial": "P", "tangential": "Q", "full": "K"}[kind]
    K = kernel.assemble_quadrature(reg, args.L, which, oversample=args.oversample)
    return spectral.solve(K)


def cmd_solve(args, out):
    b = _basis_from_args(args)
    io.write_eigenvalues(args.out_lambda, b)
    if args.out_basis:
        io.write_basis(args.out_basis, b)
    rep = spectral.shannon(b)
    print(f"{len(b)} eigenvalues, sum {rep.N_total:.10f} ({round(rep.N_total)}), "
          f"#(lambda >= 0.5) = {int((b.lambdas >= 0.5).sum())}", file=out)
    return 0


def cmd_synth(args, out):
    if args.basis:
        b = io.read_basis(args.basis)
        if not 1 <= args.alpha <= len(b):
            raise DomainError(f"--alpha must lie in [1, {len(b)}]")
        c = b.coeffs(args.alpha - 1)
    else:
        c = io.read_coeffs(args.coeffs)
    thetas, phis = io.render_grid(args.nlat, args.nlon)
    grid = vsh.synth(c, thetas, phis)
    io.write_grid(args.out, grid)
    mag = grid.magnitude()
    print(f"max |v| {mag.max():.10g} at {args.nlat}x{args.nlon}", file=out)
    return 0


def cmd_reconstruct(args, out):
    u = io.read_coeffs(args.coeffs)
    reg = _region(args)
    tang = not np.any(u.U != 0)
    kind = "tangential" if tang else "full"
    if isinstance(reg, PolarCap) and reg.Theta < math.pi:
        pk = kernel.assemble_polarcap(reg.Theta, u.L)
        b = spectral.polarcap_basis(reg.Theta, u.L, kind, pk=pk)
        K = pk.dense("Q" if tang else "K")
    else:
        K = region_kernel(reg, u.L, kind)
        b = spectral.solve(K)
    N = spectral.shannon(K).N_total
    if args.sweep:
        Js = sorted({int(j) for j in args.sweep.split(",")})
    elif args.J is not None:
        Js = [args.J]
    else:
        Js = [max(1, round(args.times_shannon * N))]
    Js = [min(j, len(b)) for j in Js]
    reports = sweep(u, b, K, Js)
    if args.out:
        io.write_report(args.out, reports)
    print(f"Shannon number {N:.6f}; basis size {len(b)}", file=out)
    print("J epsilon b", file=out)
    for r in reports:
        print(f"{r.J} {r.epsilon:.6e} {r.bias:.6e}", file=out)
    if args.grid_out:
        from .approx import reconstruct

        thetas, phis = io.render_grid(args.nlat, args.nlon)
        v = reconstruct(u, b, reports[-1].J)
        io.write_grid(args.grid_out, vsh.synth(v, thetas, phis))
    return 0


def build_parser():
    p = _Parser(prog="vecslep", description="Vector Slepian functions on the sphere.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kernel", help="assemble a localization kernel")
    _add_region(k)
    k.add_argument("--L", type=int, required=True)
    mode = k.add_mutually_exclusive_group()
    mode.add_argument("--cap-analytic", action="store_true",
                      help="per-order analytic blocks (default for caps)")
    mode.add_argument("--quadrature", action="store_true", help="dense quadrature assembly")
    k.add_argument("--which", choices=("P", "Q", "K"), default="K")
    k.add_argument("--out", help="kernel dump file")
    k.set_defaults(func=cmd_kernel)

    s = sub.add_parser("solve", help="solve the concentration problem")
    _add_region(s, required=False)
    s.add_argument("--kernel", help="dense kernel dump to solve")
    s.add_argument("--L", type=int)
    s.add_argument("--kind", choices=("radial", "tangential", "full"), default="tangential")
    s.add_argument("--out-lambda", required=True, help="eigenvalue table output")
    s.add_argument("--out-basis", help="basis output")
    s.set_defaults(func=cmd_solve)

    y = sub.add_parser("synth", help="synthesize a field on a lat/lon grid")
    src = y.add_mutually_exclusive_group(required=True)
    src.add_argument("--basis", help="basis file")
    src.add_argument("--coeffs", help="coefficient file")
    y.add_argument("--alpha", type=int, default=1, help="1-based basis column")
    y.add_argument("--nlat", type=int, default=181)
    y.add_argument("--nlon", type=int, default=361)
    y.add_argument("--out", required=True)
    y.set_defaults(func=cmd_synth)

    r = sub.add_parser("reconstruct", help="truncated Slepian reconstruction")
    r.add_argument("--coeffs", required=True)
    _add_region(r)
    jg = r.add_mutually_exclusive_group()
    jg.add_argument("--J", type=int)
    jg.add_argument("--times-shannon", type=float, default=1.0,
                    help="truncate at this multiple of the Shannon number (default 1)")
    jg.add_argument("--sweep", help="comma-separated list of J values")
    r.add_argument("--out", help="report file ('J epsilon b' rows)")
    r.add_argument("--grid-out", help="grid file of the (last) reconstruction")
    r.add_argument("--nlat", type=int, default=181)
    r.add_argument("--nlon", type=int, default=361)
    r.set_defaults(func=cmd_reconstruct)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "L", None) is not None and args.L < 0:
        parser.error("--L must be nonnegative")
    if args.command in ("kernel", "solve") and args.L is None and not getattr(args, "kernel", None):
        parser.error("--L is required")
    try:
        return args.func(args, out)
    except ContractViolation as exc:
        print(f"vecslep: numerical contract violated: {exc}", file=sys.stderr)
        return 2
    except (FormatError, DomainError, ResolutionError, OSError, ValueError) as exc:
        print(f"vecslep: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
