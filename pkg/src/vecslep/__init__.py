"""Vector Slepian functions: spatiospectral concentration of vector fields on the sphere."""

from .errors import (ContractViolation, DomainError, FormatError, PoleSingularityError,
                     ResolutionError)
from .kernel import (KernelMatrix, PolarCapKernel, assemble_polarcap,
                     assemble_polarcap_quadrature, assemble_quadrature)
from .region import (Mask, PolarCap, PolygonUnion, QuadratureRule, cap_quadrature,
                     region_quadrature, sphere_quadrature)
from .spectral import (ShannonReport, SlepianBasis, merge_fixed_order, mercer_sum,
                       polarcap_basis, shannon, shannon_formula, solve, solve_polarcap,
                       spacelimit, tangential_partner, weighted_energy)
from .approx import ReconstructionReport, error_bias, project, reconstruct
from .vsh import CoeffVector, TangentVector3, VectorGrid, analyze, eval_B, eval_C, eval_P, synth

__version__ = "0.1.0"

__all__ = [
    "ContractViolation", "DomainError", "FormatError", "PoleSingularityError",
    "ResolutionError",
    "KernelMatrix", "PolarCapKernel", "assemble_polarcap", "assemble_polarcap_quadrature",
    "assemble_quadrature",
    "Mask", "PolarCap", "PolygonUnion", "QuadratureRule", "cap_quadrature",
    "region_quadrature", "sphere_quadrature",
    "ShannonReport", "SlepianBasis", "merge_fixed_order", "mercer_sum", "polarcap_basis",
    "shannon", "shannon_formula", "solve", "solve_polarcap", "spacelimit",
    "tangential_partner", "weighted_energy",
    "ReconstructionReport", "error_bias", "project", "reconstruct",
    "CoeffVector", "TangentVector3", "VectorGrid", "analyze", "eval_B", "eval_C", "eval_P",
    "synth",
]
