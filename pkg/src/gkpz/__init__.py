"""Exact multi-index calculus for the generalised KPZ equation."""

from __future__ import annotations

from .core import (
    GradingContext,
    Kind,
    MultiIndex,
    Poly,
    Variable,
    bracket,
    derivation_D,
    fertility,
    format_multiindex,
    homogeneity,
    nabla,
    noise_count,
    parse_multiindex,
    projection_pi,
    symmetry_factor,
    upsilon_exponent_vector,
    upsilon_render,
)
from .enumeration import (
    enumerate_negative,
    enumerate_pure_noise,
    enumerate_reduced,
    generate_nabla_set,
    n_xi,
    novikov_dimension,
)
from .geometry import (
    assemble_kernel_matrix,
    counterterm_report,
    example_system_row,
    geo_basis_xi,
    ito_member,
    phi_geo,
    phi_geo_hat,
)
from .linalg import RationalMatrix, nullspace_basis, rref
from .trees import DecoratedTree, fiber, graft, lambda_map, psi_map, tilde_psi

__version__ = "0.1.0"
