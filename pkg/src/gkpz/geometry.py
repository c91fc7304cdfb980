"""Change-of-coordinate operators, their kernels, and the counterterm listing.

The geometric counterterms with ``N`` noises form the kernel of the
compensated map ``phi_geo_hat`` restricted to Noise/Quad multi-indices of
fertility one.  The kernel is computed exactly from the matrix of pairings
``<row, phi_geo_hat(column)>`` and cross-checked against the iterated
covariant derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import core
from .core import (
    GradingContext,
    Kind,
    MultiIndex,
    Poly,
    bracket,
    derivation_power,
    diff,
    fertility,
    format_multiindex,
    homogeneity,
    noise,
    noise_count,
    quad,
    symmetry_factor,
    upsilon_exponent_vector,
    upsilon_render,
)
from .enumeration import (
    enumerate_populated,
    enumerate_reduced,
    generate_nabla_set,
    n_xi,
    novikov_dimension,
)
from .linalg import IncrementalSpan, RationalMatrix, nullspace_basis

__all__ = [
    "KernelReport",
    "GeoBasis",
    "CountertermRow",
    "phi_geo",
    "phi_geo_hat",
    "ito_member",
    "ito_sign_flip",
    "noise_quad_space",
    "assemble_kernel_matrix",
    "example_system_row",
    "geo_basis_xi",
    "counterterm_report",
]

_NQ = frozenset({Kind.NOISE, Kind.QUAD})


def _check_nq(p: Poly, op: str) -> None:
    bad = p.kinds() - _NQ
    if bad:
        names = ", ".join(sorted(k.name for k in bad))
        raise core.DomainError(f"{op} is defined on Noise/Quad variables, got {names}")


@lru_cache(maxsize=None)
def _phi_variable(var: core.Variable) -> Poly:
    h0 = Poly.monomial(diff(0))
    if var.kind is Kind.NOISE:
        return derivation_power(bracket(Poly.monomial(noise(0)), h0), var.k)
    return -derivation_power(Poly.monomial(quad(0)) * h0, var.k + 1) - Poly.monomial(
        diff(var.k + 2), 2
    )


def _phi_monomial(beta: MultiIndex) -> Poly:
    out = Poly()
    for var, e in beta.items():
        out = out + _phi_variable(var) * beta.divide(var) * e
    return out


def phi_geo(p) -> Poly:
    """Infinitesimal change of coordinates, extended to products by Leibniz."""
    p = core._as_poly(p)
    _check_nq(p, "phi_geo")
    out = Poly()
    for beta, c in p:
        out = out + _phi_monomial(beta) * c
    return out


@lru_cache(maxsize=None)
def _phi_hat_monomial(beta: MultiIndex) -> Poly:
    return _phi_monomial(beta) - bracket(Poly.monomial(beta), Poly.monomial(diff(0)))


def phi_geo_hat(p) -> Poly:
    """``phi_geo(p) - [p, H0]``."""
    p = core._as_poly(p)
    _check_nq(p, "phi_geo_hat")
    out = Poly()
    for beta, c in p:
        out = out + _phi_hat_monomial(beta) * c
    return out


def ito_member(beta: MultiIndex) -> bool:
    """Whether ``beta`` survives for noises with a quadratic covariance: even noise count."""
    _check_nq(Poly.monomial(beta), "ito_member")
    return noise_count(beta) % 2 == 0


def ito_sign_flip(beta: MultiIndex) -> int:
    """Sign picked up by the evaluated monomial under ``sigma -> -sigma``.

    Reads the noise exponents off the exponent vector, so it is independent
    of :func:`noise_count`.
    """
    vec = upsilon_exponent_vector(beta)
    return (-1) ** sum(vec[2::3])


@lru_cache(maxsize=None)
def _noise_quad_space(n: int) -> tuple:
    betas = {
        b
        for b in enumerate_populated(n, 0, kinds=_NQ)
        if fertility(b) == 1 and noise_count(b) == n
    }
    return tuple(sorted(betas, key=MultiIndex.sort_key))


def noise_quad_space(n: int) -> list:
    """Noise/Quad multi-indices with ``n`` noises and fertility one, canonically ordered."""
    if n < 1:
        raise ValueError("need at least one noise")
    return list(_noise_quad_space(n))


@dataclass(frozen=True)
class KernelReport:
    N: int
    columns: tuple
    rows: tuple
    matrix: RationalMatrix = field(repr=False)
    kernel_basis: tuple
    dimension: int

    def row_equation(self, row: MultiIndex) -> dict:
        """Nonzero entries of one row as ``{column: coefficient}``."""
        r = self.rows.index(row)
        return {c: self.matrix[r, j] for j, c in enumerate(self.columns) if self.matrix[r, j]}


@lru_cache(maxsize=None)
def assemble_kernel_matrix(n: int) -> KernelReport:
    """Pairing matrix of ``phi_geo_hat`` on the ``n``-noise space and its kernel."""
    if n < 2:
        raise ValueError("need at least two noises")
    columns = tuple(_noise_quad_space(n))
    images = [_phi_hat_monomial(b) for b in columns]
    rows = tuple(sorted(set().union(*(img.support() for img in images)), key=MultiIndex.sort_key))
    index = {r: i for i, r in enumerate(rows)}
    data = [[Fraction(0)] * len(columns) for _ in rows]
    for j, img in enumerate(images):
        for beta, c in img:
            data[index[beta]][j] = c
    matrix = RationalMatrix(len(rows), len(columns), data)
    basis = []
    for vec in nullspace_basis(matrix):
        p = Poly({b: c for b, c in zip(columns, vec) if c})
        basis.append(p.scaled_to_leading_one())
    return KernelReport(n, columns, rows, matrix, tuple(basis), len(basis))


def example_system_row(k: int, eta: MultiIndex, n: int) -> dict:
    """Equation obtained by pairing against ``H_{k+2} * eta``, from closed-form coefficients.

    Returns ``{beta: coefficient}`` over the ``n``-noise Noise/Quad space.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    _check_nq(Poly.monomial(eta), "example_system_row")
    space = set(_noise_quad_space(n))
    out: dict = {}

    def add(beta, c):
        if beta in space and c:
            out[beta] = out.get(beta, 0) + Fraction(c)

    b0 = eta * quad(k)
    add(b0, -2 * b0[quad(k)])
    # Q_{m-1} or N_{m-1} must divide eta, so m is bounded by the largest index + 1
    top = max((v.k for v in eta.variables()), default=-1) + 1
    for m in range(1, top + 1):
        q = quad(m - 1)
        if q in eta:
            bm = eta.divide(q) * quad(k + m)
            add(bm, -bm[quad(k + m)] * math.comb(k + m + 1, k + 2))
        z = noise(m - 1)
        if z in eta:
            bh = eta.divide(z) * noise(k + m)
            coeff = Fraction(
                math.factorial(k + m) * (k - m + 3),
                math.factorial(m - 1) * math.factorial(k + 2),
            )
            add(bh, bh[noise(k + m)] * coeff)
    return {b: c for b, c in out.items() if c}


@dataclass(frozen=True)
class GeoBasis:
    """Basis of the geometric counterterms picked from iterated covariant derivatives."""

    elements: tuple  # (noise count, bracketing label, value)
    dimension: int
    by_noise: tuple  # (noise count, dimension)


def geo_basis_xi(ctx: GradingContext, even_only: bool = False) -> GeoBasis:
    top = n_xi(ctx)
    elements = []
    by_noise = []
    for i in range(2, top + 1):
        if even_only and i % 2:
            continue
        target = novikov_dimension(i)
        span = IncrementalSpan()
        for term in generate_nabla_set(i):
            if span.add(dict(term.value)):
                if not phi_geo_hat(term.value).is_zero():
                    raise ArithmeticError(f"{term.label} is not in the kernel")
                elements.append((i, term.label, term.value))
                if len(span) == target:
                    break
        by_noise.append((i, len(span)))
    return GeoBasis(tuple(elements), len(elements), tuple(by_noise))


@dataclass(frozen=True)
class CountertermRow:
    beta: MultiIndex
    homogeneity: Fraction
    noises: int
    fertility: int
    sigma_factor: int
    upsilon_prefactor: int
    upsilon: str
    ito: bool
    geometric: bool
    limit_negative: bool

    @property
    def constant(self) -> str:
        return f"C[{format_multiindex(self.beta)}]"


def counterterm_report(ctx: GradingContext, gaussian: bool = False) -> list:
    """One row per reduced negative multi-index (even ones only when ``gaussian``)."""
    rows = []
    for beta in enumerate_reduced(ctx, gaussian):
        n = noise_count(beta)
        support = set()
        for v in assemble_kernel_matrix(n).kernel_basis:
            support |= v.support()
        pref, sym = upsilon_render(beta)
        h = homogeneity(beta, ctx)
        rows.append(
            CountertermRow(
                beta=beta,
                homogeneity=h,
                noises=n,
                fertility=fertility(beta),
                sigma_factor=symmetry_factor(beta),
                upsilon_prefactor=pref,
                upsilon=sym,
                ito=ito_member(beta),
                geometric=beta in support,
                limit_negative=ctx.limit_mode,
            )
        )
    return rows
