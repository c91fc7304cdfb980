"""Finite multi-index sets: negative, reduced, pure-noise, and iterated-nabla families.

The enumerators share one generator.  A multi-index of fertility one with
``F`` non-polynomial factors and ``P`` polynomial factors has total length
``F + P - 1``, which turns the search into distributing a fixed budget of
derivative indices among the factors.  The number of noises and of the
extra factors (Lin, Func, polynomial) is bounded by the closed-form
homogeneity, so everything terminates.  Each candidate is re-checked with
the grading functions of :mod:`gkpz.core` before being returned.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, NamedTuple

from .core import (
    GradingContext,
    Kind,
    MultiIndex,
    Poly,
    diff,
    fertility,
    func,
    homogeneity,
    lin,
    nabla,
    noise,
    noise_count,
    poly,
    quad,
)

__all__ = [
    "NablaTerm",
    "bounded_multisets",
    "enumerate_negative",
    "enumerate_reduced",
    "enumerate_pure_noise",
    "enumerate_populated",
    "group_by_homogeneity",
    "novikov_dimension",
    "generate_nabla_set",
    "n_xi",
    "extended_family",
]


def bounded_multisets(size: int, total: int) -> Iterator[tuple]:
    """Non-increasing tuples of ``size`` nonnegative ints summing to ``total``."""
    if size == 0:
        if total == 0:
            yield ()
        return

    def rec(remaining, slots, cap):
        if slots == 0:
            if remaining == 0:
                yield ()
            return
        top = min(cap, remaining)
        for first in range(top, -1, -1):
            if first * slots < remaining:
                break
            for rest in rec(remaining - first, slots - 1, first):
                yield (first,) + rest

    yield from rec(total, size, total)


def _poly_multisets(budget: int) -> Iterator[tuple]:
    """Multisets of polynomial variables with total parabolic degree <= budget."""
    options = [
        (n1, n2)
        for n1 in range(budget // 2 + 1)
        for n2 in range(budget + 1)
        if 0 < 2 * n1 + n2 <= budget
    ]
    options.sort()

    def rec(start, left):
        yield ()
        for i in range(start, len(options)):
            n1, n2 = options[i]
            cost = 2 * n1 + n2
            if cost <= left:
                for rest in rec(i, left - cost):
                    yield ((n1, n2),) + rest

    yield from rec(0, budget)


def _extra_budget(n: int, ctx: GradingContext) -> int:
    """Largest ``E`` with ``n*delta/2 - 2 + E`` still negative under ``ctx``."""
    slack = 2 - Fraction(n) * ctx.delta / 2
    e = math.floor(slack)
    if e == slack and not (ctx.limit_mode and n > 0):
        e -= 1
    return e


def enumerate_populated(
    n_noise: int,
    extra_budget: int,
    *,
    kinds: frozenset = frozenset({Kind.NOISE, Kind.QUAD, Kind.LIN, Kind.FUNC, Kind.POLY}),
) -> Iterator[MultiIndex]:
    """All fertility-one multi-indices with ``n_noise`` noises.

    Only Noise, Quad, Lin, Func and polynomial variables listed in ``kinds``
    are used; ``#Lin + 2#Func + sum ||n||`` is at most ``extra_budget``.
    """
    if extra_budget < 0:
        return
    max_lin = extra_budget if Kind.LIN in kinds else 0
    for n_lin in range(max_lin + 1):
        max_func = (extra_budget - n_lin) // 2 if Kind.FUNC in kinds else 0
        for n_func in range(max_func + 1):
            left = extra_budget - n_lin - 2 * n_func
            polys = _poly_multisets(left) if Kind.POLY in kinds else iter([()])
            for pset in polys:
                yield from _fill_indices(n_noise, n_lin, n_func, pset, kinds)


def _fill_indices(n_noise, n_lin, n_func, pset, kinds):
    # total index budget: sum of all derivative indices is fixed by fertility one
    p = len(pset)
    max_quad = n_noise + n_func + p - 1 if Kind.QUAD in kinds else 0
    poly_vars = [poly(*n) for n in pset]
    for n_quad in range(max(max_quad, 0) + 1):
        budget = n_noise - n_quad + n_func + p - 1
        if budget < 0:
            continue
        slots = (n_noise, n_quad, n_lin, n_func)
        for split in _compositions(budget, 4):
            for parts in product(*(bounded_multisets(s, b) for s, b in zip(slots, split))):
                nz, qd, ln, fn = parts
                variables = (
                    [noise(m) for m in nz]
                    + [quad(k) for k in qd]
                    + [lin(k) for k in ln]
                    + [func(k) for k in fn]
                    + poly_vars
                )
                yield MultiIndex.of(*variables)


def _compositions(total: int, parts: int) -> Iterator[tuple]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _verified(candidates, predicate) -> list:
    out = {beta for beta in candidates if predicate(beta)}
    return sorted(out, key=MultiIndex.sort_key)


def enumerate_negative(ctx: GradingContext) -> list:
    """Fertility-one multi-indices with noise that are negative under ``ctx``."""

    def ok(beta):
        return fertility(beta) == 1 and noise_count(beta) > 0 and ctx.is_negative(beta)

    def candidates():
        for n in range(1, ctx.max_noises() + 1):
            yield from enumerate_populated(n, _extra_budget(n, ctx))

    return _verified(candidates(), ok)


def enumerate_reduced(ctx: GradingContext, even_only: bool = False) -> list:
    """Negative Noise/Quad multi-indices with at least two noises."""
    kinds = frozenset({Kind.NOISE, Kind.QUAD})

    def ok(beta):
        n = noise_count(beta)
        return (
            beta.kinds() <= kinds
            and fertility(beta) == 1
            and n >= 2
            and (n % 2 == 0 or not even_only)
            and ctx.is_negative(beta)
        )

    def candidates():
        for n in range(2, ctx.max_noises() + 1):
            if even_only and n % 2:
                continue
            if _extra_budget(n, ctx) >= 0:
                yield from enumerate_populated(n, 0, kinds=kinds)

    return _verified(candidates(), ok)


@lru_cache(maxsize=None)
def _pure_noise(n: int) -> tuple:
    kinds = frozenset({Kind.NOISE})

    def ok(beta):
        return beta.kinds() <= kinds and fertility(beta) == 1 and noise_count(beta) == n

    return tuple(_verified(enumerate_populated(n, 0, kinds=kinds), ok))


def enumerate_pure_noise(n: int) -> list:
    """Noise-only multi-indices with ``n`` noises and fertility one."""
    if n < 2:
        raise ValueError("need at least two noises")
    return list(_pure_noise(n))


def novikov_dimension(n: int) -> int:
    return len(enumerate_pure_noise(n))


def n_xi(ctx: GradingContext, even_only: bool = False) -> int:
    """Largest noise count among reduced negative multi-indices (0 if none)."""
    return max((noise_count(b) for b in enumerate_reduced(ctx, even_only)), default=0)


def group_by_homogeneity(betas, ctx: GradingContext) -> list:
    """``[(homogeneity, [beta, ...]), ...]`` in increasing homogeneity."""
    groups: dict[Fraction, list] = {}
    for beta in betas:
        groups.setdefault(homogeneity(beta, ctx), []).append(beta)
    return sorted(groups.items())


class NablaTerm(NamedTuple):
    """An iterated covariant derivative: its bracketing and its value."""

    label: str
    value: Poly


@lru_cache(maxsize=None)
def _nabla_terms(n: int) -> tuple:
    if n == 1:
        return (NablaTerm("o", Poly.monomial(noise(0))),)
    out = []
    for left in range(1, n):
        for a in _nabla_terms(left):
            for b in _nabla_terms(n - left):
                out.append(NablaTerm(f"nabla({a.label},{b.label})", nabla(a.value, b.value)))
    return tuple(out)


def generate_nabla_set(n: int) -> list:
    """Every bracketing of ``n - 1`` covariant derivatives of the single noise."""
    if n < 2:
        raise ValueError("need at least two noises")
    return list(_nabla_terms(n))


def extended_family(max_noises: int, max_diff: int = 2) -> list:
    """Fertility-one Noise/Quad/Diff multi-indices with at most ``max_diff`` Diff factors.

    Diff factors of index one have fertility zero, so their number must be
    capped for the family to be finite.
    """
    out = set()
    for n in range(max_noises + 1):
        # the Noise/Quad part has fertility f >= 1 - max_diff; its index budget is n - f
        for f in range(1 - max_diff, n + 1):
            budget = n - f
            for n_quad in range(budget + 1):
                left = budget - n_quad
                for a in range(left + 1):
                    for nz in bounded_multisets(n, a):
                        for qd in bounded_multisets(n_quad, left - a):
                            base = MultiIndex.of(*([noise(m) for m in nz] + [quad(k) for k in qd]))
                            for d in range(max_diff + 1):
                                # d Diff factors with total length d - (1 - f)
                                total = d - 1 + f
                                if total < 0:
                                    continue
                                for hs in bounded_multisets(d, total):
                                    beta = base * MultiIndex.of(*(diff(k) for k in hs))
                                    if fertility(beta) == 1 and noise_count(beta) == n:
                                        out.add(beta)
    return sorted(out, key=MultiIndex.sort_key)
