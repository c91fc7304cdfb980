from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from gkpz.core import GradingContext, fertility, homogeneity, noise_count, parse_multiindex, projection_pi
from gkpz.enumeration import (
    bounded_multisets,
    enumerate_negative,
    enumerate_pure_noise,
    enumerate_reduced,
    extended_family,
    generate_nabla_set,
    group_by_homogeneity,
    n_xi,
    novikov_dimension,
)

LIMIT_ONE = GradingContext(Fraction(1), limit_mode=True)


@lru_cache(maxsize=None)
def _brute(delta, limit):
    return frozenset(oracles.brute_negative(delta, limit))


def _raw(betas):
    return {oracles.from_beta(b) for b in betas}


@pytest.mark.parametrize("delta", [Fraction(1), Fraction(3, 4), Fraction(1, 2)])
@pytest.mark.parametrize("limit", [True, False])
def test_negative_set_matches_brute_force(delta, limit):
    got = enumerate_negative(GradingContext(delta, limit_mode=limit))
    assert len(got) == len(set(got))
    assert _raw(got) == _brute(delta, limit)


def test_negative_set_at_one_frozen_sizes():
    # frozen from the brute-force oracle
    got = enumerate_negative(LIMIT_ONE)
    assert len(got) == 29
    sizes = {h: len(m) for h, m in group_by_homogeneity(got, LIMIT_ONE)}
    assert sizes == {Fraction(-3, 2): 1, Fraction(-1): 2, Fraction(-1, 2): 8, Fraction(0): 18}
    assert len(enumerate_negative(GradingContext(Fraction(1)))) == 11


def test_negative_set_contains_polynomial_members():
    got = set(enumerate_negative(LIMIT_ONE))
    for text in ("N0", "N1*X0,1", "N0*Q0*X0,1", "N0^2*Q0^2*X0,1", "N0^4*Q0^3"):
        assert parse_multiindex(text) in got


def test_enumerators_are_sorted_and_deterministic():
    a = enumerate_negative(LIMIT_ONE)
    assert a == enumerate_negative(LIMIT_ONE)
    keys = [b.sort_key() for b in a]
    assert keys == sorted(keys)


def test_reduced_sets():
    red = enumerate_reduced(LIMIT_ONE)
    assert len(red) == 17
    assert len(enumerate_reduced(LIMIT_ONE, even_only=True)) == 12
    assert all(noise_count(b) % 2 == 0 for b in enumerate_reduced(LIMIT_ONE, even_only=True))
    assert {oracles.from_beta(b) for b in red} == {
        m for m in _brute(Fraction(1), True)
        if all(l in "NQ" for l, _ in m) and oracles.raw_noises(m) >= 2
    }


@pytest.mark.parametrize(
    "delta, limit, expect",
    [(Fraction(1), True, 4), (Fraction(1), False, 3), (Fraction(1, 2), True, 8), (Fraction(1, 2), False, 7)],
)
def test_n_xi(delta, limit, expect):
    assert n_xi(GradingContext(delta, limit_mode=limit)) == expect


@pytest.mark.parametrize("n", range(2, 10))
def test_pure_noise_is_partitions(n):
    got = enumerate_pure_noise(n)
    assert _raw(got) == oracles.pure_noise(n)
    assert novikov_dimension(n) == oracles.partitions_count(n - 1)


def test_pure_noise_rejects_small():
    with pytest.raises(ValueError):
        enumerate_pure_noise(1)
    with pytest.raises(ValueError):
        generate_nabla_set(0)


@pytest.mark.parametrize("n, count", [(2, 1), (3, 2), (4, 5), (5, 14)])
def test_nabla_set_has_catalan_size(n, count):
    terms = generate_nabla_set(n)
    assert len(terms) == count
    assert terms[0].label.startswith("nabla(")


@pytest.mark.parametrize("n", range(2, 6))
def test_nabla_images_span_pure_noise(n):
    from gkpz.linalg import IncrementalSpan

    span = IncrementalSpan()
    for t in generate_nabla_set(n):
        span.add({b: c for b, c in projection_pi(t.value)})
    assert len(span) == novikov_dimension(n)


def test_extended_family():
    fam = extended_family(5)
    assert len(fam) == 535
    assert all(fertility(b) == 1 for b in fam)
    assert all(sum(e for v, e in b.items() if v.kind.name == "DIFF") <= 2 for b in fam)


@given(st.integers(0, 6), st.integers(0, 8))
def test_bounded_multisets(size, total):
    got = list(bounded_multisets(size, total))
    assert len(got) == len(set(got))
    for t in got:
        assert len(t) == size and sum(t) == total and list(t) == sorted(t, reverse=True)


@given(st.fractions(min_value=Fraction(1, 2), max_value=1, max_denominator=6), st.booleans())
@settings(max_examples=15, deadline=None)
def test_enumeration_invariants(delta, limit):
    ctx = GradingContext(delta, limit_mode=limit)
    got = enumerate_negative(ctx)
    for b in got:
        assert fertility(b) == 1 and noise_count(b) > 0 and ctx.is_negative(b)
    groups = group_by_homogeneity(got, ctx)
    assert [h for h, _ in groups] == sorted(h for h, _ in groups)
    assert sum(len(m) for _, m in groups) == len(got)
    assert Counter(homogeneity(b, ctx) for b in got) == Counter({h: len(m) for h, m in groups})
