from __future__ import annotations

from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from gkpz.core import GradingContext, Poly, nabla, parse_multiindex, projection_pi
from gkpz.enumeration import enumerate_pure_noise, enumerate_reduced
from gkpz.trees import (
    ABSTRACT,
    I,
    I1,
    NOISE,
    DecoratedTree,
    TreeError,
    all_noise_trees,
    fiber,
    graft,
    lambda_map,
    leaf,
    node,
    parse_tree,
    psi_map,
    tilde_psi,
    tilde_psi_with_pivot,
)

M = parse_multiindex
CHERRY = node(ABSTRACT, (I1, leaf()), (I1, leaf()))


def test_canonical_child_order():
    t = node(ABSTRACT, (I, leaf()), (I1, leaf()), (I1, leaf()))
    assert t.encode() == "Xi0(I1:Xi,I1:Xi,I:Xi)"
    assert node(NOISE, CHERRY, leaf()) == node(NOISE, leaf(), CHERRY)


def test_parse_round_trip_and_errors():
    for text in ("Xi", "Xi0(I1:Xi,I1:Xi)", "Xi(I:Xi,I:Xi0(I1:Xi,I1:Xi(I:Xi)))"):
        assert parse_tree(text).encode() == text
    for bad in ("Y", "Xi(", "Xi(J:Xi)", "Xi(I:Xi", "Xi)"):
        with pytest.raises(TreeError):
            parse_tree(bad)


def test_counts_and_saturation():
    t = node(NOISE, CHERRY, leaf())
    assert t.node_count == 5 and t.edge_count == 4
    assert t.is_saturated() and not t.is_all_noise()
    assert not node(ABSTRACT, (I1, leaf())).is_saturated()
    assert not node(NOISE, (I1, leaf())).is_saturated()


def test_psi_map_examples():
    assert psi_map(CHERRY) == M("N0^2*Q0")
    assert psi_map(node(NOISE, leaf())) == M("N0*N1")
    balanced = node(ABSTRACT, (I1, CHERRY), (I1, CHERRY))
    assert psi_map(balanced) == M("N0^4*Q0^3")
    with pytest.raises(TreeError):
        psi_map(node(NOISE, (I1, leaf())))


# fiber sizes of the reduced set at delta = 1, frozen from the brute-force oracle
FIBERS = {
    "N0*N1": 1, "N0^2*Q0": 1, "N0^2*N2": 1, "N0*N1^2": 1, "N0^2*N1*Q0": 2,
    "N0^3*Q0^2": 1, "N0^3*Q1": 1, "N0*N1^3": 1, "N0^3*N3": 1, "N0^2*N1*N2": 2,
    "N0^2*N1^2*Q0": 4, "N0^3*N2*Q0": 2, "N0^3*N1*Q0^2": 4, "N0^4*Q0^3": 2,
    "N0^4*Q0*Q1": 3, "N0^4*Q2": 1, "N0^3*N1*Q1": 3,
}


@pytest.mark.parametrize("text, size", sorted(FIBERS.items()))
def test_fiber_sizes(text, size):
    trees = fiber(M(text))
    assert len(trees) == size
    assert {t.encode() for t in trees} == {
        oracles.tree_to_string(t) for t in oracles.brute_fiber(oracles.raw_from_text(text))
    }
    assert all(psi_map(t) == M(text) and t.is_saturated() for t in trees)


def test_reduced_set_is_covered_by_fibers():
    red = enumerate_reduced(GradingContext(Fraction(1), limit_mode=True))
    from gkpz.core import format_multiindex

    assert {format_multiindex(b) for b in red} == set(FIBERS)


def test_fiber_rejects_bad_input():
    assert fiber(M("N0^2")) == []
    with pytest.raises(TreeError):
        fiber(M("N0*L0"))
    with pytest.raises(TreeError):
        fiber(M("N0^2*N2"), max_nodes=2)


def test_fiber_is_sorted():
    trees = fiber(M("N0^3*N1*Q0^2"))
    assert trees == sorted(trees, key=DecoratedTree.encode)


@pytest.mark.parametrize("n, count", [(1, 1), (2, 1), (3, 2), (4, 4), (5, 9), (6, 20)])
def test_all_noise_tree_counts(n, count):
    assert len(all_noise_trees(n)) == count
    assert len(all_noise_trees(n)) == len(oracles.shapes(n))


def test_graft_example():
    g = graft(leaf(), node(NOISE, leaf()))
    assert g == Counter({node(NOISE, leaf(), leaf()): 1, node(NOISE, node(NOISE, leaf())): 1})


_NOISE_TREES = st.integers(1, 4).flatmap(lambda n: st.sampled_from(all_noise_trees(n)))


def _assoc(a, b, c):
    # (a -> b) -> c  minus  a -> (b -> c)
    out = Counter()
    for t, m in graft(a, b).items():
        for u, k in graft(t, c).items():
            out[u] += m * k
    for t, m in graft(b, c).items():
        for u, k in graft(a, t).items():
            out[u] -= m * k
    return out


@given(_NOISE_TREES, _NOISE_TREES, _NOISE_TREES)
@settings(max_examples=40, deadline=None)
def test_grafting_is_pre_lie(a, b, c):
    lhs, rhs = _assoc(a, b, c), _assoc(b, a, c)
    lhs.subtract(rhs)
    assert all(v == 0 for v in lhs.values())


@given(_NOISE_TREES)
@settings(max_examples=40, deadline=None)
def test_tilde_psi_projects_to_psi(t):
    assert projection_pi(tilde_psi(t)) == Poly.monomial(psi_map(t))


@pytest.mark.parametrize("n", range(1, 6))
def test_tilde_psi_is_pivot_independent(n):
    for t in all_noise_trees(n):
        vals = {str(tilde_psi_with_pivot(t, p)) for p in range(len(t.children))} or {str(tilde_psi(t))}
        assert vals == {str(tilde_psi(t))}


@given(_NOISE_TREES, _NOISE_TREES)
@settings(max_examples=30, deadline=None)
def test_tilde_psi_is_pre_lie_morphism(a, b):
    lhs = Poly()
    for t, m in graft(a, b).items():
        lhs = lhs + tilde_psi(t) * m
    assert lhs == nabla(tilde_psi(a), tilde_psi(b))


def test_tilde_psi_rejects_non_noise():
    with pytest.raises(TreeError):
        tilde_psi(CHERRY)


@pytest.mark.parametrize("n", range(2, 6))
def test_lambda_is_section(n):
    for beta in enumerate_pure_noise(n):
        assert projection_pi(lambda_map(beta)) == Poly.monomial(beta)


def test_lambda_rejects_quad():
    with pytest.raises(TreeError):
        lambda_map(M("N0^2*Q0"))
