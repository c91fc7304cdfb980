from __future__ import annotations

from fractions import Fraction

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gkpz.linalg import IncrementalSpan, RationalMatrix, mat_vec, nullspace_basis, rank, rref

_ENTRY = st.fractions(min_value=-4, max_value=4, max_denominator=3)


@st.composite
def matrices(draw):
    r = draw(st.integers(1, 5))
    c = draw(st.integers(1, 5))
    rows = [[draw(st.one_of(st.just(Fraction(0)), _ENTRY)) for _ in range(c)] for _ in range(r)]
    return RationalMatrix.from_rows(rows)


def _sympy(m):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in m.to_rows()])


def test_rref_small_example():
    m = RationalMatrix.from_rows([[1, 2, 3], [2, 4, 7]])
    red, piv = rref(m)
    assert piv == (0, 2)
    assert red.to_rows() == [[1, 2, 0], [0, 0, 1]]
    assert nullspace_basis(m) == [[Fraction(-2), Fraction(1), Fraction(0)]]


def test_identity_has_full_rank():
    assert rank(RationalMatrix.identity(4)) == 4
    assert nullspace_basis(RationalMatrix.identity(3)) == []


@given(matrices())
@settings(max_examples=80)
def test_rref_agrees_with_sympy(m):
    red, piv = rref(m)
    s_red, s_piv = _sympy(m).rref()
    assert piv == tuple(s_piv)
    assert red.to_rows() == [[Fraction(int(x.p), int(x.q)) for x in s_red.row(i)] for i in range(m.rows)]


@given(matrices())
@settings(max_examples=80)
def test_nullspace_is_kernel_of_right_dimension(m):
    basis = nullspace_basis(m)
    assert len(basis) == m.cols - rank(m)
    for v in basis:
        assert all(x == 0 for x in mat_vec(m, v))


@given(st.lists(st.dictionaries(st.sampled_from("abcd"), _ENTRY, max_size=4), max_size=6))
def test_incremental_span_tracks_rank(vectors):
    span = IncrementalSpan()
    for v in vectors:
        span.add(v)
    keys = sorted("abcd")
    mat = RationalMatrix.from_rows([[v.get(k, Fraction(0)) for k in keys] for v in vectors] or [[0] * 4])
    assert len(span) == rank(mat)
    for v in vectors:
        assert span.contains(v)
