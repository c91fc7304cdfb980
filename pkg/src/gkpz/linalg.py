"""Exact dense linear algebra over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

__all__ = ["RationalMatrix", "rref", "rank", "nullspace_basis", "mat_vec", "IncrementalSpan"]


class RationalMatrix:
    """Dense row-major matrix of :class:`Fraction` with fixed shape."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Iterable | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative dimension")
        self.rows = rows
        self.cols = cols
        if data is None:
            self._data = [[Fraction(0)] * cols for _ in range(rows)]
        else:
            self._data = [[Fraction(x) for x in row] for row in data]
            if len(self._data) != rows or any(len(r) != cols for r in self._data):
                raise ValueError("data does not match the declared shape")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RationalMatrix":
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(len(rows), cols, rows)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(n, n, [[int(i == j) for j in range(n)] for i in range(n)])

    def __getitem__(self, rc):
        r, c = rc
        return self._data[r][c]

    def row(self, r: int) -> tuple:
        return tuple(self._data[r])

    def column(self, c: int) -> tuple:
        return tuple(row[c] for row in self._data)

    def to_rows(self) -> list:
        return [list(r) for r in self._data]

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return (self.rows, self.cols, self._data) == (other.rows, other.cols, other._data)

    def __repr__(self):
        return f"RationalMatrix({self.rows}x{self.cols})"


def rref(m: RationalMatrix) -> tuple:
    """Reduced row-echelon form and the tuple of pivot columns."""
    a = m.to_rows()
    pivots = []
    r = 0
    for c in range(m.cols):
        if r == m.rows:
            break
        p = next((i for i in range(r, m.rows) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        pivot_row = [x * inv if x else x for x in a[r]]
        a[r] = pivot_row
        nz = [j for j in range(c, m.cols) if pivot_row[j]]
        for i in range(m.rows):
            if i != r and a[i][c]:
                f = a[i][c]
                row = a[i]
                for j in nz:
                    row[j] -= f * pivot_row[j]
        pivots.append(c)
        r += 1
    return RationalMatrix(m.rows, m.cols, a), tuple(pivots)


def rank(m: RationalMatrix) -> int:
    return len(rref(m)[1])


def nullspace_basis(m: RationalMatrix) -> list:
    """One basis vector per free column, with a 1 in that column."""
    reduced, pivots = rref(m)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * m.cols
        v[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -reduced[i, free]
        basis.append(v)
    return basis


def mat_vec(m: RationalMatrix, v: Sequence) -> list:
    return [sum((x * y for x, y in zip(row, v) if x), Fraction(0)) for row in m.to_rows()]


class IncrementalSpan:
    """Echelon basis of a growing set of sparse vectors (dicts key -> Fraction).

    ``add`` reports whether the vector enlarged the span; keys are compared
    with ``<`` to pick pivots.
    """

    def __init__(self):
        self._rows: dict = {}

    def __len__(self):
        return len(self._rows)

    def reduce(self, vec: dict) -> dict:
        v = {k: Fraction(x) for k, x in vec.items() if x}
        while v:
            lead = min(v)
            row = self._rows.get(lead)
            if row is None:
                return v
            f = v[lead]
            for k, x in row.items():
                s = v.get(k, 0) - f * x
                if s:
                    v[k] = s
                else:
                    v.pop(k, None)
        return v

    def add(self, vec: dict) -> bool:
        v = self.reduce(vec)
        if not v:
            return False
        lead = min(v)
        inv = 1 / v[lead]
        self._rows[lead] = {k: x * inv for k, x in v.items()}
        return True

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)
