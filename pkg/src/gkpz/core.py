"""Multi-index monomials, their gradings and the elementary operators on them.

A multi-index is a finitely supported exponent map over an alphabet of
abstract variables.  Six variable families are used:

========  =====  ==========================================================
kind      token  meaning
========  =====  ==========================================================
NOISE     ``N``  noise coefficient and its derivatives, ``sigma^(m)``
QUAD      ``Q``  coefficient of the squared gradient, ``2 Gamma^(k)``
LIN       ``L``  coefficient of the linear gradient term
FUNC      ``F``  gradient-free non-linearity
DIFF      ``H``  infinitesimal change of coordinates, ``h^(k)``
POLY      ``X``  space-time polynomial ``X^(n1, n2)``
========  =====  ==========================================================

All coefficients are :class:`fractions.Fraction`, so every computation here
is exact.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Union

__all__ = [
    "Kind",
    "Variable",
    "MultiIndex",
    "Poly",
    "GradingContext",
    "DomainError",
    "MultiIndexSyntaxError",
    "noise",
    "quad",
    "lin",
    "func",
    "diff",
    "poly",
    "parse_rational",
    "parse_multiindex",
    "format_multiindex",
    "fertility",
    "noise_count",
    "homogeneity",
    "homogeneity_closed_form",
    "symmetry_factor",
    "derivation_D",
    "bracket",
    "nabla",
    "projection_pi",
    "upsilon_render",
    "upsilon_exponent_vector",
    "upsilon_at_origin",
]

Scalar = Union[int, Fraction]

# alpha_Xi = CRITICAL_REGULARITY + delta / 2; read at call time.
CRITICAL_REGULARITY = Fraction(-2)


class DomainError(ValueError):
    """An operator received a variable outside the alphabet it acts on."""


class MultiIndexSyntaxError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class Kind(IntEnum):
    NOISE = 0
    QUAD = 1
    LIN = 2
    FUNC = 3
    DIFF = 4
    POLY = 5


_TOKENS = {
    Kind.NOISE: "N",
    Kind.QUAD: "Q",
    Kind.LIN: "L",
    Kind.FUNC: "F",
    Kind.DIFF: "H",
    Kind.POLY: "X",
}
_KIND_OF_TOKEN = {tok: kind for kind, tok in _TOKENS.items()}


@dataclass(frozen=True, order=True)
class Variable:
    """One abstract variable; ordering is by kind, then index."""

    kind: Kind
    index: tuple

    def __post_init__(self):
        arity = 2 if self.kind is Kind.POLY else 1
        if len(self.index) != arity or any(
            not isinstance(i, int) or i < 0 for i in self.index
        ):
            raise ValueError(f"bad index {self.index!r} for {self.kind.name}")
        if self.kind is Kind.POLY and self.index == (0, 0):
            raise ValueError("X0,0 is the constant monomial, not a variable")

    @property
    def k(self) -> int:
        """Derivative index of a non-polynomial variable."""
        return self.index[0]

    @property
    def length(self) -> int:
        """Number of incoming tree edges the variable stands for."""
        kind, k = self.kind, self.index[0]
        if kind is Kind.QUAD:
            return k + 2
        if kind is Kind.LIN:
            return k + 1
        if kind is Kind.POLY:
            return 0
        return k

    def raised(self, by: int = 1) -> "Variable":
        return Variable(self.kind, (self.index[0] + by,))

    def token(self) -> str:
        if self.kind is Kind.POLY:
            return f"X{self.index[0]},{self.index[1]}"
        return f"{_TOKENS[self.kind]}{self.index[0]}"

    def __str__(self):
        return self.token()


def noise(m: int) -> Variable:
    return Variable(Kind.NOISE, (m,))


def quad(k: int) -> Variable:
    return Variable(Kind.QUAD, (k,))


def lin(k: int) -> Variable:
    return Variable(Kind.LIN, (k,))


def func(k: int) -> Variable:
    return Variable(Kind.FUNC, (k,))


def diff(k: int) -> Variable:
    return Variable(Kind.DIFF, (k,))


def poly(n1: int, n2: int) -> Variable:
    return Variable(Kind.POLY, (n1, n2))


class MultiIndex:
    """Immutable monomial ``z^beta``: sorted ``(Variable, exponent)`` pairs."""

    __slots__ = ("_items", "_hash")

    def __init__(self, exponents: Mapping[Variable, int] | Iterable = ()):
        if isinstance(exponents, Mapping):
            pairs = exponents.items()
        else:
            pairs = exponents
        merged: dict[Variable, int] = {}
        for var, e in pairs:
            if not isinstance(var, Variable):
                raise TypeError(f"expected Variable, got {var!r}")
            if e < 0:
                raise ValueError(f"negative exponent for {var}")
            merged[var] = merged.get(var, 0) + e
        self._items = tuple(sorted((v, e) for v, e in merged.items() if e))
        self._hash = hash(self._items)

    @classmethod
    def _from_sorted(cls, items: tuple) -> "MultiIndex":
        obj = cls.__new__(cls)
        obj._items = items
        obj._hash = hash(items)
        return obj

    @classmethod
    def of(cls, *variables: Variable) -> "MultiIndex":
        """Product of the given variables, repetitions allowed."""
        return cls((v, 1) for v in variables)

    @classmethod
    def parse(cls, text: str) -> "MultiIndex":
        return parse_multiindex(text)

    def items(self) -> tuple:
        return self._items

    def variables(self) -> tuple:
        return tuple(v for v, _ in self._items)

    def expanded(self) -> tuple:
        """Variables repeated by multiplicity, in canonical order."""
        return tuple(v for v, e in self._items for _ in range(e))

    def __getitem__(self, var: Variable) -> int:
        for v, e in self._items:
            if v == var:
                return e
        return 0

    def __contains__(self, var: Variable) -> bool:
        return self[var] > 0

    def __iter__(self) -> Iterator[Variable]:
        return iter(self.variables())

    def __len__(self):
        return len(self._items)

    @property
    def degree(self) -> int:
        return sum(e for _, e in self._items)

    def kinds(self) -> frozenset:
        return frozenset(v.kind for v, _ in self._items)

    def count(self, kind: Kind) -> int:
        return sum(e for v, e in self._items if v.kind is kind)

    def __mul__(self, other: "MultiIndex | Variable") -> "MultiIndex":
        if isinstance(other, Variable):
            other = MultiIndex._from_sorted(((other, 1),))
        if not isinstance(other, MultiIndex):
            return NotImplemented
        if not other._items:
            return self
        if not self._items:
            return other
        merged = dict(self._items)
        for v, e in other._items:
            merged[v] = merged.get(v, 0) + e
        return MultiIndex._from_sorted(tuple(sorted(merged.items())))

    __rmul__ = __mul__

    def divide(self, var: Variable, times: int = 1) -> "MultiIndex":
        """Remove ``times`` copies of ``var``; raises if not present."""
        merged = dict(self._items)
        e = merged.get(var, 0)
        if e < times:
            raise ValueError(f"{var} does not divide {self}")
        if e == times:
            del merged[var]
        else:
            merged[var] = e - times
        return MultiIndex._from_sorted(tuple(sorted(merged.items())))

    def __eq__(self, other):
        if not isinstance(other, MultiIndex):
            return NotImplemented
        return self._items == other._items

    def __hash__(self):
        return self._hash

    def sort_key(self) -> tuple:
        """Canonical monomial order: total degree, then the sorted variable list."""
        return (self.degree, self.expanded())

    def __lt__(self, other: "MultiIndex") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return format_multiindex(self)

    def __repr__(self):
        return f"MultiIndex({format_multiindex(self)!r})"


ONE = MultiIndex()


def format_multiindex(beta: MultiIndex) -> str:
    if not beta.items():
        return "1"
    return "*".join(
        v.token() if e == 1 else f"{v.token()}^{e}" for v, e in beta.items()
    )


_FACTOR_RE = re.compile(r"([NQLFHX])(\d+)(?:,(\d+))?(?:\^(\d+))?")


def parse_multiindex(text: str) -> MultiIndex:
    """Parse ``"N0^2*Q0"``-style text; ``"1"`` denotes the empty monomial."""
    s = text.strip()
    if s == "1":
        return ONE
    if not s:
        raise MultiIndexSyntaxError("empty monomial", text, 0)
    offset = len(text) - len(text.lstrip())
    pairs = []
    pos = 0
    while True:
        m = _FACTOR_RE.match(s, pos)
        if m is None:
            raise MultiIndexSyntaxError("expected a variable", text, offset + pos)
        tok, a, b, e = m.groups()
        kind = _KIND_OF_TOKEN[tok]
        if (kind is Kind.POLY) != (b is not None):
            where = offset + (m.start(3) - 1 if b is not None else m.start(0))
            raise MultiIndexSyntaxError(
                "X takes two indices, other variables one", text, where
            )
        index = (int(a), int(b)) if b is not None else (int(a),)
        if index == (0, 0) and kind is Kind.POLY:
            raise MultiIndexSyntaxError(
                "X0,0 is the constant monomial and not a variable",
                text,
                offset + m.start(),
            )
        pairs.append((Variable(kind, index), int(e) if e is not None else 1))
        pos = m.end()
        if pos == len(s):
            break
        if s[pos] == "*":
            pos += 1
        elif s[pos] == " ":
            while pos < len(s) and s[pos] == " ":
                pos += 1
        else:
            raise MultiIndexSyntaxError("expected '*' or space", text, offset + pos)
    return MultiIndex(pairs)


def parse_rational(text: str) -> Fraction:
    """Parse ``"P/Q"`` or ``"P"``; decimals and floats are rejected."""
    m = re.fullmatch(r"\s*([+-]?\d+)(?:/(\d+))?\s*", text)
    if m is None:
        raise ValueError(f"not a rational of the form P/Q: {text!r}")
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(m.group(1)), den)


class Poly:
    """Finite rational combination of monomials; immutable."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[MultiIndex, Scalar] | Iterable = ()):
        if isinstance(terms, Mapping):
            pairs = terms.items()
        else:
            pairs = terms
        acc: dict[MultiIndex, Fraction] = {}
        for beta, c in pairs:
            acc[beta] = acc.get(beta, 0) + Fraction(c)
        self._terms = {b: c for b, c in acc.items() if c}

    @classmethod
    def _raw(cls, terms: dict) -> "Poly":
        obj = cls.__new__(cls)
        obj._terms = terms
        return obj

    @classmethod
    def monomial(cls, beta: MultiIndex | Variable, coeff: Scalar = 1) -> "Poly":
        if isinstance(beta, Variable):
            beta = MultiIndex.of(beta)
        return cls({beta: coeff})

    @classmethod
    def parse(cls, text: str) -> "Poly":
        """Parse ``"N0*N1 + 1/2*N0^2*Q0 - 3*Q1"``."""
        s = text.replace(" - ", " + -").strip()
        if s in ("", "0"):
            return cls()
        terms = []
        for chunk in s.split(" + "):
            chunk = chunk.strip()
            m = re.fullmatch(r"([+-]?\d+(?:/\d+)?)\*(.+)", chunk)
            if m:
                terms.append((parse_multiindex(m.group(2)), parse_rational(m.group(1))))
            elif chunk.startswith("-"):
                terms.append((parse_multiindex(chunk[1:]), -1))
            elif re.fullmatch(r"[+-]?\d+(?:/\d+)?", chunk):
                terms.append((ONE, parse_rational(chunk)))
            else:
                terms.append((parse_multiindex(chunk), 1))
        return cls(terms)

    def terms(self) -> list:
        """``(MultiIndex, Fraction)`` pairs in canonical monomial order."""
        return sorted(self._terms.items(), key=lambda t: t[0].sort_key())

    def support(self) -> frozenset:
        return frozenset(self._terms)

    def coefficient(self, beta: MultiIndex) -> Fraction:
        """The pairing ``<z^beta, self>``."""
        return self._terms.get(beta, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def kinds(self) -> frozenset:
        out = set()
        for beta in self._terms:
            out |= beta.kinds()
        return frozenset(out)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly({ONE: other}) if other else Poly()
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __add__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            return NotImplemented
        out = dict(self._terms)
        for b, c in other._terms.items():
            s = out.get(b, 0) + c
            if s:
                out[b] = s
            else:
                out.pop(b, None)
        return Poly._raw(out)

    def __neg__(self) -> "Poly":
        return Poly._raw({b: -c for b, c in self._terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            if not other:
                return Poly()
            f = Fraction(other)
            return Poly._raw({b: c * f for b, c in self._terms.items()})
        if isinstance(other, (MultiIndex, Variable)):
            other = Poly.monomial(other)
        if not isinstance(other, Poly):
            return NotImplemented
        out: dict[MultiIndex, Fraction] = {}
        for b1, c1 in self._terms.items():
            for b2, c2 in other._terms.items():
                b = b1 * b2
                out[b] = out.get(b, 0) + c1 * c2
        return Poly._raw({b: c for b, c in out.items() if c})

    __rmul__ = __mul__

    def scaled_to_leading_one(self) -> "Poly":
        """Divide by the coefficient of the first monomial in canonical order."""
        if not self._terms:
            return self
        return self * (1 / self.terms()[0][1])

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for beta, c in self.terms():
            mono = format_multiindex(beta)
            if beta == ONE:
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    def __repr__(self):
        return f"Poly({str(self)!r})"


def _as_poly(p) -> Poly:
    if isinstance(p, Poly):
        return p
    if isinstance(p, (MultiIndex, Variable)):
        return Poly.monomial(p)
    raise TypeError(f"expected Poly, got {type(p).__name__}")


@dataclass(frozen=True)
class GradingContext:
    """Noise regularity ``delta`` and the negativity convention.

    With ``limit_mode`` the context stands for ``delta - kappa`` with
    ``kappa`` small: a multi-index carrying noise is negative when its
    homogeneity at ``delta`` is ``<= 0``.
    """

    delta: Fraction
    limit_mode: bool = False

    def __post_init__(self):
        d = self.delta
        if isinstance(d, str):
            d = parse_rational(d)
        d = Fraction(d)
        if not 0 < d <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {d}")
        object.__setattr__(self, "delta", d)

    @property
    def alpha_noise(self) -> Fraction:
        return CRITICAL_REGULARITY + self.delta / 2

    @property
    def alpha_zero(self) -> Fraction:
        return Fraction(0)

    def is_negative(self, beta: MultiIndex) -> bool:
        h = homogeneity(beta, self)
        if self.limit_mode and noise_count(beta) > 0:
            return h <= 0
        return h < 0

    def max_noises(self) -> int:
        """Largest noise count compatible with negativity."""
        bound = 4 / self.delta
        n = math.floor(bound)
        if n == bound and not self.limit_mode:
            n -= 1
        return n


def parabolic_degree(var: Variable) -> int:
    n1, n2 = var.index
    return 2 * n1 + n2


def fertility(beta: MultiIndex) -> int:
    total = 0
    for v, e in beta.items():
        total += e if v.kind is Kind.POLY else (1 - v.length) * e
    return total


def noise_count(beta: MultiIndex) -> int:
    return beta.count(Kind.NOISE)


def homogeneity(beta: MultiIndex, ctx: GradingContext) -> Fraction:
    """Sum of per-variable homogeneities at ``ctx.delta``."""
    total = Fraction(0)
    for v, e in beta.items():
        kind = v.kind
        if kind is Kind.NOISE:
            h = ctx.alpha_noise + 2 * v.k
        elif kind is Kind.QUAD:
            h = ctx.alpha_zero + 2 * v.k + 2
        elif kind is Kind.LIN:
            h = ctx.alpha_zero + 2 * v.k + 1
        elif kind is Kind.FUNC:
            h = ctx.alpha_zero + 2 * v.k
        elif kind is Kind.POLY:
            h = Fraction(parabolic_degree(v) - 2)
        else:
            h = Fraction(0)
        total += h * e
    return total


def homogeneity_closed_form(beta: MultiIndex, delta: Fraction) -> Fraction:
    """Homogeneity of a populated (fertility one) multi-index without Diff factors.

    Depends only on the counts of noise, Lin and Func factors and on the
    polynomial degrees; the derivative indices drop out.
    """
    extra = beta.count(Kind.LIN) + 2 * beta.count(Kind.FUNC)
    extra += sum(parabolic_degree(v) * e for v, e in beta.items() if v.kind is Kind.POLY)
    return noise_count(beta) * Fraction(delta) / 2 - 2 + extra


def symmetry_factor(beta: MultiIndex) -> int:
    out = 1
    for v, e in beta.items():
        if v.kind is not Kind.POLY:
            out *= math.factorial(v.k) ** e
    return out


_D_KINDS = frozenset({Kind.DIFF, Kind.QUAD, Kind.NOISE})
_NQ_KINDS = frozenset({Kind.NOISE, Kind.QUAD})


def _check_alphabet(p: Poly, allowed: frozenset, op: str) -> None:
    bad = p.kinds() - allowed
    if bad:
        names = ", ".join(sorted(k.name for k in bad))
        raise DomainError(f"{op} is not defined on {names} variables")


@lru_cache(maxsize=200_000)
def _d_monomial(beta: MultiIndex) -> tuple:
    out: dict[MultiIndex, int] = {}
    for v, e in beta.items():
        target = beta.divide(v) * v.raised()
        out[target] = out.get(target, 0) + e
    return tuple(out.items())


def derivation_D(p) -> Poly:
    """Index-raising derivation on the H/Q/N alphabet, extended by Leibniz."""
    p = _as_poly(p)
    _check_alphabet(p, _D_KINDS, "D")
    out: dict[MultiIndex, Fraction] = {}
    for beta, c in p:
        for target, mult in _d_monomial(beta):
            out[target] = out.get(target, 0) + c * mult
    return Poly._raw({b: c for b, c in out.items() if c})


def derivation_power(p, k: int) -> Poly:
    p = _as_poly(p)
    for _ in range(k):
        p = derivation_D(p)
    return p


def bracket(p, q) -> Poly:
    """``[p, q] = p Dq - q Dp``."""
    p, q = _as_poly(p), _as_poly(q)
    return p * derivation_D(q) - q * derivation_D(p)


_HALF_Q0 = None


def nabla(v1, v2) -> Poly:
    """Covariant derivative ``v1 Dv2 + 1/2 Q0 v1 v2`` on the N/Q alphabet."""
    global _HALF_Q0
    v1, v2 = _as_poly(v1), _as_poly(v2)
    _check_alphabet(v1, _NQ_KINDS, "nabla")
    _check_alphabet(v2, _NQ_KINDS, "nabla")
    if _HALF_Q0 is None:
        _HALF_Q0 = Poly.monomial(quad(0), Fraction(1, 2))
    return v1 * derivation_D(v2) + _HALF_Q0 * v1 * v2


def projection_pi(p) -> Poly:
    """Drop every monomial containing a Quad variable."""
    p = _as_poly(p)
    _check_alphabet(p, _NQ_KINDS, "pi")
    return Poly._raw({b: c for b, c in p if Kind.QUAD not in b.kinds()})


_UPSILON_SYMBOL = {Kind.DIFF: "h", Kind.QUAD: "G", Kind.NOISE: "s"}
_UPSILON_ORDER = (Kind.DIFF, Kind.QUAD, Kind.NOISE)


def upsilon_render(beta: MultiIndex) -> tuple:
    """Elementary differential of ``beta`` as ``(prefactor, symbol string)``.

    Factors appear as ``h(k)``, ``G(k)``, ``s(k)`` for derivatives of the
    coordinate change, of Gamma and of sigma; each ``G`` carries a factor 2.
    """
    _check_alphabet(Poly.monomial(beta), _D_KINDS, "Upsilon")
    factors = []
    for kind in _UPSILON_ORDER:
        for v, e in beta.items():
            if v.kind is kind:
                sym = f"{_UPSILON_SYMBOL[kind]}({v.k})"
                factors.append(sym if e == 1 else f"{sym}^{e}")
    prefactor = 2 ** beta.count(Kind.QUAD)
    return prefactor, "·".join(factors) if factors else "1"


def upsilon_exponent_vector(beta: MultiIndex) -> tuple:
    """Exponents of ``(r_k, s_k, t_k)`` in the Taylor-parameter monomial.

    Flattened as ``(beta(H k), beta(Q k), beta(N k))`` for ``k = 0..max``.
    """
    _check_alphabet(Poly.monomial(beta), _D_KINDS, "Upsilon")
    top = max((v.k for v in beta.variables()), default=-1)
    out = []
    for k in range(top + 1):
        out.extend((beta[diff(k)], beta[quad(k)], beta[noise(k)]))
    return tuple(out)


def upsilon_at_origin(beta: MultiIndex, r, s, t) -> Fraction:
    """Value at ``u = 0`` of the elementary differential for polynomial data.

    ``r``, ``s``, ``t`` are the Taylor coefficients ``h^(k)(0)``,
    ``Gamma^(k)(0)`` and ``sigma^(k)(0)``.
    """
    vec = upsilon_exponent_vector(beta)
    out = Fraction(1)
    for k in range(len(vec) // 3):
        a, b, c = vec[3 * k : 3 * k + 3]
        out *= Fraction(r[k]) ** a * (2 * Fraction(s[k])) ** b * Fraction(t[k]) ** c
    return out
