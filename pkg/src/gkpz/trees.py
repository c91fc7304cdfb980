"""Decorated rooted trees, grafting, and the maps between trees and multi-indices.

Nodes are either noise nodes (``Xi``) or abstract nodes (``Xi0``).  Edges are
plain integrations ``I`` or derivative integrations ``I1``.  A tree is
saturated when every abstract node has exactly two ``I1`` children and noise
nodes have only ``I`` children; such trees project to Noise/Quad
multi-indices.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Iterator

from .core import (
    Kind,
    MultiIndex,
    Poly,
    fertility,
    nabla,
    noise,
    quad,
)

__all__ = [
    "NOISE",
    "ABSTRACT",
    "I",
    "I1",
    "DecoratedTree",
    "TreeError",
    "leaf",
    "node",
    "parse_tree",
    "graft",
    "graft_at_all_nodes",
    "psi_map",
    "fiber",
    "tilde_psi",
    "tilde_psi_with_pivot",
    "lambda_map",
    "all_noise_trees",
]

NOISE = "Xi"
ABSTRACT = "Xi0"
I = "I"
I1 = "I1"
_EDGE_RANK = {I1: 0, I: 1}


class TreeError(ValueError):
    pass


class DecoratedTree:
    """Immutable tree in canonical form; equality is isomorphism."""

    __slots__ = ("label", "children", "_code", "_hash")

    def __init__(self, label: str, children=()):
        if label not in (NOISE, ABSTRACT):
            raise TreeError(f"unknown node label {label!r}")
        kids = []
        for edge, child in children:
            if edge not in _EDGE_RANK:
                raise TreeError(f"unknown edge kind {edge!r}")
            if not isinstance(child, DecoratedTree):
                raise TypeError("children must be DecoratedTree instances")
            kids.append((edge, child))
        kids.sort(key=lambda ec: (_EDGE_RANK[ec[0]], ec[1]._code))
        self.label = label
        self.children = tuple(kids)
        if kids:
            inner = ",".join(f"{e}:{c._code}" for e, c in kids)
            self._code = f"{label}({inner})"
        else:
            self._code = label
        self._hash = hash(self._code)

    def encode(self) -> str:
        return self._code

    def __str__(self):
        return self._code

    def __repr__(self):
        return f"DecoratedTree({self._code!r})"

    def __eq__(self, other):
        if not isinstance(other, DecoratedTree):
            return NotImplemented
        return self._code == other._code

    def __hash__(self):
        return self._hash

    def __lt__(self, other: "DecoratedTree"):
        return self._code < other._code

    def canonical(self) -> "DecoratedTree":
        return DecoratedTree(self.label, self.children)

    def with_children(self, children) -> "DecoratedTree":
        return DecoratedTree(self.label, children)

    @property
    def node_count(self) -> int:
        return 1 + sum(c.node_count for _, c in self.children)

    @property
    def edge_count(self) -> int:
        return self.node_count - 1

    def is_saturated(self) -> bool:
        edges = [e for e, _ in self.children]
        if self.label == NOISE:
            ok = I1 not in edges
        else:
            ok = edges.count(I1) == 2
        return ok and all(c.is_saturated() for _, c in self.children)

    def is_all_noise(self) -> bool:
        return self.label == NOISE and all(
            e == I and c.is_all_noise() for e, c in self.children
        )


def leaf() -> DecoratedTree:
    return DecoratedTree(NOISE)


def node(label: str, *children) -> DecoratedTree:
    """``node("Xi0", ("I1", t1), ("I1", t2))``; bare trees default to edge ``I``."""
    pairs = [c if isinstance(c, tuple) else (I, c) for c in children]
    return DecoratedTree(label, pairs)


def parse_tree(text: str) -> DecoratedTree:
    """Inverse of :meth:`DecoratedTree.encode`, e.g. ``"Xi0(I1:Xi,I1:Xi)"``."""
    pos = 0
    s = text.strip()

    def parse_node():
        nonlocal pos
        for label in (ABSTRACT, NOISE):
            if s.startswith(label, pos):
                pos += len(label)
                break
        else:
            raise TreeError(f"expected a node label at position {pos}: {text!r}")
        children = []
        if pos < len(s) and s[pos] == "(":
            pos += 1
            while True:
                for edge in (I1, I):
                    if s.startswith(edge + ":", pos):
                        pos += len(edge) + 1
                        break
                else:
                    raise TreeError(f"expected an edge at position {pos}: {text!r}")
                children.append((edge, parse_node()))
                if pos < len(s) and s[pos] == ",":
                    pos += 1
                    continue
                if pos < len(s) and s[pos] == ")":
                    pos += 1
                    break
                raise TreeError(f"unbalanced tree at position {pos}: {text!r}")
        return DecoratedTree(label, children)

    tree = parse_node()
    if pos != len(s):
        raise TreeError(f"trailing input at position {pos}: {text!r}")
    return tree


def graft_at_all_nodes(sigma: DecoratedTree, tau: DecoratedTree) -> Iterator[DecoratedTree]:
    """Attach ``sigma`` by a new ``I`` edge at each node of ``tau`` in turn."""
    yield tau.with_children(tau.children + ((I, sigma),))
    for i, (edge, child) in enumerate(tau.children):
        for grafted in graft_at_all_nodes(sigma, child):
            kids = tau.children[:i] + ((edge, grafted),) + tau.children[i + 1 :]
            yield tau.with_children(kids)


def graft(sigma: DecoratedTree, tau: DecoratedTree) -> Counter:
    """Grafting product ``sigma -> tau`` as a multiset of canonical trees."""
    return Counter(graft_at_all_nodes(sigma, tau))


def psi_map(tau: DecoratedTree) -> MultiIndex:
    """Project a saturated tree to its Noise/Quad multi-index."""
    edges = [e for e, _ in tau.children]
    n_i = edges.count(I)
    if tau.label == NOISE:
        if I1 in edges:
            raise TreeError(f"noise node with a derivative edge: {tau}")
        var = noise(n_i)
    else:
        if edges.count(I1) != 2:
            raise TreeError(f"abstract node without exactly two I1 edges: {tau}")
        var = quad(n_i)
    out = MultiIndex.of(var)
    for _, child in tau.children:
        out = out * psi_map(child)
    return out


def _sub_multisets(beta: MultiIndex) -> Iterator[MultiIndex]:
    items = beta.items()
    for exps in product(*(range(e + 1) for _, e in items)):
        yield MultiIndex(zip((v for v, _ in items), exps))


@lru_cache(maxsize=None)
def _trees_of(beta: MultiIndex) -> frozenset:
    out = set()
    for root in beta.variables():
        rest = beta.divide(root)
        arity = root.length
        for forest in _forests_of(rest, arity):
            if root.kind is Kind.NOISE:
                out.add(DecoratedTree(NOISE, [(I, t) for t in forest]))
            else:
                for pair in combinations(range(arity), 2):
                    kids = [(I1 if i in pair else I, t) for i, t in enumerate(forest)]
                    out.add(DecoratedTree(ABSTRACT, kids))
    return frozenset(out)


@lru_cache(maxsize=None)
def _forests_of(beta: MultiIndex, count: int) -> frozenset:
    """Unordered ``count``-tuples of trees whose projections multiply to ``beta``."""
    if count == 0:
        return frozenset({()}) if beta.degree == 0 else frozenset()
    if beta.degree < count:
        return frozenset()
    first = beta.variables()[0]
    out = set()
    for block in _sub_multisets(beta):
        if first not in block or fertility(block) != 1:
            continue
        rest = MultiIndex(
            (v, e - block[v]) for v, e in beta.items()
        )
        for t in _trees_of(block):
            for f in _forests_of(rest, count - 1):
                out.add(tuple(sorted((t,) + f)))
    return frozenset(out)


def fiber(beta: MultiIndex, max_nodes: int = 64) -> list:
    """All canonical saturated trees projecting to ``beta``, sorted by encoding."""
    if not beta.kinds() <= {Kind.NOISE, Kind.QUAD}:
        raise TreeError("fibers are defined for Noise/Quad multi-indices only")
    if fertility(beta) != 1:
        return []
    if beta.degree > max_nodes:
        raise TreeError(f"{beta} needs {beta.degree} nodes, above max_nodes={max_nodes}")
    return sorted(_trees_of(beta))


def _children_trees(tau: DecoratedTree) -> tuple:
    return tuple(c for _, c in tau.children)


def _bud(children) -> DecoratedTree:
    return DecoratedTree(NOISE, [(I, c) for c in children])


@lru_cache(maxsize=None)
def tilde_psi(tau: DecoratedTree) -> Poly:
    """Pre-Lie morphism from all-noise trees to the covariant-derivative algebra."""
    return tilde_psi_with_pivot(tau, 0)


def tilde_psi_with_pivot(tau: DecoratedTree, pivot: int) -> Poly:
    """Evaluate the recursion splitting off the child at position ``pivot``.

    The value does not depend on ``pivot``; exposing it lets that be checked.
    """
    if not tau.is_all_noise():
        raise TreeError(f"not an all-noise tree: {tau}")
    kids = list(_children_trees(tau))
    if not kids:
        return Poly.monomial(noise(0))
    t1 = kids.pop(pivot)
    out = nabla(tilde_psi(t1), tilde_psi(_bud(kids)))
    for i, ti in enumerate(kids):
        for grafted, mult in graft(t1, ti).items():
            replaced = kids[:i] + [grafted] + kids[i + 1 :]
            out = out - tilde_psi(_bud(replaced)) * mult
    return out


def lambda_map(beta: MultiIndex) -> Poly:
    """Average of ``tilde_psi`` over the fiber of a pure-noise multi-index."""
    if not beta.kinds() <= {Kind.NOISE}:
        raise TreeError("lambda_map is defined on pure-noise multi-indices")
    trees = fiber(beta)
    if not trees:
        raise TreeError(f"{beta} has an empty fiber")
    total = Poly()
    for t in trees:
        total = total + tilde_psi(t)
    return total * Fraction(1, len(trees))


def all_noise_trees(nodes: int) -> list:
    """Every all-noise tree with the given number of nodes (rooted unlabelled trees)."""
    return sorted(_all_noise(nodes))


@lru_cache(maxsize=None)
def _all_noise(nodes: int) -> frozenset:
    if nodes == 1:
        return frozenset({leaf()})
    out = set()
    for forest in _noise_forests(nodes - 1, nodes - 1):
        out.add(_bud(forest))
    return frozenset(out)


def _noise_forests(nodes: int, cap: int) -> Iterator[tuple]:
    # forests as non-increasing size sequences to limit duplicates
    if nodes == 0:
        yield ()
        return
    for size in range(min(nodes, cap), 0, -1):
        for t in _all_noise(size):
            for rest in _noise_forests(nodes - size, size):
                yield (t,) + rest
