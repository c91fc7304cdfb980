"""Self-checks pinned to reference sets, fiber sizes and worked linear systems.

Each check returns a :class:`CheckResult`; :func:`run_checks` runs them all
and never raises, so a corrupted constant shows up as a named failure.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    GradingContext,
    MultiIndex,
    Poly,
    diff,
    fertility,
    func,
    homogeneity_closed_form,
    lin,
    nabla,
    noise,
    noise_count,
    parse_multiindex,
    poly,
    projection_pi,
    quad,
    upsilon_exponent_vector,
)
from .enumeration import (
    enumerate_negative,
    enumerate_pure_noise,
    enumerate_reduced,
    extended_family,
    generate_nabla_set,
    group_by_homogeneity,
    n_xi,
    novikov_dimension,
)
from .geometry import (
    assemble_kernel_matrix,
    example_system_row,
    ito_member,
    ito_sign_flip,
    noise_quad_space,
    phi_geo_hat,
)
from .linalg import IncrementalSpan
from .trees import ABSTRACT, I1, DecoratedTree, fiber, leaf, lambda_map, psi_map

__all__ = ["CheckResult", "run_checks", "brute_force_negative", "NEGATIVE_SET", "REDUCED_SET"]

# reference negative multi-indices at delta = 1^-, by homogeneity class
NEGATIVE_SET = {
    Fraction(-3, 2): ["N0"],
    Fraction(-1): ["N0*N1", "N0^2*Q0"],
    Fraction(-1, 2): [
        "N0^2*N2", "N0*N1^2", "N0*L0", "N1*X0,1",
        "N0^2*N1*Q0", "N0^3*Q0^2", "N0^3*Q1",
    ],
    Fraction(0): [
        "N0*N1^3", "N0*N1*L0", "N0^3*N3", "N0^2*N1*N2", "N0^2*N1^2*Q0",
        "N0^2*L0*Q0", "N0^3*N1*Q0^2", "N0^3*N1*Q1", "N0^3*N2*Q0", "N0^2*L1",
        "N0^4*Q0^3", "N0^4*Q2", "N0^4*Q0*Q1", "N0*N2*X0,1", "N1^2*X0,1",
        "N0^2*Q1*X0,1", "N0*N1*Q0*X0,1",
    ],
}
# negative multi-indices absent from the reference list
NEGATIVE_SET_UNLISTED = ["N0*Q0*X0,1", "N0^2*Q0^2*X0,1"]

# reduced multi-indices at delta = 1^- with their fiber sizes
REDUCED_SET = {
    Fraction(-1): {"N0*N1": 1, "N0^2*Q0": 1},
    Fraction(-1, 2): {
        "N0^2*N2": 1, "N0*N1^2": 1, "N0^2*N1*Q0": 2, "N0^3*Q0^2": 1, "N0^3*Q1": 1,
    },
    Fraction(0): {
        "N0*N1^3": 1, "N0^3*N3": 1, "N0^2*N1*N2": 2, "N0^2*N1^2*Q0": 4,
        "N0^3*N2*Q0": 2, "N0^3*N1*Q0^2": 4, "N0^4*Q0^3": 2, "N0^4*Q0*Q1": 3,
        "N0^4*Q2": 1, "N0^3*N1*Q1": 3,
    },
}

# worked four-noise linear system: (k, remainder, {column: coefficient})
FOUR_NOISE_ROWS = [
    (2, "N0^4", {"N0^4*Q2": -2, "N0^3*N3": 1}),
    (1, "N0^4*Q0", {"N0^4*Q0*Q1": -2, "N0^4*Q2": -1, "N0^3*N2*Q0": 1}),
    (1, "N0^3*N1", {"N0^3*N1*Q1": -2, "N0^3*N3": 2, "N0^2*N1*N2": 1}),
    (0, "N0^4*Q0^2", {"N0^4*Q0^3": -6, "N0^4*Q0*Q1": -1, "N0^3*N1*Q0^2": 1}),
    (0, "N0^2*N1^2", {"N0^2*N1^2*Q0": -2, "N0*N1^3": 3, "N0^2*N1*N2": 1}),
    (0, "N0^3*N1*Q0", {
        "N0^3*N1*Q0^2": -4, "N0^3*N1*Q1": -1, "N0^2*N1^2*Q0": 2, "N0^3*N2*Q0": 1,
    }),
    (0, "N0^4*Q1", {"N0^4*Q0*Q1": -2, "N0^3*N1*Q1": 1, "N0^4*Q2": -3}),
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float = 0.0


class _Fail(Exception):
    pass


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise _Fail(msg)


def _mi(texts) -> set:
    return {parse_multiindex(t) for t in texts}


def _fmt(betas) -> str:
    return ", ".join(sorted(str(b) for b in betas)) or "-"


def brute_force_negative(ctx: GradingContext) -> set:
    """Negative fertility-one multi-indices by joining exponent vectors on fertility.

    Noise and Quad exponent vectors are generated independently over
    bounded index ranges; the remaining factor is empty, one Lin, one Func
    or a polynomial of small degree.  Homogeneity uses the closed form.
    """
    top = max(1, ctx.max_noises())
    idx = range(top + 2)

    def vectors(max_total, slots=len(idx)):
        if slots == 0:
            yield ()
            return
        for first in range(max_total + 1):
            for rest in vectors(max_total - first, slots - 1):
                yield (first,) + rest

    noises = {}
    for exps in vectors(top):
        n = sum(exps)
        if n == 0:
            continue
        f = sum((1 - m) * e for m, e in zip(idx, exps))
        noises.setdefault((f, n), []).append(exps)
    quads = {}
    for exps in vectors(top + 1):
        f = sum((-1 - k) * e for k, e in zip(idx, exps))
        quads.setdefault(f, []).append(exps)
    extras = [MultiIndex()]
    extras += [MultiIndex.of(lin(k)) for k in idx]
    extras += [MultiIndex.of(func(k)) for k in idx]
    extras += [MultiIndex.of(v) for v in (poly(0, 1), poly(0, 2), poly(1, 0))]
    extras += [MultiIndex.of(poly(0, 1), poly(0, 1))]
    extras += [MultiIndex.of(lin(a), lin(b)) for a in idx for b in idx if a <= b]
    extras += [MultiIndex.of(lin(a), poly(0, 1)) for a in idx]
    out = set()
    for extra in extras:
        fe = fertility(extra)
        for (fn, n), nlist in noises.items():
            # the closed form depends only on the noise count and the extra factor
            probe = MultiIndex.of(*([noise(0)] * n)) * extra
            h = homogeneity_closed_form(probe, ctx.delta)
            if not (h <= 0 if ctx.limit_mode else h < 0):
                continue
            for qexps in quads.get(1 - fn - fe, ()):
                q = MultiIndex((quad(k), e) for k, e in zip(idx, qexps))
                for nexps in nlist:
                    out.add(MultiIndex((noise(m), e) for m, e in zip(idx, nexps)) * q * extra)
    return out


def _check_negative_set():
    ctx = GradingContext(Fraction(1), limit_mode=True)
    t0 = time.perf_counter()
    got = enumerate_negative(ctx)
    elapsed = time.perf_counter() - t0
    listed = set().union(*(_mi(v) for v in NEGATIVE_SET.values()))
    missing = listed - set(got)
    _expect(not missing, f"listed elements not produced: {_fmt(missing)}")
    extra = set(got) - listed
    _expect(extra == _mi(NEGATIVE_SET_UNLISTED), f"unexpected extra elements: {_fmt(extra)}")
    sizes = {h: len(g) for h, g in group_by_homogeneity(got, ctx)}
    expect = {Fraction(-3, 2): 1, Fraction(-1): 2, Fraction(-1, 2): 8, Fraction(0): 18}
    _expect(sizes == expect, f"class sizes {sizes}")
    _expect(elapsed < 1.0, f"took {elapsed:.2f}s")
    return "27 listed + 2 omitted fertility-one elements, classes {-3/2:1, -1:2, -1/2:8, 0:18}"


def _check_reduced_set():
    ctx = GradingContext(Fraction(1), limit_mode=True)
    got = enumerate_reduced(ctx)
    classes = {h: set(g) for h, g in group_by_homogeneity(got, ctx)}
    expect = {h: _mi(v) for h, v in REDUCED_SET.items()}
    _expect(classes == expect, f"classes differ: {_fmt(got)}")
    even = enumerate_reduced(ctx, even_only=True)
    _expect(len(even) == 12, f"even filter gave {len(even)}")
    return "17 elements {-1:2, -1/2:5, 0:10}; even filter 12"


def _check_fibers():
    for texts in REDUCED_SET.values():
        for text, size in texts.items():
            got = len(fiber(parse_multiindex(text)))
            _expect(got == size, f"fiber of {text}: {got} != {size}")
    cherry = DecoratedTree(ABSTRACT, [(I1, leaf()), (I1, leaf())])
    balanced = DecoratedTree(ABSTRACT, [(I1, cherry), (I1, cherry)])
    chain = DecoratedTree(
        ABSTRACT, [(I1, leaf()), (I1, DecoratedTree(ABSTRACT, [(I1, leaf()), (I1, cherry)]))]
    )
    target = parse_multiindex("N0^4*Q0^3")
    _expect(psi_map(balanced) == target and psi_map(chain) == target, "display trees")
    return "all 17 fiber sizes match; both display trees project to N0^4*Q0^3"


def _check_dimensions(max_noises):
    top = max(max_noises, 2)
    expect = {2: 1, 3: 2, 4: 3, 5: 5, 6: 7}
    dims = {}
    t0 = time.perf_counter()
    for n in range(2, top + 1):
        dims[n] = assemble_kernel_matrix(n).dimension
        if n in expect:
            _expect(dims[n] == expect[n], f"N={n}: dimension {dims[n]} != {expect[n]}")
        _expect(dims[n] == novikov_dimension(n), f"N={n}: differs from pure-noise count")
    if top >= 4:
        _expect(len(assemble_kernel_matrix(4).columns) == 10, "N=4 space is not 10-dimensional")
    _expect(time.perf_counter() - t0 < 30, "too slow")
    return "dims " + ", ".join(f"N={n}:{d}" for n, d in dims.items())


def _partitions(n: int) -> int:
    # Euler's pentagonal recurrence
    p = [1] + [0] * n
    for i in range(1, n + 1):
        k, total = 1, 0
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > i:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[i - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= i:
                total += sign * p[i - g2]
            k += 1
        p[i] = total
    return p[n]


def _check_novikov():
    for n in range(2, 13):
        _expect(novikov_dimension(n) == _partitions(n - 1), f"N={n}")
    return "card = p(N-1) for N = 2..12"


def _nabla_by_label(n):
    return {t.label: t.value for t in generate_nabla_set(n)}


def _check_projections():
    e = _nabla_by_label(4)
    a = projection_pi(e["nabla(o,nabla(o,nabla(o,o)))"])
    b = projection_pi(e["nabla(nabla(nabla(o,o),o),o)"])
    c = projection_pi(e["nabla(o,nabla(nabla(o,o),o))"])
    _expect(a == Poly.parse("N0^3*N3 + 4*N0^2*N1*N2 + N0*N1^3"), f"first: {a}")
    _expect(b == Poly.parse("N0*N1^3"), f"second: {b}")
    _expect(c == Poly.parse("2*N0^2*N1*N2 + N0*N1^3"), f"third: {c}")
    span = IncrementalSpan()
    _expect(all(span.add(dict(p)) for p in (a, b, c)), "family is dependent")
    return "three projections match; rank 3"


def _check_relations():
    e = _nabla_by_label(4)
    r1 = e["nabla(nabla(o,o),nabla(o,o))"] - e["nabla(nabla(o,nabla(o,o)),o)"]
    r2 = (
        e["nabla(nabla(o,nabla(o,o)),o)"] * 2
        - e["nabla(o,nabla(nabla(o,o),o))"]
        - e["nabla(nabla(nabla(o,o),o),o)"]
    )
    _expect(r1.is_zero(), f"first relation leaves {r1}")
    _expect(r2.is_zero(), f"second relation leaves {r2}")
    span = IncrementalSpan()
    for p in e.values():
        span.add(dict(p))
    _expect(len(e) == 5 and len(span) == 3, f"{len(e)} expressions, rank {len(span)}")
    return "both relations exact; 5 expressions of rank 3"


def _normalised(eq: dict) -> dict:
    if not eq:
        return eq
    lead = eq[min(eq, key=MultiIndex.sort_key)]
    return {b: c / lead for b, c in eq.items()}


def _check_four_noise_system():
    report = assemble_kernel_matrix(4)
    for k, eta_text, coeffs in FOUR_NOISE_ROWS:
        eta = parse_multiindex(eta_text)
        expect = {parse_multiindex(t): Fraction(c) for t, c in coeffs.items()}
        closed = example_system_row(k, eta, 4)
        _expect(closed == expect, f"k={k}, eta={eta_text}: closed form {closed}")
        row = report.row_equation(eta * diff(k + 2))
        _expect(_normalised(row) == _normalised(closed), f"k={k}, eta={eta_text}: matrix row")
    return "7 rows reproduced and matched against the matrix"


def _check_closure(max_noises):
    top = max(max_noises, 4)
    pairs = 0
    for n1 in range(2, top - 1):
        for n2 in range(2, top - n1 + 1):
            for v1 in assemble_kernel_matrix(n1).kernel_basis:
                for v2 in assemble_kernel_matrix(n2).kernel_basis:
                    _expect(phi_geo_hat(nabla(v1, v2)).is_zero(), f"N1={n1}, N2={n2}")
                    pairs += 1
    return f"{pairs} pairs with total noise <= {top}"


def _check_section(max_noises):
    count = 0
    for n in range(2, max_noises + 1):
        for beta in enumerate_pure_noise(n):
            lam = lambda_map(beta)
            _expect(projection_pi(lam) == Poly.monomial(beta), f"pi(Lambda({beta}))")
            _expect(phi_geo_hat(lam).is_zero(), f"phi_hat(Lambda({beta}))")
            count += 1
    return f"{count} pure-noise multi-indices"


def _check_injectivity(max_noises):
    family = extended_family(max_noises)
    vecs = Counter(upsilon_exponent_vector(b) for b in family)
    dup = [v for v, c in vecs.items() if c > 1]
    _expect(not dup, f"{len(dup)} repeated exponent vectors")
    return f"{len(family)} extended multi-indices, all vectors distinct"


def _check_ito(max_noises):
    top = max(max_noises, 2)
    count = 0
    for n in range(1, top + 1):
        for beta in noise_quad_space(n):
            even = noise_count(beta) % 2 == 0
            _expect(ito_member(beta) == even, f"{beta}")
            _expect(ito_sign_flip(beta) == (1 if even else -1), f"sign of {beta}")
            count += 1
    return f"{count} multi-indices up to {top} noises"


def _check_sweep():
    one = GradingContext(Fraction(1), limit_mode=True)
    half = GradingContext(Fraction(1, 2), limit_mode=True)
    _expect(n_xi(one) == 4, f"n_xi(1) = {n_xi(one)}")
    _expect(n_xi(half) == 8, f"n_xi(1/2) = {n_xi(half)}")
    for d in (Fraction(1), Fraction(3, 4), Fraction(1, 2)):
        for limit in (True, False):
            ctx = GradingContext(d, limit_mode=limit)
            got = set(enumerate_negative(ctx))
            ref = brute_force_negative(ctx)
            _expect(got == ref, f"delta={d}, limit={limit}: {_fmt(got ^ ref)}")
    return "n_xi = 4, 8; enumerator = brute force at delta 1, 3/4, 1/2"


def run_checks(max_noises: int = 5) -> list:
    if max_noises < 2:
        raise ValueError("max_noises must be at least 2")
    checks = [
        ("negative-set", _check_negative_set),
        ("reduced-set", _check_reduced_set),
        ("fiber-counts", _check_fibers),
        ("geometric-dimensions", lambda: _check_dimensions(max_noises)),
        ("novikov-partitions", _check_novikov),
        ("nabla-projections", _check_projections),
        ("nabla-relations", _check_relations),
        ("closure-under-nabla", lambda: _check_closure(max_noises)),
        ("section-lambda", lambda: _check_section(max_noises)),
        ("upsilon-injectivity", lambda: _check_injectivity(max_noises)),
        ("ito-parity", lambda: _check_ito(max_noises)),
        ("delta-sweep", _check_sweep),
    ]
    if max_noises >= 4:
        checks.insert(7, ("four-noise-system", _check_four_noise_system))
    results = []
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            detail = fn()
            ok = True
        except _Fail as exc:
            ok, detail = False, str(exc)
        except Exception as exc:  # a crash is a failed check, not a crashed run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, ok, detail, time.perf_counter() - t0))
    return results
