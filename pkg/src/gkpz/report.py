"""Rendering of command payloads as text, JSON and LaTeX."""

from __future__ import annotations

import json
from fractions import Fraction

from .core import Kind, MultiIndex, Poly, format_multiindex

SCHEMA_VERSION = 1

_LATEX_SYMBOL = {
    Kind.NOISE: r"\Xi",
    Kind.QUAD: r"\partial^2",
    Kind.LIN: r"\partial",
    Kind.FUNC: "0",
    Kind.DIFF: "h",
}


def frac(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def homogeneity_label(h: Fraction, limit: bool) -> str:
    return f"{frac(h)} (limit-negative)" if limit else frac(h)


def latex_monomial(beta: MultiIndex) -> str:
    parts = []
    for v, e in beta.items():
        if v.kind is Kind.POLY:
            base = f"z_{{({v.index[0]},{v.index[1]})}}"
        else:
            base = f"z_{{({_LATEX_SYMBOL[v.kind]},{v.k})}}"
        parts.append(base if e == 1 else f"{base}^{{{e}}}")
    return " ".join(parts) or "1"


def latex_rational(h: Fraction, limit: bool) -> str:
    if h.denominator == 1:
        body = str(h.numerator)
    else:
        sign = "-" if h < 0 else ""
        body = f"{sign}\\frac{{{abs(h.numerator)}}}{{{h.denominator}}}"
    return f"({body})^-" if limit else f"({body})"


def poly_text(p: Poly) -> str:
    return str(p)


def document(command: str, parameters: dict, payload) -> dict:
    from . import __version__

    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "version": __version__,
        "parameters": parameters,
        "payload": payload,
    }


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def beta_record(beta: MultiIndex, h: Fraction, noises: int, fert: int, sigma: int, limit: bool) -> dict:
    return {
        "beta": format_multiindex(beta),
        "homogeneity": frac(h),
        "noises": noises,
        "fertility": fert,
        "sigma_factor": sigma,
        "limit_negative": limit,
    }


def grouped_text(title: str, groups: list, extra=None) -> str:
    """``groups`` is ``[(h, limit, [record, ...]), ...]``."""
    lines = [title]
    total = 0
    for h, limit, records in groups:
        lines.append(f"|beta| = {homogeneity_label(h, limit)}: {len(records)}")
        for rec in records:
            tail = f"  {extra(rec)}" if extra else ""
            lines.append(f"  {rec['beta']}{tail}")
        total += len(records)
    lines.append(f"total: {total}")
    return "\n".join(lines) + "\n"


def grouped_latex(groups: list, with_trees: bool = False) -> str:
    cols = "c | c | c | c" if with_trees else "c | c | c"
    head = r"$|\beta|$ & $\beta$ & " + ("Fiber & " if with_trees else "") + r"$\#\{\beta\}$ \\"
    lines = [f"\\begin{{tabular}}{{{cols}}}", head, r"\hline"]
    for h, limit, records in groups:
        betas = ", ".join(f"${latex_monomial(r['_beta'])}$" for r in records)
        row = [f"${latex_rational(h, limit)}$", betas]
        if with_trees:
            row.append(", ".join(str(r["fiber_size"]) for r in records))
        row.append(str(len(records)))
        lines.append(" & ".join(row) + r" \\")
        lines.append(r"\hline")
    lines.append(r"\end{tabular}")
    return "\n".join(lines) + "\n"


def strip_private(obj):
    if isinstance(obj, dict):
        return {k: strip_private(v) for k, v in obj.items() if not k.startswith("_")}
    if isinstance(obj, list):
        return [strip_private(v) for v in obj]
    return obj
