"""Command-line front end: ``gkpz {enumerate,reduced,geo,counterterms,fiber,verify}``."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import report
from .core import (
    GradingContext,
    MultiIndexSyntaxError,
    fertility,
    format_multiindex,
    homogeneity,
    noise_count,
    parse_multiindex,
    parse_rational,
    symmetry_factor,
)
from .enumeration import enumerate_negative, enumerate_reduced, group_by_homogeneity
from .geometry import assemble_kernel_matrix, counterterm_report, geo_basis_xi
from .trees import TreeError, fiber
from .verify import run_checks

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _delta(text: str) -> Fraction:
    try:
        d = parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if not 0 < d <= 1:
        raise argparse.ArgumentTypeError(f"delta must lie in (0, 1], got {text}")
    return d


def _noises(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 2:
        raise argparse.ArgumentTypeError("need at least two noises")
    return n


def _add_grading(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=_delta, default=Fraction(1), help="noise regularity P/Q in (0, 1]")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument(
        "--limit",
        dest="limit",
        action="store_true",
        default=True,
        help="delta^- convention: |beta| <= 0 counts as negative (default)",
    )
    mode.add_argument("--strict", dest="limit", action="store_false", help="require |beta| < 0")


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json", "latex"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gkpz", description="Exact multi-index calculus for the generalised KPZ equation."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="negative multi-indices grouped by homogeneity")
    _add_grading(p)
    _add_format(p)

    p = sub.add_parser("reduced", help="reduced (Noise/Quad) negative multi-indices")
    _add_grading(p)
    p.add_argument("--even", action="store_true", help="keep even noise counts only")
    p.add_argument("--with-fibers", action="store_true", help="list the trees over each entry")
    _add_format(p)

    p = sub.add_parser("geo", help="geometric counterterms")
    p.add_argument("what", choices=("dim", "basis", "xi"))
    p.add_argument("--noises", type=_noises, default=None, help="noise count N >= 2 (dim, basis)")
    _add_grading(p)
    p.add_argument("--even", action="store_true", help="xi: even noise counts only")
    _add_format(p)

    p = sub.add_parser("counterterms", help="counterterms of the renormalised equation")
    _add_grading(p)
    p.add_argument("--gaussian", action="store_true", help="drop odd noise counts")
    _add_format(p)

    p = sub.add_parser("fiber", help="trees projecting to a multi-index")
    p.add_argument("beta", help='multi-index such as "N0^4*Q0^3"')
    _add_format(p)

    p = sub.add_parser("verify", help="run the built-in checks")
    p.add_argument("--max-noises", type=_noises, default=5)
    return parser


def _ctx(args) -> GradingContext:
    return GradingContext(args.delta, limit_mode=args.limit)


def _grading_params(args) -> dict:
    return {"delta": report.frac(args.delta), "limit": args.limit}


def _records(betas, ctx) -> list:
    groups = []
    for h, members in group_by_homogeneity(betas, ctx):
        recs = []
        for b in members:
            rec = report.beta_record(
                b, h, noise_count(b), fertility(b), symmetry_factor(b), ctx.limit_mode
            )
            rec["_beta"] = b
            recs.append(rec)
        groups.append((h, ctx.limit_mode, recs))
    return groups


def _groups_json(groups) -> list:
    return [
        {
            "homogeneity": report.frac(h),
            "limit_negative": limit,
            "count": len(recs),
            "elements": report.strip_private(recs),
        }
        for h, limit, recs in groups
    ]


def cmd_enumerate(args) -> str:
    ctx = _ctx(args)
    groups = _records(enumerate_negative(ctx), ctx)
    if args.format == "json":
        payload = {"total": sum(len(g[2]) for g in groups), "groups": _groups_json(groups)}
        return report.to_json(report.document("enumerate", _grading_params(args), payload))
    if args.format == "latex":
        return report.grouped_latex(groups)
    title = f"negative multi-indices at delta = {report.frac(ctx.delta)}"
    return report.grouped_text(title + (" (limit)" if ctx.limit_mode else ""), groups)


def cmd_reduced(args) -> str:
    ctx = _ctx(args)
    groups = _records(enumerate_reduced(ctx, args.even), ctx)
    if args.with_fibers:
        for _, _, recs in groups:
            for rec in recs:
                trees = fiber(rec["_beta"])
                rec["fiber_size"] = len(trees)
                rec["trees"] = [t.encode() for t in trees]
    params = dict(_grading_params(args), even=args.even, with_fibers=args.with_fibers)
    if args.format == "json":
        payload = {"total": sum(len(g[2]) for g in groups), "groups": _groups_json(groups)}
        return report.to_json(report.document("reduced", params, payload))
    if args.format == "latex":
        return report.grouped_latex(groups, with_trees=args.with_fibers)
    extra = None
    if args.with_fibers:
        extra = lambda rec: f"[{rec['fiber_size']}] " + " ; ".join(rec["trees"])
    title = f"reduced multi-indices at delta = {report.frac(ctx.delta)}"
    if args.even:
        title += ", even noise counts"
    return report.grouped_text(title, groups, extra)


def cmd_geo(args) -> str:
    if args.what == "xi":
        ctx = _ctx(args)
        basis = geo_basis_xi(ctx, args.even)
        params = dict(_grading_params(args), even=args.even)
        if args.format == "json":
            payload = {
                "dimension": basis.dimension,
                "by_noise": [{"noises": n, "dimension": d} for n, d in basis.by_noise],
                "basis": [
                    {"noises": n, "expression": label, "value": str(v)}
                    for n, label, v in basis.elements
                ],
            }
            return report.to_json(report.document("geo xi", params, payload))
        if args.format == "latex":
            rows = [f"{n} & {d} \\\\" for n, d in basis.by_noise]
            body = "\n".join(rows)
            return (
                "\\begin{tabular}{c | c}\n$N$ & $\\dim$ \\\\\n\\hline\n"
                f"{body}\n\\hline\ntotal & {basis.dimension} \\\\\n\\end{{tabular}}\n"
            )
        lines = [f"geometric dimension: {basis.dimension}"]
        lines += [f"  N={n}: {d}" for n, d in basis.by_noise]
        lines += [f"  {label} = {v}" for _, label, v in basis.elements]
        return "\n".join(lines) + "\n"

    if args.noises is None:
        raise _UsageError("geo dim/basis need --noises N")
    rep = assemble_kernel_matrix(args.noises)
    params = {"noises": args.noises}
    if args.format == "json":
        payload = {
            "noises": rep.N,
            "columns": [format_multiindex(c) for c in rep.columns],
            "rows": len(rep.rows),
            "rank": len(rep.columns) - rep.dimension,
            "dimension": rep.dimension,
        }
        if args.what == "basis":
            payload["basis"] = [str(v) for v in rep.kernel_basis]
        return report.to_json(report.document(f"geo {args.what}", params, payload))
    if args.what == "dim":
        if args.format == "latex":
            return f"$\\dim V^{{{rep.N}}}_{{\\mathrm{{geo}}}} = {rep.dimension}$\n"
        return f"{rep.dimension}\n"
    if args.format == "latex":
        return "".join(f"${v}$\\\\\n" for v in rep.kernel_basis)
    return "".join(f"{v}\n" for v in rep.kernel_basis)


def cmd_counterterms(args) -> str:
    ctx = _ctx(args)
    rows = counterterm_report(ctx, args.gaussian)
    params = dict(_grading_params(args), gaussian=args.gaussian)
    if args.format == "json":
        payload = {
            "total": len(rows),
            "rows": [
                {
                    "beta": format_multiindex(r.beta),
                    "constant": r.constant,
                    "homogeneity": report.frac(r.homogeneity),
                    "noises": r.noises,
                    "fertility": r.fertility,
                    "sigma_factor": r.sigma_factor,
                    "upsilon_prefactor": r.upsilon_prefactor,
                    "upsilon": r.upsilon,
                    "ito": r.ito,
                    "geometric": r.geometric,
                    "limit_negative": r.limit_negative,
                }
                for r in rows
            ],
        }
        return report.to_json(report.document("counterterms", params, payload))
    if args.format == "latex":
        lines = [
            r"\begin{tabular}{c | c | c | c | c | c}",
            r"$\beta$ & $|\beta|$ & $\sigma(\beta)$ & $\Upsilon$ & It\^o & geo \\",
            r"\hline",
        ]
        for r in rows:
            ups = r.upsilon.replace("·", r" \cdot ")
            pref = "" if r.upsilon_prefactor == 1 else f"{r.upsilon_prefactor} "
            lines.append(
                f"${report.latex_monomial(r.beta)}$ & ${report.latex_rational(r.homogeneity, r.limit_negative)}$"
                f" & {r.sigma_factor} & ${pref}{ups}$ & {'yes' if r.ito else 'no'}"
                f" & {'yes' if r.geometric else 'no'} \\\\"
            )
        lines.append(r"\end{tabular}")
        return "\n".join(lines) + "\n"
    lines = [f"counterterms at delta = {report.frac(ctx.delta)}" + (", gaussian" if args.gaussian else "")]
    for r in rows:
        pref = "" if r.upsilon_prefactor == 1 else f"{r.upsilon_prefactor}·"
        lines.append(
            f"  {r.constant} / {r.sigma_factor} * {pref}{r.upsilon}"
            f"   |beta| = {report.homogeneity_label(r.homogeneity, r.limit_negative)}"
            f"   ito={'yes' if r.ito else 'no'} geo={'yes' if r.geometric else 'no'}"
        )
    lines.append(f"total: {len(rows)}")
    return "\n".join(lines) + "\n"


def cmd_fiber(args) -> str:
    try:
        beta = parse_multiindex(args.beta)
        trees = fiber(beta)
    except (MultiIndexSyntaxError, TreeError) as exc:
        raise _UsageError(str(exc))
    if args.format == "json":
        payload = {"beta": format_multiindex(beta), "size": len(trees), "trees": [t.encode() for t in trees]}
        return report.to_json(report.document("fiber", {"beta": args.beta}, payload))
    if args.format == "latex":
        return "".join(f"\\texttt{{{t.encode()}}}\\\\\n" for t in trees)
    return "".join(f"{t.encode()}\n" for t in trees) + f"size: {len(trees)}\n"


class _UsageError(Exception):
    pass


def cmd_verify(args) -> int:
    results = run_checks(args.max_noises)
    failed = 0
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status} {r.name}: {r.detail} ({r.seconds:.2f}s)")
        if not r.ok:
            failed += 1
            print(f"check {r.name} failed: {r.detail}", file=sys.stderr)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


_COMMANDS = {
    "enumerate": cmd_enumerate,
    "reduced": cmd_reduced,
    "geo": cmd_geo,
    "counterterms": cmd_counterterms,
    "fiber": cmd_fiber,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args)
    try:
        out = _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"gkpz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
