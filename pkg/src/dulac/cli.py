"""Command line interface: ``dulac <subcommand> problem.json [options]``."""

from __future__ import annotations

import argparse
import json
import math
import sys

import mpmath

from . import __version__
from .certifier import certify
from .evaluator import Sector, decay_exponent
from .field import DEFAULT_PREC, format_scalar, parse_scalar
from .majorant import MajorantConfig, exact_fraction, run_majorant
from .pipeline import Options, StageError, prepare, run_report, solve, with_params
from .poly import ProblemError, parse_problem, to_expression, to_latex
from .series import DulacSeries

EXIT_OK, EXIT_ERROR, EXIT_FAILED, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _param(text):
    k, sep, v = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected k=value, got {text!r}")
    try:
        order = int(k)
        values = [parse_scalar(p) for p in v.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return order, values[0] if len(values) == 1 else values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem JSON file ('-' for stdin)")
    common.add_argument("--prec", type=int, default=DEFAULT_PREC, help="working precision in bits")
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("json", "latex", "text"), default="json")
    common.add_argument("--param", action="append", type=_param, default=[], metavar="K=VALUE",
                        help="free parameter at a resonant order (comma-separate several)")

    p = argparse.ArgumentParser(prog="dulac", description=__doc__)
    p.add_argument("--version", action="version", version=f"dulac {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("parse", parents=[common], help="validate and canonicalize a problem")

    c = sub.add_parser("certify", parents=[common], help="check the convergence criterion on the seed")
    c.add_argument("-N", type=int, dest="n_cert", help="order through which the seed must solve F")

    r = sub.add_parser("reduce", parents=[common], help="reduced equation L(delta) u = x M")
    r.add_argument("--ell", type=int)

    s = sub.add_parser("solve", parents=[common], help="formal solution through ell + N")
    s.add_argument("-N", type=int, default=20)
    s.add_argument("--ell", type=int)

    m = sub.add_parser("majorant", parents=[common], help="majorant tail, domination and radius")
    m.add_argument("-N", type=int, default=30)
    m.add_argument("--ell", type=int)
    m.add_argument("--epsbar", default="1/2")
    m.add_argument("--r", type=int)

    d = sub.add_parser("residual", parents=[common], help="residual decay of a series in a sector")
    d.add_argument("--series", required=True, help="series JSON (as written by 'solve')")
    d.add_argument("--sector", default=None,
                   help="theta_min:theta_max in radians (default: opening 1.9*pi about the positive axis)")
    d.add_argument("--rho", type=float, default=0.05)
    d.add_argument("--samples", type=int, default=24)
    d.add_argument("--eta", type=float, default=0.5)
    d.add_argument("-N", type=int, dest="order", help="order for the threshold N+1-eta (default: series truncation)")

    a = sub.add_parser("report", parents=[common], help="full pipeline report")
    a.add_argument("-N", type=int, default=20)
    a.add_argument("--ell", type=int)
    a.add_argument("--epsbar", default="1/2")
    a.add_argument("--r", type=int)
    a.add_argument("--sector", default=None,
                   help="theta_min:theta_max in radians (default: opening 1.9*pi about the positive axis)")
    a.add_argument("--rho", type=float, default=0.05)
    a.add_argument("--samples", type=int, default=24)
    a.add_argument("--eta", type=float, default=0.5)
    return p


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(text, out):
    if not text.endswith("\n"):
        text += "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(doc):
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _sector(args):
    if args.sector is None:
        return Sector.centered(1.9 * math.pi, args.rho)
    return Sector.parse(args.sector, args.rho)


def _load(args):
    problem = parse_problem(_read(args.problem))
    return with_params(problem, dict(args.param))


def cmd_parse(args):
    problem = _load(args)
    if args.format == "latex":
        return to_latex(problem.F) + " = 0", EXIT_OK
    if args.format == "text":
        return f"{problem.name}: {to_expression(problem.F)} = 0\nseed: {problem.seed.to_latex()}", EXIT_OK
    return problem.dumps(), EXIT_OK


def cmd_certify(args):
    problem = _load(args)
    cert = certify(problem, n_cert=args.n_cert)
    code = {"pass": EXIT_OK, "fail": EXIT_FAILED}.get(cert.verdict, EXIT_INCONCLUSIVE)
    if args.format == "json":
        return _json(cert.to_json()), code
    rows = [f"m = {cert.m}", f"verdict: {cert.verdict}"]
    rows += [f"a_{j} = {format_scalar(c)}" for j, c in enumerate(cert.a)]
    rows += cert.reasons
    if args.format == "latex":
        body = " \\\\\n".join(f"a_{{{j}}} & {format_scalar(c)}" for j, c in enumerate(cert.a))
        return f"\\begin{{tabular}}{{ll}}\nm & {cert.m} \\\\\n{body} \\\\\n\\end{{tabular}}", code
    return "\n".join(rows), code


def cmd_reduce(args):
    problem = _load(args)
    prep = prepare(problem, args.ell, args.prec)
    if not prep.certificate.passed:
        raise UsageError("the certificate does not pass; no reduction exists")
    doc = prep.reduced.to_json()
    if args.format == "json":
        return _json(doc), EXIT_OK
    L = " + ".join(f"{c}*xi^{i}" for i, c in enumerate(doc["L"]) if c != "0")
    text = f"ell = {doc['ell']}, C = {doc['C']}\nL(xi) = {L}\nM = {to_expression(prep.reduced.M).replace('y', 'u')}"
    return text, EXIT_OK


def cmd_solve(args):
    problem = _load(args)
    _, _, phi = solve(problem, args.N, args.ell, args.prec)
    if args.format == "latex":
        return phi.to_latex(), EXIT_OK
    if args.format == "text":
        return "\n".join(f"{k}: {p}" for k, p in phi.terms.items()), EXIT_OK
    return phi.dumps(), EXIT_OK


def cmd_majorant(args):
    problem = _load(args)
    prep, tail, _ = solve(problem, args.N, args.ell, args.prec)
    cfg = MajorantConfig(eps_bar=exact_fraction(args.epsbar), r=args.r, prec=args.prec)
    rep = run_majorant(prep.reduced, tail, cfg)
    doc = rep.to_json()
    code = EXIT_OK if rep.dominated else EXIT_INCONCLUSIVE
    if args.format == "json":
        return _json(doc), code
    rad = doc["radius"]
    lines = [f"sigma = {doc['constants']['sigma']}, c = {doc['constants']['c']}, eps = {doc['eps']}",
             f"dominated through N = {args.N}: {rep.dominated}",
             f"rho_emp = {rad['rho_emp']}, rho_cert = {rad['rho_cert']}",
             f"sector rule: {rad['sector_rule']}"]
    return "\n".join(lines), code


def cmd_residual(args):
    problem = _load(args)
    series = DulacSeries.from_json(json.loads(_read(args.series)))
    sector = _sector(args)
    rep = decay_exponent(problem, series, sector, args.samples, args.eta, order=args.order)
    code = EXIT_OK if rep.passed else EXIT_INCONCLUSIVE
    if args.format == "json":
        return _json(rep.to_json()), code
    d = rep.to_json()
    return f"slope = {d['slope']} (threshold {d['threshold']}): {d['verdict']}", code


def cmd_report(args):
    doc = _read(args.problem)
    opts = Options(N=args.N, ell=args.ell, params=dict(args.param), eps_bar=args.epsbar, r=args.r,
                   prec=args.prec, sector=_sector(args), samples=args.samples,
                   eta=args.eta)
    rep = run_report(doc, opts)
    if args.format == "json":
        return rep.dumps(), rep.exit_code
    d = rep.doc
    lines = [f"verdict: {d['verdict']}"]
    if d["error"]:
        lines.append(f"error in stage {d['error']['stage']}: {d['error']['message']}")
    if d["certificate"]:
        lines.append(f"certificate: m = {d['certificate']['m']}, a = {d['certificate']['a']}, "
                     f"{d['certificate']['verdict']}")
    for name, ok in d["checks"].items():
        lines.append(f"  {name}: {'ok' if ok else 'FAILED'}")
    if args.format == "latex" and d["series"]:
        lines.append(DulacSeries.from_json(d["series"]).to_latex())
    return "\n".join(lines), rep.exit_code


COMMANDS = {
    "parse": cmd_parse,
    "certify": cmd_certify,
    "reduce": cmd_reduce,
    "solve": cmd_solve,
    "majorant": cmd_majorant,
    "residual": cmd_residual,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with mpmath.workprec(args.prec):
            text, code = COMMANDS[args.command](args)
    except (ProblemError, UsageError, StageError, ValueError, ArithmeticError, OSError) as exc:
        print(f"dulac {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    _emit(text, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
