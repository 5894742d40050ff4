"""qesdunkl command line: spectrum, wavefunction and audit subcommands.

Exit codes: 0 success, 1 a known-good audit check failed, 2 invalid
arguments, 3 a singular recursion denominator under ``--strict``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

import numpy as np

from .dunkl import HalfGrid, InvalidGrid, ParitySector
from .oracle_audit import audit_report
from .pdm_qes import (PdmModel, SingularDenominator, assemble_wavefunction, solve_level,
                      spectrum)


class ConfigError(ValueError):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from None


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--mu", type=_rational, default=Fraction(0),
                        help="Dunkl parameter, mu > -1/2 (p/q or decimal)")
    common.add_argument("--a", type=_rational, default=Fraction(1), help="mass-profile width a > 0")
    common.add_argument("--m0", type=_rational, default=Fraction(1), help="mass scale m0 > 0")
    common.add_argument("--sector", choices=["even", "odd"], default="even")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--out", help="output file (default: stdout)")

    p = _Parser(prog="qesdunkl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("spectrum", parents=[common], help="QES energy levels E_0..E_nmax")
    sp.add_argument("--n-max", type=_nonneg_int, default=3)

    wp = sub.add_parser("wavefunction", parents=[common], help="sample the level-n state")
    wp.add_argument("--n", type=_nonneg_int, required=True)
    wp.add_argument("--t", type=float, default=0.0)
    wp.add_argument("--x-min", type=float, default=-2.0)
    wp.add_argument("--x-max", type=float, default=2.0)
    wp.add_argument("--samples", type=int, default=41)
    wp.add_argument("--form", choices=["substituted", "printed"], default="substituted",
                    help="x-space layout of the z polynomial")
    wp.add_argument("--strict", action="store_true",
                    help="fail (exit 3) on a vanishing recursion denominator")

    ap = sub.add_parser("audit", parents=[common], help="consistency report (JSON)")
    ap.add_argument("--n-max", type=_nonneg_int, default=3)
    ap.add_argument("--grid-L", type=float, default=10.0)
    ap.add_argument("--grid-N", type=int, default=400)
    ap.add_argument("--no-grid", action="store_true", help="skip the floating-point grid checks")
    return p


def _model(args) -> PdmModel:
    try:
        return PdmModel(args.a, args.m0, args.mu)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _csv_text(comments, header, rows) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def cmd_spectrum(args) -> tuple[int, str]:
    model = _model(args)
    result = spectrum(model, args.n_max, args.sector)
    rows = [{k: r[k] for k in ("n", "E_n", "sector", "solvable", "residual")} for r in result.rows()]
    if args.format == "json":
        return 0, _json_text(rows)
    comments = [f"mu={model.mu} a={model.a} m0={model.m0} hbar=1"]
    header = ["n", "E_n", "sector", "solvable", "residual"]
    return 0, _csv_text(comments, header, [[r[k] for k in header] for r in rows])


def cmd_wavefunction(args) -> tuple[int, str]:
    model = _model(args)
    if args.samples < 1:
        raise ConfigError(f"--samples must be >= 1, got {args.samples}")
    if args.x_max < args.x_min:
        raise ConfigError("--x-max must not be below --x-min")
    w = solve_level(model, args.n, args.sector, strict=args.strict)
    xs = np.linspace(args.x_min, args.x_max, args.samples)
    rows = []
    for x in xs:
        psi = assemble_wavefunction(w, float(x), args.t, form=args.form)
        rows.append([float(x), psi.real, psi.imag])
    b = [str(c) for c in w.b]
    meta = {"n": args.n, "E_n": str(w.energy), "sector": str(w.sector), "b": b, "t": args.t,
            "form": args.form, "degenerate_steps": list(w.degenerate_steps),
            "restarts": list(w.restarts)}
    if args.format == "json":
        meta["samples"] = [{"x": x, "re": re, "im": im} for x, re, im in rows]
        return 0, _json_text(meta)
    comments = [f"mu={model.mu} a={model.a} m0={model.m0} hbar=1",
                f"n={args.n} sector={w.sector} E_n={w.energy} t={args.t!r} form={args.form}",
                "b = " + ", ".join(b)]
    if w.degenerate_steps or w.restarts:
        comments.append(f"degenerate_steps={list(w.degenerate_steps)} restarts={list(w.restarts)}")
    return 0, _csv_text(comments, ["x", "re_psi", "im_psi"],
                        [[repr(x), repr(re), repr(im)] for x, re, im in rows])


def cmd_audit(args) -> tuple[int, str]:
    model = _model(args)
    try:
        grid = None if args.no_grid else HalfGrid(args.grid_L, args.grid_N)
    except InvalidGrid as e:
        raise ConfigError(str(e)) from None
    if args.format != "json":
        raise ConfigError("audit output is JSON only; use --format json")
    report = audit_report(model, args.n_max, ParitySector.parse(args.sector), grid)
    return (0 if report.known_good_ok() else 1), report.to_json()


COMMANDS = {"spectrum": cmd_spectrum, "wavefunction": cmd_wavefunction, "audit": cmd_audit}


def main(argv=None) -> int:
    try:
        if os.environ.get("QES_SEED_NONE") is not None:
            raise ConfigError("QES_SEED_NONE is reserved: this tool uses no randomness")
        argv = list(sys.argv[1:] if argv is None else argv)
        if argv and argv[0] == "audit" and "--format" not in argv:
            argv += ["--format", "json"]
        args = build_parser().parse_args(argv)
        code, text = COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"qesdunkl: error: {e}", file=sys.stderr)
        return 2
    except SingularDenominator as e:
        print(f"qesdunkl: error: {e}", file=sys.stderr)
        return 3
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
