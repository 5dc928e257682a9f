"""``ordcalc`` command line: derive, verify, contraction, integral.

Exit codes: 0 success / all checks pass, 1 verification failure,
2 usage or precondition error.

Complex numbers are written ``a+bi``: a real part, an imaginary part
ending in ``i`` or ``j``, or both (``1``, ``-2.5i``, ``1+1i``, ``0.5-2e-3i``).
"""

import argparse
import json
import logging
import math
import sys

from . import __version__
from .errors import OrdcalcError
from .gaussian import GaussianIntegralSpec, closed_form, quadrature
from .gwt import bch_contraction, general_contraction
from .orderings import LinearForm, OrderingKind
from .squeeze import (
    SqueezeParams,
    ladder_form_coefficients,
    normal_ordered_coefficients,
)
from .verify import CHECKS, VerifySettings, resolved_config, run_verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_complex(text):
    """Parse ``a+bi`` style input into a Python complex."""
    s = text.strip().replace(" ", "").replace("I", "i").replace("i", "j").replace("J", "j")
    if not s:
        raise argparse.ArgumentTypeError("empty complex number")
    if s in ("j", "+j", "-j"):
        s = s.replace("j", "1j")
    elif s.endswith("j") and s[-2:-1] in ("+", "-"):
        s = s[:-1] + "1j"
    try:
        value = complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r} (use a+bi)") from None
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise argparse.ArgumentTypeError(f"complex number must be finite: {text!r}")
    return value


def parse_sign(text):
    table = {"+": 1, "+1": 1, "1": 1, "plus": 1, "-": -1, "-1": -1, "minus": -1}
    if text not in table:
        raise argparse.ArgumentTypeError(f"sign must be + or -, got {text!r}")
    return table[text]


def parse_check_tolerance(text):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=TOL, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance in {text!r}") from None


def _fmt_complex(z, digits=12):
    z = complex(z)
    re, im = round(z.real, digits) + 0.0, round(z.imag, digits) + 0.0
    if im == 0:
        return f"{re:.{digits}g}"
    if re == 0:
        return f"{im:.{digits}g}i"
    return f"{re:.{digits}g}{'+' if im >= 0 else '-'}{abs(im):.{digits}g}i"


def _emit(args, payload, text):
    out = json.dumps(payload, indent=2, sort_keys=True) if args.format == "json" else text
    print(out)


# --- derive -----------------------------------------------------------------

def cmd_derive(args):
    if args.mu is not None:
        if not args.mu > 0:
            raise UsageError(f"mu must be positive, got {args.mu}")
        params = SqueezeParams.from_mu(args.mu)
    else:
        params = SqueezeParams(args.r)
    coeffs = normal_ordered_coefficients(params)
    d = coeffs.as_dict()
    pref, c_a2, c_ad2, c_n = (v + 0.0 for v in ladder_form_coefficients(params))
    payload = {"r": params.r, "mu": params.mu, "kappa": params.kappa}
    payload.update(d)
    payload["cosh_tanh"] = {"prefactor": pref, "c_a2": c_a2, "c_ad2": c_ad2, "c_n": c_n}
    text = "\n".join([
        f"r = {params.r:.12g}   mu = {params.mu:.12g}   kappa = {params.kappa:.12g}",
        "S = prefactor * N exp(c_pq p q + c_sq (p^2 + q^2))",
        f"  prefactor = {d['prefactor']:.12g}",
        f"  c_pq      = {_fmt_complex(coeffs.c_pq)}",
        f"  c_sq      = {d['c_sq']:.12g}",
        "S = prefactor * N exp(c_a2 a^2 + c_ad2 a_dag^2 + c_n a_dag a)",
        f"  c_a2      = {d['c_a2']:.12g}",
        f"  c_ad2     = {d['c_ad2']:.12g}",
        f"  c_n       = {d['c_n']:.12g}",
        "S = cosh(r)^-1/2 exp(-tanh(r)/2 a_dag^2) cosh(r)^(-a_dag a) exp(tanh(r)/2 a^2)",
        f"  cosh(r)^-1/2 = {pref:.12g}   tanh(r)/2 = {c_a2:.12g}",
    ])
    _emit(args, payload, text)
    return EXIT_OK


# --- verify -----------------------------------------------------------------

def cmd_verify(args):
    overrides = dict(args.check_tolerance or [])
    settings = VerifySettings(
        N=args.N, M=args.M,
        r_grid=tuple(args.r) if args.r else VerifySettings().r_grid,
        tolerance=args.tolerance,
        check_tolerances=overrides,
    )
    if args.show_config:
        print(json.dumps(resolved_config(settings), indent=2, sort_keys=True))
        return EXIT_OK
    for message in settings.warnings():
        print(f"warning: {message}", file=sys.stderr)
    checks = args.check or None
    report = run_verify(settings, checks)
    if args.format == "json":
        print(report.to_json(include_timing=args.timing))
    else:
        print(report.render_text())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json(include_timing=args.timing) + "\n")
    return EXIT_OK if report.ok else EXIT_FAIL


# --- contraction ------------------------------------------------------------

def cmd_contraction(args):
    try:
        source = OrderingKind.from_name(args.source)
        target = OrderingKind.from_name(args.target)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    X = LinearForm.unraveling(args.z, args.sign)
    gwt_value = complex(general_contraction(source, target, X).value)
    bch_value = complex(bch_contraction(source, target, X))
    diff = abs(gwt_value - bch_value)
    payload = {
        "from": source.name, "to": target.name,
        "z": [args.z.real, args.z.imag], "sign": args.sign,
        "gwt": [gwt_value.real, gwt_value.imag],
        "bch": [bch_value.real, bch_value.imag],
        "difference": diff,
    }
    text = "\n".join([
        f"X = i z p {'+' if args.sign > 0 else '-'} conj(z) q,  z = {_fmt_complex(args.z)}",
        f"C (GWT) = {_fmt_complex(gwt_value)}",
        f"C (BCH) = {_fmt_complex(bch_value)}",
        f"|difference| = {diff:.3e}",
    ])
    _emit(args, payload, text)
    return EXIT_OK


# --- integral ---------------------------------------------------------------

def cmd_integral(args):
    spec = GaussianIntegralSpec(args.zeta, args.xi, args.eta, args.f, args.g)
    value = closed_form(spec)
    payload = {"closed_form": [value.real, value.imag]}
    lines = [f"closed form = {_fmt_complex(value, 15)}"]
    if args.oracle:
        numeric = quadrature(spec, points=args.points)
        diff = abs(value - numeric)
        payload.update({"quadrature": [numeric.real, numeric.imag], "difference": diff})
        lines += [f"quadrature  = {_fmt_complex(numeric, 15)}", f"|difference| = {diff:.3e}"]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="ordcalc",
        description="Operator ordering calculus and normal-ordered squeeze operator.",
        epilog="Complex arguments use the form a+bi, e.g. 1, -2i, 1+1i, 0.5-0.25i.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log intermediate steps")
    sub = parser.add_subparsers(dest="command", required=True)

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("derive", parents=[fmt], help="normal-ordered squeeze coefficients")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--r", type=float, help="squeezing parameter r")
    group.add_argument("--mu", type=float, help="mu = e^r (> 0)")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("verify", parents=[fmt], help="run the acceptance checks")
    p.add_argument("--N", type=int, default=VerifySettings.N, help="Fock truncation (default %(default)s)")
    p.add_argument("--M", type=int, default=VerifySettings.M, help="trusted block (default %(default)s)")
    p.add_argument("--r", type=float, nargs="+", help="r grid (default -0.5 -0.2 0 0.2 0.5)")
    p.add_argument("--tolerance", type=float, help="override every tolerance")
    p.add_argument("--check-tolerance", type=parse_check_tolerance, action="append",
                   metavar="NAME=TOL", help="override one check's tolerance (repeatable)")
    p.add_argument("--check", choices=list(CHECKS), action="append", help="run only these checks")
    p.add_argument("--show-config", action="store_true", help="print the defaults table and exit")
    p.add_argument("--out", help="also write the JSON report here")
    p.add_argument("--timing", action="store_true", help="include wall time in JSON output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("contraction", parents=[fmt], help="contraction between two orderings")
    p.add_argument("--from", dest="source", required=True, help="pq, qp, normal or antinormal")
    p.add_argument("--to", dest="target", required=True, help="pq, qp, normal or antinormal")
    p.add_argument("--z", type=parse_complex, required=True, help="complex z in X = i z p +- conj(z) q")
    p.add_argument("--sign", type=parse_sign, default=1, help="+ or - (default +)")
    p.set_defaults(func=cmd_contraction)

    p = sub.add_parser("integral", parents=[fmt],
                       help="int exp(zeta|z|^2 + xi z + eta z* + f z^2 + g z*^2) d^2z / pi")
    for name in ("zeta", "xi", "eta", "f", "g"):
        p.add_argument(f"--{name}", type=parse_complex, default=0j, required=name == "zeta")
    p.add_argument("--oracle", action="store_true", help="also evaluate by quadrature")
    p.add_argument("--points", type=int, default=200, help="quadrature points per axis")
    p.set_defaults(func=cmd_integral)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, OrdcalcError, ValueError) as exc:
        print(f"ordcalc {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
