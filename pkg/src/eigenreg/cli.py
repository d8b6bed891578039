"""Command-line front end.

Subcommands: eigenvariety, tempered, tame, symbol-reduce, integrate,
volume-path, quantize, oracle-volume. Errors are emitted as a JSON block
on stderr and mapped to stable exit codes (see errors.py).
"""
from __future__ import annotations

import argparse
import cmath
import json
import math
import sys

import numpy as np
import sympy as sp

from . import ratpoly, regulator, symbols, twobridge
from .errors import EigenregError, ParseError
from .oracle import load_triangulation, solve_gluing
from .ratpoly import format_poly


def _fmt(x):
    """17-significant-digit decimal, diff-stable across runs."""
    return f"{x:.17g}"


def _out_stream(args):
    if getattr(args, "out", None):
        return open(args.out, "w")
    return sys.stdout


def _emit(args, lines):
    fh = _out_stream(args)
    try:
        for line in lines:
            fh.write(line + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


# ---------------------------------------------------------------------------
# per-command helpers
# ---------------------------------------------------------------------------

def _parse_slice_signs(text):
    if not text:
        return ()
    out = []
    for ch in text.replace(",", ""):
        if ch == "+":
            out.append(1)
        elif ch == "-":
            out.append(-1)
        else:
            raise ParseError(f"slice signs must be +/-, got {text!r}")
    return tuple(out)


def _build_curve(args):
    code = twobridge.load_link_file(args.link)
    fam = twobridge.rep_family(code)
    return code, fam, twobridge.eigen_curve(
        fam, i=args.component, slice_signs=_parse_slice_signs(args.slice_signs),
        require_hyperbolic=getattr(args, "require_hyperbolic", False))


def cmd_eigenvariety(args):
    code, fam, curve = _build_curve(args)
    lines = [f"# link: {code.name or f'({code.p},{code.q})'}"]
    npg = ratpoly.newton_polygon(curve.poly)
    lines.append("# newton_polygon: " + " ".join(str(v) for v in npg.vertices))
    if args.out:
        twobridge.save_curve(curve, args.out)
        with open(args.out) as fh:
            body = fh.read()
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n" + body)
        return 0
    _emit(args, lines + [f"component: {curve.component_index}",
                         "poly: " + format_poly(curve.poly)])
    return 0


def cmd_tempered(args):
    curve = twobridge.load_curve(args.curve)
    ok, cert = symbols.temperedness(curve)
    lines = [f"tempered: {'true' if ok else 'false'}"]
    for entry in cert:
        lines.append(json.dumps({
            "edge": list(map(list, entry["edge"])),
            "edge_polynomial": entry["edge_polynomial"],
            **({"cyclotomic_indices": entry["cyclotomic_indices"]}
               if "cyclotomic_indices" in entry
               else {"failure_factor": entry["failure_factor"]})},
            sort_keys=True))
    _emit(args, lines)
    return 0


def cmd_tame(args):
    curve = twobridge.load_curve(args.curve)
    s = symbols.FormalSymbol.single(sp.Symbol("l"), sp.Symbol("m"),
                                    curve.epsilon)
    lines = [f"symbol: {{l, m}}^{curve.epsilon}"]
    for place in symbols.edge_places(curve):
        val = symbols.tame_symbol(s, place)
        order = symbols.root_of_unity_order(val)
        lines.append(json.dumps({
            "edge": list(map(list, place.edge)),
            "direction": list(place.direction),
            "sigma": [_fmt(place.sigma.real), _fmt(place.sigma.imag)],
            "value": [_fmt(val.real), _fmt(val.imag)],
            "root_of_unity_order": order}, sort_keys=True))
    lines.append(f"order_candidate: {symbols.symbol_order_candidate(curve)}")
    _emit(args, lines)
    return 0


def cmd_symbol_reduce(args):
    try:
        raw = json.loads(args.symbol)
        factors = tuple((sp.sympify(f), sp.sympify(g), int(e))
                        for f, g, e in raw)
    except (ValueError, TypeError, sp.SympifyError) as exc:
        raise ParseError(f"bad symbol spec: {exc}") from exc
    s = symbols.symbol_normalize(symbols.FormalSymbol(factors))
    _emit(args, [str(s)])
    return 0


def _load_curves(paths):
    return [twobridge.load_curve(p) for p in paths]


def _track(args, curves):
    spec = regulator.load_path_spec(args.path)
    if args.samples:
        spec.samples = args.samples
    return spec, regulator.track_path(curves, spec)


_CSV_HEADER = "t,l_re,l_im,m_re,m_im,eta_acc,xi_acc,V"


def _csv_rows(states, complete_volume):
    rows = [_CSV_HEADER]
    ncomp = len(states[0].l)
    for st in states:
        for i in range(ncomp):
            rows.append(",".join([
                _fmt(st.t),
                _fmt(st.l[i].real), _fmt(st.l[i].imag),
                _fmt(st.m[i].real), _fmt(st.m[i].imag),
                _fmt(st.eta_acc), _fmt(st.xi_acc),
                _fmt(complete_volume + 2.0 * st.eta_acc)]))
    return rows


def cmd_integrate(args):
    curves = _load_curves(args.curves)
    spec, states = _track(args, curves)
    eps = [c.epsilon for c in curves]
    eta = regulator.integrate_eta(states, eps, tol=args.tol)
    xi = regulator.integrate_xi(states, eps, tol=args.tol)
    rows = _csv_rows(states, args.complete_volume)
    rows.append("# summary")
    rows.append(f"# eta_integral: {_fmt(eta)}")
    rows.append(f"# xi_integral: {_fmt(xi)}")
    rows.append("# epsilons: " + " ".join(str(e) for e in eps))
    if spec.closed:
        M = regulator.monodromy(states, eps)
        rows.append(f"# monodromy: {_fmt(M.real)} {_fmt(M.imag)}")
    _emit(args, rows)
    return 0


def cmd_volume_path(args):
    code = twobridge.load_link_file(args.link)
    fam = twobridge.rep_family(code)
    tri_name = {1: "figure-eight", 2: "whitehead"}.get(code.component_count)
    if code.name in ("figure-eight", "whitehead"):
        tri_name = code.name
    tri = load_triangulation(tri_name)
    _, vol0, _ = solve_gluing(tri)
    slice_signs = _parse_slice_signs(args.slice_signs) or (1,) * (
        code.component_count - 1)
    curves = [twobridge.eigen_curve(fam, i=i + 1, slice_signs=slice_signs)
              for i in range(1 if code.is_knot else code.component_count)]
    calibration = "default (+1, complete structure only)"
    if args.path:
        if code.is_knot:
            eps, hint, mism = regulator.calibrate(curves[0], tri_name)
            calibration = f"epsilon {eps}, branch hint {hint}, mismatch {_fmt(mism)}"
            spec = regulator.load_path_spec(args.path)
            if args.samples:
                spec.samples = args.samples
            if spec.branch_hints is None:
                spec.branch_hints = (hint,)
        else:
            spec = regulator.load_path_spec(args.path)
        states = regulator.track_path(curves, spec)
    else:
        spec = regulator.constant_path(len(curves))
        states = regulator.track_path(curves, spec)
    rows = _csv_rows(states, vol0)
    rows.append("# summary")
    rows.append(f"# complete_volume: {_fmt(vol0)}")
    rows.append(f"# V_end: {_fmt(vol0 + 2.0 * states[-1].eta_acc)}")
    rows.append(f"# calibration: {calibration}")
    _emit(args, rows)
    return 0


def cmd_quantize(args):
    curves = _load_curves(args.curves)
    if args.loop:
        spec = regulator.load_path_spec(args.loop)
        if args.samples:
            spec.samples = args.samples
    else:
        spec = regulator.based_loop_path(radius=args.radius, turns=args.turns,
                                         samples=args.samples or 6000)
    states = regulator.track_path(curves, spec)
    eps = [c.epsilon for c in curves]
    q_cand = 1
    for c in curves:
        q_cand = max(q_cand, symbols.symbol_order_candidate(c))
    frac, residual = regulator.quantization_check(states, eps, q_cand,
                                                  tol=args.tol)
    M = regulator.monodromy(states, eps)
    _emit(args, [
        f"p: {frac.numerator}",
        f"q: {frac.denominator}",
        f"residual: {_fmt(residual)}",
        f"order_candidate: {q_cand}",
        f"monodromy_abs: {_fmt(abs(M))}",
        f"monodromy_pow_q_dist: {_fmt(abs(M ** frac.denominator - 1))}",
    ])
    return 0


def cmd_oracle_volume(args):
    code = twobridge.load_link_file(args.link)
    tri_name = code.name if code.name in ("figure-eight", "whitehead") else \
        {1: "figure-eight", 2: "whitehead"}[code.component_count]
    tri = load_triangulation(tri_name)
    logs = None
    if args.deform:
        logs = [1j * math.pi * args.deform] + [0.0] * (tri.num_cusps - 1)
    shapes, vol, res = solve_gluing(tri, logs)
    lines = [f"triangulation: {tri.name}"]
    for j, z in enumerate(shapes):
        lines.append(f"shape_{j}: {_fmt(z.real)} {_fmt(z.imag)}")
    lines.append(f"volume: {_fmt(vol)}")
    lines.append(f"residual: {_fmt(res)}")
    _emit(args, lines)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(
        prog="eigenreg",
        description="eigenvalue curves, K2 certificates, regulator integrals")
    ap.add_argument("--seed", type=int, default=0,
                    help="seed for any randomized sampling (reproducibility)")
    ap.add_argument("--tol", type=float, default=1e-6,
                    help="quadrature error tolerance")
    ap.add_argument("--samples", type=int, default=None,
                    help="override path sample count")
    ap.add_argument("--out", default=None, help="output file (default stdout)")
    # the same flags are accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    for flag, kw in [("--seed", dict(type=int)), ("--tol", dict(type=float)),
                     ("--samples", dict(type=int)), ("--out", dict())]:
        common.add_argument(flag, default=argparse.SUPPRESS, **kw)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigenvariety", help="compute an eigenvalue curve",
                       parents=[common])
    p.add_argument("link")
    p.add_argument("--component", type=int, default=1)
    p.add_argument("--slice-signs", default="")
    p.add_argument("--require-hyperbolic", action="store_true")
    p.set_defaults(func=cmd_eigenvariety)

    p = sub.add_parser("tempered", help="cyclotomic edge-polynomial certificate",
                       parents=[common])
    p.add_argument("curve")
    p.set_defaults(func=cmd_tempered)

    p = sub.add_parser("tame", help="tame symbols of {l,m} at ideal places",
                       parents=[common])
    p.add_argument("curve")
    p.set_defaults(func=cmd_tame)

    p = sub.add_parser("symbol-reduce", help="normalize a formal K2 symbol "
                       '(JSON [[f, g, e], ...])')
    p.add_argument("symbol")
    p.set_defaults(func=cmd_symbol_reduce)

    p = sub.add_parser("integrate", help="line integrals along a path spec",
                       parents=[common])
    p.add_argument("curves", nargs="+")
    p.add_argument("--path", required=True)
    p.add_argument("--complete-volume", type=float, default=0.0)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("volume-path", help="V(t) along a deformation path",
                       parents=[common])
    p.add_argument("link")
    p.add_argument("--path", default=None)
    p.add_argument("--slice-signs", default="")
    p.set_defaults(func=cmd_volume_path)

    p = sub.add_parser("quantize", help="rational p/q of a closed loop",
                       parents=[common])
    p.add_argument("curves", nargs="+")
    p.add_argument("--loop", default=None)
    p.add_argument("--radius", type=float, default=0.8)
    p.add_argument("--turns", type=int, default=1)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("oracle-volume", help="gluing-equation volume oracle",
                       parents=[common])
    p.add_argument("link")
    p.add_argument("--deform", type=float, default=0.0,
                   help="meridian log-holonomy i*pi*DEFORM on cusp 1")
    p.set_defaults(func=cmd_oracle_volume)

    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        exc = ParseError(str(exc))
        print(json.dumps({"error": "ParseError", "exit_code": exc.exit_code,
                          "message": str(exc)}, sort_keys=True),
              file=sys.stderr)
        return exc.exit_code
    except EigenregError as exc:
        block = {"error": type(exc).__name__,
                 "exit_code": exc.exit_code,
                 "message": str(exc)}
        print(json.dumps(block, sort_keys=True), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
