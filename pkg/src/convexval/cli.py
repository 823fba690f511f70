"""Command-line front end: construct, conjugate, evaluate, verify.

Exit codes: 0 = success / all suites pass, 1 = residual failure in a
verification suite, 2 = input or usage error.  Outputs are deterministic for
a fixed configuration and seed on the exact paths.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .affine import AffineMax, gauge_of_polytope
from .errors import ConvexvalError, InputError
from .grid import GridFn, llt
from .profiles import INF, PLProfile, conjugate_1d
from .radial import RadialFn
from .serialization import (
    affine_max_to_dict,
    grid_to_csv,
    load_function,
    load_zeta,
    profile_to_dict,
    zeta_from_dict,
    zeta_to_dict,
)
from .valuations import ZetaTriple, evaluate_Z, evaluate_Z_dual
from .verify import SUITES, run_suite
from .zetas import ScalarZeta


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dump_json(obj, out: Optional[str]) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True), out)


def _parse_dual_range(spec: Optional[str], n: int):
    if spec is None or spec == "auto":
        return None
    try:
        lo, hi = (float(x) for x in spec.split(":"))
    except ValueError as e:
        raise InputError(f"--dual-range expects 'auto' or 'lo:hi', got {spec!r}") from e
    return tuple((lo, hi) for _ in range(n))


# -- subcommands ------------------------------------------------------------------------------


def cmd_conjugate(args) -> int:
    fn = load_function(args.input)
    if isinstance(fn, PLProfile):
        conj = conjugate_1d(fn)
        if conj.is_lazy:
            conj = conj.prefix(args.grid_res or 64)
        _dump_json(profile_to_dict(conj), args.out)
        return 0
    if isinstance(fn, GridFn):
        res = None
        if args.grid_res:
            res = tuple(args.grid_res for _ in range(fn.n))
        dual = _parse_dual_range(args.dual_range, fn.n)
        out = llt(fn, dual_range=dual, dual_resolution=res)
        _emit(grid_to_csv(out), args.out)
        return 0
    raise InputError("conjugate expects a radial_pl or grid input")


def _load_triple(path: str, n: int) -> ZetaTriple:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}: line {e.lineno}: {e.msg}") from e
    if d.get("kind") == "zeta_triple":
        z0 = zeta_from_dict(d["zeta0"])
        z1 = zeta_from_dict(d["zeta1"])
        z2 = zeta_from_dict(d["zeta2"])
    elif d.get("kind") == "scalar_zeta":
        raise InputError(
            f"{path}: holds a single scalar_zeta; evaluation needs a zeta_triple "
            '{"kind":"zeta_triple","zeta0":...,"zeta1":...,"zeta2":...}'
        )
    else:
        raise InputError(f"{path}: expected kind 'zeta_triple', got {d.get('kind')!r}")
    return ZetaTriple.make(z0, z1, z2, n)


def cmd_evaluate(args) -> int:
    triple = _load_triple(args.zeta, args.n)
    fn = load_function(args.input)
    if isinstance(fn, PLProfile):
        fn = RadialFn(fn, args.n)
    dual_range = _parse_dual_range(args.dual_range, args.n)
    evaluator = evaluate_Z_dual if args.dual else evaluate_Z
    comps = evaluator(triple, fn, tol=args.tol, dual_range=dual_range)
    payload = {
        "schema": 1,
        "kind": "z_components",
        "dual": bool(args.dual),
        "z0": comps.z0,
        "z1": comps.z1,
        "z2": comps.z2,
        "total": comps.total,
        "path": comps.path,
    }
    if args.format == "csv":
        rows = "z0,z1,z2,total,path\n" + (
            f"{comps.z0!r},{comps.z1!r},{comps.z2!r},{comps.total!r},{comps.path}\n"
        )
        _emit(rows, args.out)
    else:
        _dump_json(payload, args.out)
    return 0


def cmd_verify(args) -> int:
    report = run_suite(
        args.suite,
        seed=args.seed,
        trials=args.trials,
        n=args.n,
        grid_res=args.grid_res,
        zeta_kind=args.zeta_kind,
    )
    if args.format == "csv":
        lines = ["metric,value", f"suite,{report['suite']}", f"cases,{report['cases']}"]
        for i, r in enumerate(report["residuals"]):
            lines.append(f"residual_{i},{r!r}")
        lines.append(f"pass,{report['pass']}")
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _dump_json(report, args.out)
    return 0 if report["pass"] else 1


def cmd_construct(args) -> int:
    kind = args.kind
    if kind == "gk":
        base = _parse_base_profile(args.base)
        doc = profile_to_dict(base, tail={"rule": "factorial", "k": args.k})
        _dump_json(doc, args.out)
        return 0
    if kind == "vlt":
        from .embed import build_vlt

        p = build_vlt(args.t, args.l)
        p.materialize_to_radius(1.0 + 5.0 / args.l)
        doc = profile_to_dict(p, tail={"rule": "vlt", "t": args.t, "l": args.l})
        _dump_json(doc, args.out)
        return 0
    if kind == "uzeta":
        from .embed import build_uzeta

        if args.zeta_kind != "harmonic":
            raise InputError("only the harmonic witness zeta is wired into construct")
        zeta = ScalarZeta.harmonic(1.0)
        p = build_uzeta(zeta.eval, args.n)
        p.materialize_to_level(10.0)
        doc = profile_to_dict(
            p, tail={"rule": "uzeta", "zeta": zeta_to_dict(zeta), "n": args.n}
        )
        _dump_json(doc, args.out)
        return 0
    if kind == "gauge":
        if args.box is None or len(args.box) != 4:
            raise InputError("construct gauge needs --box x_lo x_hi y_lo y_hi")
        x0, x1, y0, y1 = args.box
        g = gauge_of_polytope([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
        _dump_json(affine_max_to_dict(g), args.out)
        return 0
    raise InputError(f"unknown construct kind {kind!r}")


def _parse_base_profile(spec: Optional[str]) -> PLProfile:
    """Either the literal 'v(r)=r', a JSON inline profile, or a file path."""
    if spec is None or spec == "v(r)=r":
        return PLProfile(0.0, [(0.0, 1.0)])
    try:
        d = json.loads(spec)
    except json.JSONDecodeError:
        fn = load_function(spec)
        if not isinstance(fn, PLProfile):
            raise InputError("--base must name a radial_pl profile")
        return fn
    from .serialization import profile_from_dict

    return profile_from_dict(d)


# -- argument parsing ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convexval",
        description="Exact and numeric convex-conjugation valuations on convex functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--n", type=int, default=2, help="ambient dimension")
        p.add_argument("--grid-res", type=int, default=None, help="grid resolution per axis")
        p.add_argument("--tol", type=float, default=1e-6, help="numeric tolerance")
        p.add_argument("--seed", type=int, default=0, help="random seed")
        p.add_argument("--trials", type=int, default=None, help="randomized trial count")
        p.add_argument("--out", type=str, default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("conjugate", help="exact or discrete convex conjugate")
    p.add_argument("input", help="function file (radial_pl JSON or grid CSV)")
    p.add_argument("--dual-range", default="auto", help="'auto' or 'lo:hi'")
    common(p)
    p.set_defaults(fn=cmd_conjugate)

    p = sub.add_parser("evaluate", help="evaluate a zeta-triple valuation")
    p.add_argument("zeta", help="zeta_triple JSON file")
    p.add_argument("input", help="function file")
    p.add_argument("--dual", action="store_true", help="evaluate the dual form")
    p.add_argument("--dual-range", default="auto", help="'auto' or 'lo:hi'")
    common(p)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--zeta", dest="zeta_kind", default="harmonic", help="witness zeta kind")
    common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("construct", help="build a documented example function")
    p.add_argument("kind", choices=("gk", "vlt", "uzeta", "gauge"))
    p.add_argument("--k", type=int, default=2, help="embedding index for gk")
    p.add_argument("--t", type=float, default=0.0, help="plateau level for vlt")
    p.add_argument("--l", type=int, default=10, help="grid density for vlt")
    p.add_argument("--base", default=None, help="base profile for gk ('v(r)=r', JSON, or path)")
    p.add_argument("--box", type=float, nargs=4, default=None, help="gauge box: x_lo x_hi y_lo y_hi")
    p.add_argument("--zeta", dest="zeta_kind", default="harmonic", help="witness zeta kind")
    common(p)
    p.set_defaults(fn=cmd_construct)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ConvexvalError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
