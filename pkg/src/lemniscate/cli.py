"""
Command-line interface.

Subcommands::

    construct   polynomial from interval endpoints (optionally solving for some)
    analyze     components, zero counts, critical points and capacity of P^{-1}([-1,1])
    centers     centers, exponents and validation of the lemniscatic domain
    map         evaluate the exterior map at points and along grid polylines
    boundary    sample the boundary of the lemniscatic domain
    paper-demo  rerun a named example and compare with its reference values

Every subcommand except ``paper-demo`` writes one JSON document. Exit codes:
0 on success, 2 on invalid input, 3 on a convergence failure or a non-finite
result.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .catalog import EXAMPLES, get_example
from .centers import LemniscaticData, lemniscatic_data, validate_centers
from .errors import ConvergenceError, LemniscateError, ValidationError
from .polycore import ComplexPoly
from .preimage import (PreimageData, analyze, endpoint_residual, polynomial_from_endpoints,
                       solve_endpoints)
from .walshmap import GridSpec, make_context, map_grid, phi, trace_boundary

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3

LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "trace": logging.DEBUG}

log = logging.getLogger("lemniscate")


# ---------------------------------------------------------------------------
# parsing helpers

def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc


def _complex_list(text: str) -> list[complex]:
    try:
        return [complex(t.replace("i", "j")) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of complex numbers: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from exc


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _num(x):
    """JSON-friendly number: a float, or [re, im] for a genuinely complex value."""
    x = complex(x)
    if x.imag == 0.0:
        return x.real
    return [x.real, x.imag]


def _check_finite(obj, path="$"):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ConvergenceError(f"non-finite value at {path}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")


# ---------------------------------------------------------------------------
# input resolution

def _add_input(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--coeffs", type=_complex_list,
                   help="polynomial coefficients p_0,p_1,...,p_n (ascending)")
    g.add_argument("--endpoints", type=_float_list,
                   help="interval endpoints b_1 <= ... <= b_2n of a polynomial preimage")
    g.add_argument("--example", help="named example (see paper-demo --list)")
    p.add_argument("--alpha", type=float, help="alpha parameter of a named example")
    p.add_argument("--beta", type=float, help="beta parameter of a named example")
    p.add_argument("--free", type=_int_list, default=None,
                   help="0-based endpoint indices to solve for (with --endpoints)")


def _resolve_polynomial(args) -> tuple[ComplexPoly, dict]:
    info: dict = {}
    if args.coeffs is not None:
        P = ComplexPoly(args.coeffs)
        info["source"] = "coefficients"
    elif args.endpoints is not None:
        c = np.array(args.endpoints, dtype=float)
        if args.free:
            free = {i: c[i] for i in args.free}
            pinned = {i: c[i] for i in range(len(c)) if i not in free}
            c = solve_endpoints(pinned, free)
        res = endpoint_residual(c)
        scale = max(1.0, float(np.max(np.abs(c))) ** (len(c) // 2))
        if len(res) and np.max(np.abs(res)) > 1e-10 * scale:
            raise ValidationError(
                f"endpoints do not form a polynomial preimage (residual {np.max(np.abs(res)):.3e}); "
                "pass --free to solve for some of them")
        P = polynomial_from_endpoints(c)
        info["source"] = "endpoints"
        info["endpoints"] = [float(x) for x in c]
        info["endpoint_residual"] = float(np.max(np.abs(res))) if len(res) else 0.0
    else:
        ex = get_example(args.example)
        P = ex.polynomial(alpha=args.alpha, beta=args.beta)
        info["source"] = "example"
        info["example"] = ex.key
        info["parameters"] = ex._params({"alpha": args.alpha, "beta": args.beta}
                                        if ex.params else {})
    if P.degree < 1:
        raise ValidationError("polynomial must have degree >= 1")
    if not all(math.isfinite(abs(c)) for c in P.coeffs):
        raise ValidationError("coefficients must be finite")
    return P, info


def _poly_doc(P: ComplexPoly) -> list:
    return [_num(c) for c in P.coeffs]


def _preimage_doc(pre: PreimageData) -> dict:
    return {
        "degree": pre.n,
        "components": pre.ell,
        "endpoints": list(pre.components.endpoints),
        "zero_counts": list(pre.zero_counts),
        "outer_critical_points": list(pre.outer_critical_points),
        "critical_values_h": [_num(h) for h in pre.critical_images],
        "capacity": pre.capacity,
    }


def _centers_doc(pre: PreimageData, lem: LemniscaticData, trace, method: str) -> dict:
    rep = validate_centers(pre, lem)
    doc = {
        "method": method,
        "centers": [_num(a) for a in lem.centers],
        "exponents": [str(m) for m in lem.exponents],
        "exponents_float": [float(m) for m in lem.exponents],
        "capacity": lem.capacity,
        "q_critical_points": [_num(w) for w in lem.q_critical_points],
        "Q_coefficients": _poly_doc(lem.Q),
        "validation": {
            "critical_value_residuals": rep.critical_residuals,
            "relative_residuals": rep.relative_residuals,
            "centroid_residual": rep.sum_residual,
            "interlacing": rep.interlacing,
            "symmetry_residuals": rep.symmetry_residuals,
            "max_residual": rep.max_residual,
        },
    }
    if trace is not None:
        doc["iteration"] = {
            "steps": trace.steps,
            "converged": trace.converged,
            "deltas": trace.deltas,
            "inner_iterations": trace.inner_iterations,
            "centers": [list(map(float, a)) for a in trace.centers],
            "critical_points": [list(map(float, w)) for w in trace.critical_points],
        }
    return doc


def _centers_for(args, pre):
    opts = {}
    if getattr(args, "abstol", None) is not None:
        opts["abstol"] = args.abstol
    if getattr(args, "reltol", None) is not None:
        opts["reltol"] = args.reltol
    if getattr(args, "max_outer", None) is not None:
        opts["max_outer"] = args.max_outer
    method = getattr(args, "method", "auto")
    if method == "closed-form":
        # tolerances only mean something for the iterative scheme
        opts = {}
    return lemniscatic_data(pre, method=method, **opts)


# ---------------------------------------------------------------------------
# commands

def cmd_construct(args) -> dict:
    P, info = _resolve_polynomial(args)
    return {"command": "construct", "input": info, "P": _poly_doc(P)}


def cmd_analyze(args) -> dict:
    P, info = _resolve_polynomial(args)
    pre = analyze(P)
    doc = {"command": "analyze", "input": info, "P": _poly_doc(P)}
    doc.update(_preimage_doc(pre))
    if pre.ell == 1:
        lem, _, name = lemniscatic_data(pre)
        doc["centers"] = [_num(a) for a in lem.centers]
    return doc


def cmd_centers(args) -> dict:
    P, info = _resolve_polynomial(args)
    pre = analyze(P)
    t0 = time.perf_counter()
    lem, trace, name = _centers_for(args, pre)
    elapsed = time.perf_counter() - t0
    doc = {"command": "centers", "input": info, "P": _poly_doc(P), "preimage": _preimage_doc(pre)}
    doc.update(_centers_doc(pre, lem, trace, name))
    doc["seconds"] = elapsed
    return doc


def _grid_from_args(args) -> GridSpec:
    kw = {"kind": args.grid, "lines": args.lines, "samples": args.samples}
    if args.range is not None:
        if len(args.range) != 4:
            raise ValidationError("--range needs xmin,xmax,ymin,ymax")
        kw.update(zip(("xmin", "xmax", "ymin", "ymax"), args.range))
    if args.radii is not None:
        if len(args.radii) != 2:
            raise ValidationError("--radii needs rmin,rmax")
        kw.update(rmin=args.radii[0], rmax=args.radii[1])
    return GridSpec(**kw)


def cmd_map(args) -> dict:
    P, info = _resolve_polynomial(args)
    pre = analyze(P)
    lem, trace, name = _centers_for(args, pre)
    ctx = make_context(pre, lem)
    doc = {"command": "map", "input": info, "P": _poly_doc(P), "preimage": _preimage_doc(pre)}
    doc.update(_centers_doc(pre, lem, trace, name))
    doc["boundary_crossings_real"] = list(ctx.crossings)
    if args.at:
        pts = []
        for z in args.at:
            w = phi(ctx, z)
            q, _ = ctx.q_and_s(w)
            pts.append({"z": [z.real, z.imag], "w": [w.real, w.imag], "residual": abs(q - ctx.h(z))})
        doc["points"] = pts
    if args.polylines:
        res = map_grid(ctx, _grid_from_args(args))
        with open(args.polylines, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["line_id", "re_z", "im_z", "re_w", "im_w", "residual"])
            for pl in res.polylines:
                for z, w, r in zip(pl.z, pl.w, pl.residual):
                    wr.writerow([pl.line_id] + [f"{v:.17g}" for v in (z.real, z.imag, w.real, w.imag, r)])
        doc["grid"] = {"file": args.polylines, "polylines": len(res.polylines),
                       "dropped": [{"line": s, "z": [z.real, z.imag], "reason": why}
                                   for s, z, why in res.dropped],
                       "max_residual": res.max_residual}
    return doc


def cmd_boundary(args) -> dict:
    P, info = _resolve_polynomial(args)
    pre = analyze(P)
    lem, trace, name = _centers_for(args, pre)
    ctx = make_context(pre, lem)
    curves = trace_boundary(ctx, args.samples)
    dev = max(float(np.max(np.abs(np.abs(lem.q_value(c.points)) - 1.0))) for c in curves)
    doc = {"command": "boundary", "input": info, "P": _poly_doc(P)}
    doc.update(_centers_doc(pre, lem, trace, name))
    doc["boundary"] = {"curves": [{"center_index": c.center_index, "method": c.method,
                                   "points": len(c.points)} for c in curves],
                       "max_level_deviation": dev,
                       "real_crossings": list(ctx.crossings)}
    if args.boundary:
        with open(args.boundary, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["curve_id", "center_index", "re_w", "im_w"])
            for k, c in enumerate(curves):
                for w in c.points:
                    wr.writerow([k, c.center_index, f"{w.real:.17g}", f"{w.imag:.17g}"])
        doc["boundary"]["file"] = args.boundary
    return doc


def demo_rows(key: str, alpha: Optional[float] = None, beta: Optional[float] = None):
    """Computed-versus-reference rows for one named example.

    Returns ``(rows, summary)`` where each row is
    ``(quantity, computed, reference, abs_difference)``; reference entries
    may be None when nothing was published for that quantity.
    """
    ex = get_example(key)
    P = ex.polynomial(alpha=alpha, beta=beta)
    pre = analyze(P)
    t0 = time.perf_counter()
    method = "iterative" if pre.ell >= 2 else "auto"
    lem, trace, _ = lemniscatic_data(pre, method=method)
    elapsed = time.perf_counter() - t0
    rows = []
    params = {k: v for k, v in (("alpha", alpha), ("beta", beta)) if v is not None}
    ref = ex.centers(**params)
    for j, a in enumerate(lem.centers):
        r = None if ref is None else ref[j]
        rows.append((f"a_{j + 1}", float(a), r, None if r is None else abs(float(a) - r)))
    if trace is not None:
        ps = ex.published_steps
        rows.append(("iteration steps", trace.steps, ps, None if ps is None else abs(trace.steps - ps)))
        if ex.exact_centers is not None:
            err = float(np.max(np.abs(lem.centers - np.array(ref))))
            rows.append(("max error vs closed form", err, ex.published_max_error, None))
    rows.append(("capacity", lem.capacity, None, None))
    summary = {"example": ex.key, "description": ex.description, "components": pre.ell,
               "zero_counts": list(pre.zero_counts), "seconds": elapsed}
    return rows, summary


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, int):
        return str(v)
    return f"{v:.15g}" if abs(v) >= 1e-4 or v == 0 else f"{v:.4e}"


def cmd_paper_demo(args) -> Optional[dict]:
    if args.list:
        for ex in EXAMPLES.values():
            print(f"{ex.key:<11} {', '.join(ex.aliases):<26} {ex.description}")
        return None
    if not args.id:
        raise ValidationError("paper-demo needs an example id (or --list)")
    rows, summary = demo_rows(args.id, args.alpha, args.beta)
    print(f"# {summary['example']}: {summary['description']}")
    print(f"# components = {summary['components']}, zero counts = {summary['zero_counts']}, "
          f"time = {summary['seconds']:.3f} s")
    w = max(len(r[0]) for r in rows)
    print(f"{'quantity':<{w}}  {'computed':>22}  {'reference':>22}  {'|difference|':>12}")
    for q, c, r, d in rows:
        print(f"{q:<{w}}  {_fmt(c):>22}  {_fmt(r):>22}  {_fmt(d):>12}")
    if args.out:
        return {"command": "paper-demo", **summary,
                "rows": [{"quantity": q, "computed": c, "reference": r, "abs_difference": d}
                         for q, c, r, d in rows]}
    return None


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lemniscate",
        description="Lemniscatic domains and exterior conformal maps of polynomial preimages.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, centers=True):
        _add_input(p)
        p.add_argument("--out", help="write the JSON document here instead of stdout")
        if centers:
            p.add_argument("--method", choices=["auto", "closed-form", "iterative"], default="auto")
            p.add_argument("--abstol", type=_positive, default=None)
            p.add_argument("--reltol", type=_positive, default=None)
            p.add_argument("--max-outer", type=int, default=None)

    p = sub.add_parser("construct", help="polynomial from endpoints or coefficients")
    common(p, centers=False)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("analyze", help="structure of the preimage of [-1, 1]")
    common(p, centers=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("centers", help="centers and exponents of the lemniscatic domain")
    common(p)
    p.set_defaults(func=cmd_centers)

    p = sub.add_parser("map", help="evaluate the exterior map")
    common(p)
    p.add_argument("--at", type=_complex_list, default=None,
                   help="comma-separated points, e.g. 0.5+1j,2")
    p.add_argument("--polylines", help="CSV file for mapped grid polylines")
    p.add_argument("--grid", choices=["cartesian", "polar"], default="cartesian")
    p.add_argument("--range", type=_float_list, default=None, help="xmin,xmax,ymin,ymax")
    p.add_argument("--radii", type=_float_list, default=None, help="rmin,rmax for polar grids")
    p.add_argument("--lines", type=int, default=11)
    p.add_argument("--samples", type=int, default=101)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("boundary", help="sample the boundary of the lemniscatic domain")
    common(p)
    p.add_argument("--samples", type=int, default=128, help="points per component (>= 16)")
    p.add_argument("--boundary", help="CSV file for the boundary curves")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("paper-demo", help="rerun a named example against its reference values")
    p.add_argument("id", nargs="?", help="example id or alias")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--list", action="store_true", help="list the available examples")
    p.add_argument("--out", help="also write the comparison as JSON")
    p.set_defaults(func=cmd_paper_demo)
    return parser


def _emit(doc: dict, out: Optional[str]) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("LEMNISCATE_LOG", "quiet").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    out = getattr(args, "out", None)
    try:
        doc = args.func(args)
        if doc is not None:
            _check_finite(doc)
            _emit(doc, out)
    except ValidationError as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}}, out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc),
                         "residual": exc.residual if math.isfinite(exc.residual) else None}}, out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except LemniscateError as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}}, out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        # a numerical routine gave up (for instance a bracket without a sign change)
        _emit({"error": {"type": "NumericalFailure", "message": str(exc)}}, out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
