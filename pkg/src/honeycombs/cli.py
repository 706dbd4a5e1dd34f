"""honeycombs command line: classify, render, edges, mesh, table."""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import honeycomb as hc
from . import mesh_out as mo
from . import render_boundary as rb
from .conformal import DegenerateArc
from .schlafli import INF, ElementType, Geometry, SchlafliError, SchlafliSymbol, cell_type, classify_3d, \
    dihedral_angle, parse, parse_term, vertex_type
from .simplex import UnsupportedGeometry

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 2, 3

# errors that mean "valid request, but the computation cannot produce a result"
COMPUTE_ERRORS = (UnsupportedGeometry, hc.NoMaterialCenter, rb.EmptyGrid, mo.EmptyMesh, DegenerateArc, RuntimeError)


class UsageError(Exception):
    pass


# -- argument types ----------------------------------------------------------------

def symbol_arg(text: str) -> SchlafliSymbol:
    try:
        return parse(text)
    except SchlafliError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def resolution_arg(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("resolution must be positive")
    return w, h


def viewport_arg(text: str) -> tuple[float, float, float]:
    try:
        cx, cy, half = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected cx,cy,half, got {text!r}")
    if not half > 0:
        raise argparse.ArgumentTypeError("half extent must be positive")
    return cx, cy, half


def terms_arg(text: str) -> list:
    """Comma list of terms, with ``a..b`` ranges: ``3..7,i``."""
    out = []
    for tok in filter(None, (t.strip() for t in text.split(","))):
        try:
            if ".." in tok:
                lo, hi = (int(v) for v in tok.split(".."))
                if lo > hi:
                    raise argparse.ArgumentTypeError(f"empty range {tok!r}")
                out += [parse_term(str(v)) for v in range(lo, hi + 1)]
            else:
                out.append(parse_term(tok))
        except (SchlafliError, ValueError) as exc:
            raise argparse.ArgumentTypeError(str(exc))
    if not out:
        raise argparse.ArgumentTypeError("empty term list")
    return out


def positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"{text} must be positive")
        return v
    return conv


# -- classify ----------------------------------------------------------------------

def describe(s: SchlafliSymbol) -> str:
    g = classify_3d(s)
    parts = [f"{s}: {g.value}, vertices: {vertex_type(s).value}, cells: {cell_type(s).value}"]
    if s.r != INF:
        parts.append(f"dihedral pi/{s.r} = {180.0 / s.r:.4f} deg")
    else:
        parts.append("dihedral 0 (tangent faces)")
    try:
        parts.append(f"cell dihedral {math.degrees(dihedral_angle(s.p, s.q)):.4f} deg")
    except ValueError:
        pass
    if g is Geometry.HYPERBOLIC and cell_type(s) is ElementType.MATERIAL:
        parts.append(f"inradius {hc.inradius(s):.9f}")
    return ", ".join(parts)


def cmd_classify(args) -> int:
    for s in args.symbols:
        print(describe(s))
    return EXIT_OK


# -- render ------------------------------------------------------------------------

def _viewport(args, s):
    vp = rb.default_viewport(s, args.res, args.center)
    if args.viewport is not None:
        cx, cy, half = args.viewport
        vp = rb.Viewport((cx, cy), half, vp.resolution, vp.pre_isometry, vp.tower_scale)
    return vp


def _palette(args) -> rb.Palette:
    return rb.Palette(start_offset=args.palette_offset, direction=args.palette_direction,
                      rate_constant=args.rate_k, saturate_at=None if args.cycle else 3.0)


def cmd_render(args) -> int:
    s = args.symbol
    img = rb.render(s, _viewport(args, s), _palette(args), args.banana_radius, args.max_iter, args.workers)
    rb.save_png(img, args.out)
    print(f"{s}: wrote {args.out} ({img.shape[1]}x{img.shape[0]})")
    return EXIT_OK


# -- edges and mesh ---------------------------------------------------------------

def _edges(args):
    return hc.enumerate_edges(args.symbol, args.min_length, args.max_depth)


def cmd_edges(args) -> int:
    es = _edges(args)
    hc.write_edges(es, args.out)
    print(f"{args.symbol}: {len(es)} edges -> {args.out}")
    return EXIT_OK


def cmd_mesh(args) -> int:
    es = _edges(args)
    min_d = args.min_diam_mm / args.scale_mm  # model units
    if args.policy == "accurate":
        es = mo.cull(es, min_d, args.r0)
        policy = mo.Accurate(args.r0)
    elif args.policy == "clamped":
        policy = mo.AccurateClamped(args.r0, min_d)
    else:
        policy = mo.ConstantEuclidean(min_d / 2.0)
    mesh = mo.build_mesh(es, policy, args.rings, args.around)
    out = Path(args.out)
    if out.suffix.lower() == ".obj":
        out.write_text(mo.export_obj(mesh))
    else:
        out.write_bytes(mo.export_stl(mesh, args.scale_mm))
    print(f"{args.symbol}: {len(es)} edges, {len(mesh.triangles)} triangles -> {out}")
    return EXIT_OK


# -- table -------------------------------------------------------------------------

PLACEHOLDER_GRAY = 128


def cmd_table(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    w, h = args.res
    rows, failed = [], 0
    for p in args.p:
        for q in args.q:
            for r in args.r:
                s = SchlafliSymbol(p, q, r)
                name = s.filename_stem() + ".png"
                g = classify_3d(s)
                if g is not Geometry.HYPERBOLIC:
                    rb.save_png(np.full((h, w, 3), PLACEHOLDER_GRAY, np.uint8), out_dir / name)
                    rows.append((s, g.value, "placeholder", name))
                    continue
                try:
                    vp = rb.default_viewport(s, (w, h), args.center)
                    img = rb.render(s, vp, _palette(args), args.banana_radius, args.max_iter, args.workers)
                    status = "ok"
                except rb.EmptyGrid:
                    # the whole boundary is limit set: nothing converges
                    img = np.zeros((h, w, 3), np.uint8)
                    status = "all-bailout"
                except COMPUTE_ERRORS as exc:
                    print(f"{s}: failed: {exc}", file=sys.stderr)
                    rows.append((s, g.value, "failed", ""))
                    failed += 1
                    continue
                rb.save_png(img, out_dir / name)
                rows.append((s, g.value, status, name))
    with open(out_dir / "index.tsv", "w") as fh:
        fh.write("symbol\tgeometry\tstatus\tfile\n")
        for s, geo, status, name in rows:
            fh.write(f"{s}\t{geo}\t{status}\t{name}\n")
    print(f"{len(rows)} entries, {failed} failed -> {out_dir}")
    return EXIT_COMPUTE if failed else EXIT_OK


# -- parser ------------------------------------------------------------------------

def _render_flags(sp, with_symbol=True):
    if with_symbol:
        sp.add_argument("--symbol", type=symbol_arg, required=True, help="Schlafli symbol, e.g. 4,3,7 or {7,3,i}")
    sp.add_argument("--res", type=resolution_arg, default=(256, 256), help="image size WxH")
    sp.add_argument("--center", choices=rb.CENTERINGS, default="auto")
    sp.add_argument("--banana-radius", type=float, default=rb.DEFAULT_BANANA)
    sp.add_argument("--rate-k", type=positive(float), default=1.0, help="palette rate constant")
    sp.add_argument("--max-iter", type=positive(int), default=rb.DEFAULT_MAX_ITER)
    sp.add_argument("--palette-offset", type=float, default=0.0)
    sp.add_argument("--palette-direction", type=int, choices=(1, -1), default=1)
    sp.add_argument("--cycle", action="store_true", help="keep cycling colors with depth instead of saturating")
    sp.add_argument("--workers", type=positive(int), default=os.cpu_count() or 1)


def _edge_flags(sp):
    sp.add_argument("--symbol", type=symbol_arg, required=True)
    sp.add_argument("--min-length", type=positive(float), default=0.05, help="euclidean length cutoff")
    sp.add_argument("--max-depth", type=int, default=50)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="honeycombs", description="Regular honeycombs in hyperbolic space.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("classify", help="geometry and element types")
    sp.add_argument("symbols", nargs="+", type=symbol_arg)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("render", help="boundary image as PNG")
    _render_flags(sp)
    sp.add_argument("--viewport", type=viewport_arg, help="cx,cy,half in centred screen coordinates")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("edges", help="edge list in the Poincare ball")
    _edge_flags(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_edges)

    sp = sub.add_parser("mesh", help="printable edge tubes (STL or OBJ)")
    _edge_flags(sp)
    sp.add_argument("--policy", choices=("accurate", "clamped", "constant"), default="accurate")
    sp.add_argument("--r0", type=positive(float), default=mo.DEFAULT_R0, help="tube radius at the ball center")
    sp.add_argument("--scale-mm", type=positive(float), default=50.0, help="mm per unit of ball radius")
    sp.add_argument("--min-diam-mm", type=positive(float), default=1.0)
    sp.add_argument("--rings", type=int, default=mo.DEFAULT_RINGS)
    sp.add_argument("--around", type=int, default=mo.DEFAULT_AROUND)
    sp.add_argument("--out", required=True, help=".stl (binary) or .obj")
    sp.set_defaults(func=cmd_mesh)

    sp = sub.add_parser("table", help="grid of boundary images, one per symbol")
    sp.add_argument("--p", type=terms_arg, default=[3])
    sp.add_argument("--q", type=terms_arg, default=terms_arg("3..7,i"))
    sp.add_argument("--r", type=terms_arg, default=terms_arg("3..7,i"))
    _render_flags(sp, with_symbol=False)
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_table, res=(128, 128))
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except COMPUTE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
