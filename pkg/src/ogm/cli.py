"""Command-line entry point.

All structured output is JSON on stdout (or files named by flags); logs go
to stderr.  Exit codes: 0 success/PASS, 1 validation or verification
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import coverings as cvg
from . import curves as cv
from . import geodesics as geo
from . import hexagon as hx
from . import trees as tr
from . import verify as vf
from .cover import CoverComplex, CoverError, explore, make_stream
from .manifold import GraphManifoldSpec, check_irreducible, validate


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_spec(path: str) -> GraphManifoldSpec:
    return GraphManifoldSpec.from_json_file(path)


def _write_or_print(doc: dict, out: Optional[str]) -> None:
    text = json.dumps(doc, sort_keys=True, indent=1)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _complex_from_args(spec: GraphManifoldSpec, args) -> CoverComplex:
    if getattr(args, "complex", None):
        with open(args.complex, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("spec_digest") != spec.digest():
            raise CoverError("complex dump was built from a different spec")
        return explore(
            spec,
            int(doc["t0_depth"]),
            int(doc["hex_depth"]),
            fiber_range=float(doc["fiber_range"]),
            wall_comp_depth=doc.get("wall_comp_depth"),
        )
    return explore(
        spec,
        args.t0_depth,
        args.hex_depth,
        fiber_range=args.fiber_range,
        wall_comp_depth=args.wall_comp_depth,
    )


def _tc_point_doc(p: tr.TcPoint) -> dict:
    if p.tree is not None:
        return {
            "kind": "tree",
            "owner": list(p.owner),
            "parent": list(p.tree.parent),
            "child": list(p.tree.child) if p.tree.child else None,
            "offset": p.tree.offset,
        }
    return {"kind": "line", "owner": list(p.owner), "value": p.value}


def cmd_validate(args) -> int:
    spec = _load_spec(args.spec)
    violations = validate(spec)
    for v in violations:
        print(json.dumps({"violation": v}))
    return 1 if violations else 0


def cmd_constants(args) -> int:
    g = hx.hexagon_constants()
    doc = {
        "s": float(f"{g.side_unit_curvature:.15g}"),
        "kappa": float(f"{g.kappa:.15g}"),
        "rho": float(f"{g.rho:.15g}"),
        "delta": float(f"{g.delta:.15g}"),
    }
    print(json.dumps(doc, sort_keys=True))
    return 0


def cmd_explore(args) -> int:
    spec = _load_spec(args.spec)
    cplx = explore(
        spec,
        args.t0_depth,
        args.hex_depth,
        fiber_range=args.fiber_range,
        wall_comp_depth=args.wall_comp_depth,
    )
    _write_or_print(cplx.summary(), args.out)
    _log(f"explored {len(cplx.blocks)} blocks, {len(cplx.walls)} walls")
    return 0


def cmd_geodesic(args) -> int:
    spec = _load_spec(args.spec)
    cplx = _complex_from_args(spec, args)
    x = cplx.parse_point(getattr(args, "from"))
    y = cplx.parse_point(args.to)
    res = geo.distance(cplx, x, y, tol=args.tol)
    doc = {
        "distance": res.distance,
        "truncated": res.truncated,
        "sweeps": res.sweeps,
        "chain": [
            {"parent": list(w.parent), "parent_comp": w.parent_comp, "coords": c}
            for w, c in zip(res.config.walls, res.config.coords)
        ],
    }
    _write_or_print(doc, args.out)
    return 0


def cmd_phi(args) -> int:
    spec = _load_spec(args.spec)
    cplx = _complex_from_args(spec, args)
    ts = tr.TreeSystem(cplx)
    p = cplx.parse_point(args.point)
    prod = ts.phi(p)
    doc = {
        "t0": list(prod.t0),
        "classes": {str(lab): _tc_point_doc(pt) for lab, pt in prod.coords},
    }
    _write_or_print(doc, args.out)
    return 0


def cmd_tree_dist(args) -> int:
    spec = _load_spec(args.spec)
    cplx = _complex_from_args(spec, args)
    ts = tr.TreeSystem(cplx)
    a = cplx.parse_point(args.a)
    b = cplx.parse_point(args.b)
    labels = [args.class_label] if args.class_label is not None else list(ts.class_labels)
    doc = {
        str(lab): ts.tc_distance(lab, ts.phi_c(lab, a), ts.phi_c(lab, b))
        for lab in labels
    }
    _write_or_print(doc, args.out)
    return 0


def cmd_curve(args) -> int:
    spec = _load_spec(args.spec)
    cplx = _complex_from_args(spec, args)
    ts = tr.TreeSystem(cplx)
    x = cplx.parse_point(getattr(args, "from"))
    y = cplx.parse_point(args.to)
    g = hx.hexagon_constants()
    try:
        path = cv.build_special_curve(cplx, ts, x, y)
    except cv.CurveTruncationError as exc:
        _write_or_print({"error": "truncated", "detail": str(exc)}, args.out)
        return 1
    e = ts.product_distance(ts.phi(x), ts.phi(y))
    doc = {
        "length": cv.curve_length(cplx, path),
        "bound": (2 * g.delta + 1) * e + 2 * g.delta,
        "embedded_distance": e,
        "segments": [
            {"kind": s.kind, "role": s.role, "block": list(s.block), "points": len(s.points)}
            for s in path.segments
        ],
    }
    _write_or_print(doc, args.out)
    return 0


def _run_config(args) -> vf.RunConfig:
    return vf.RunConfig(
        t0_depth=args.t0_depth,
        hex_depth=args.hex_depth,
        samples=args.samples,
        seed=args.seed,
        tol=args.tol,
        fiber_range=args.fiber_range,
        wall_comp_depth=args.wall_comp_depth,
        workers=args.workers,
    )


def cmd_verify_qi(args) -> int:
    spec = _load_spec(args.spec)
    cfg = _run_config(args)
    records = vf.collect_records(spec, cfg)
    rep = vf.verify_qi(spec, cfg, records)
    if args.csv:
        vf.dump_pairs_csv(records, args.csv)
    _write_or_print(rep.to_dict(), args.out)
    _log(f"verify-qi: {rep.verdict} ({rep.usable} usable, {rep.truncated} truncated)")
    return 0 if rep.verdict == "PASS" else 1


def cmd_verify_lipschitz(args) -> int:
    spec = _load_spec(args.spec)
    cfg = _run_config(args)
    records = vf.collect_records(spec, cfg)
    rep = vf.verify_lipschitz(spec, cfg, records)
    _write_or_print(rep.to_dict(), args.out)
    _log(f"verify-lipschitz: {rep.verdict}")
    return 0 if rep.verdict == "PASS" else 1


def covering_report(
    spec: GraphManifoldSpec, cfg: vf.RunConfig, scale: float, binding_pairs: int = 60
) -> dict:
    """Tree coverings on the embedded factors, their product, and the
    pullback check with QI-transferred constants."""
    cplx, ts = vf._prepare(spec, cfg)
    pts = [cplx.sample_point(make_stream(cfg.seed, i)) for i in range(cfg.samples)]
    phis = [ts.phi(p) for p in pts]
    n = len(pts)
    t0_d = np.zeros((n, n))
    tc_d = {lab: np.zeros((n, n)) for lab in ts.class_labels}
    for i in range(n):
        for j in range(i + 1, n):
            t0_d[i, j] = t0_d[j, i] = ts.t0_distance(phis[i].t0, phis[j].t0)
            for lab in ts.class_labels:
                v = ts.tc_distance(lab, phis[i].coord(lab), phis[j].coord(lab))
                tc_d[lab][i, j] = tc_d[lab][j, i] = v
    sum_d = t0_d.copy()
    factors = [cvg.tree_covering(t0_d, t0_d[0], scale)]
    factor_checks = [cvg.check_covering(factors[0], t0_d)]
    for lab in ts.class_labels:
        cov = cvg.tree_covering(tc_d[lab], tc_d[lab][0], scale)
        factors.append(cov)
        factor_checks.append(
            cvg.check_covering(cov, tc_d[lab], slack=8 * tr.PROFILE_H)
        )
        sum_d += tc_d[lab]
    prod = cvg.product_covering(factors)
    prod_check = cvg.check_covering(prod, sum_d, slack=8 * tr.PROFILE_H)
    consts = vf.base_constants(spec.n)

    solver_cache: dict[tuple[int, int], float] = {}

    def cover_distance(i: int, j: int) -> float:
        key = (min(i, j), max(i, j))
        if key not in solver_cache:
            solver_cache[key] = geo.distance(cplx, pts[key[0]], pts[key[1]], tol=cfg.tol).distance
        return solver_cache[key]

    pull = cvg.pullback_check(
        prod,
        sum_d,
        cover_distance,
        consts["C"],
        slack=1.0 + 8 * tr.PROFILE_H,
        binding_pairs=binding_pairs,
    )
    ok = all(c.ok for c in factor_checks) and prod_check.ok and pull.ok

    def chk_doc(c: cvg.CoveringCheck) -> dict:
        return {
            "ok": c.ok,
            "min_same_color_separation": None
            if c.min_same_color_separation == float("inf")
            else c.min_same_color_separation,
            "max_piece_diameter": c.max_piece_diameter,
            "required_separation": c.required_separation,
            "allowed_diameter": c.allowed_diameter,
            "checked_pairs": c.checked_pairs,
        }

    return {
        "verdict": "PASS" if ok else "FAIL",
        "spec_digest": spec.digest(),
        "scale": scale,
        "samples": n,
        "config": cfg.to_dict(),
        "factors": [
            {"colors": f.colors, "pieces": len(f.piece_color), "check": chk_doc(c)}
            for f, c in zip(factors, factor_checks)
        ],
        "product": {"colors": prod.colors, "pieces": len(prod.piece_color), "check": chk_doc(prod_check)},
        "pullback": chk_doc(pull),
    }


def cmd_covering(args) -> int:
    spec = _load_spec(args.spec)
    cfg = _run_config(args)
    doc = covering_report(spec, cfg, args.scale, args.binding_pairs)
    _write_or_print(doc, args.out)
    _log(f"covering: {doc['verdict']}")
    return 0 if doc["verdict"] == "PASS" else 1


def cmd_report(args) -> int:
    spec = _load_spec(args.spec)
    violations = validate(spec)
    if violations:
        _write_or_print({"verdict": "FAIL", "violations": violations}, args.out)
        return 1
    cfg = _run_config(args)
    irr = check_irreducible(spec, cfg.t0_depth)
    doc: dict = {
        "spec_digest": spec.digest(),
        "n": spec.n,
        "config": cfg.to_dict(),
        "constants": vf.base_constants(spec.n),
        "irreducible": irr.irreducible,
        "irreducibility_reason": irr.reason,
    }
    if not irr.irreducible:
        doc["verdict"] = "FAIL"
        _write_or_print(doc, args.out)
        return 1
    records = vf.collect_records(spec, cfg)
    lip = vf.verify_lipschitz(spec, cfg, records)
    qi = vf.verify_qi(spec, cfg, records)
    curves_rep = vf.verify_curves(spec, cfg, records)
    covering = covering_report(spec, cfg, scale=8.0, binding_pairs=args.binding_pairs)
    doc["lipschitz"] = lip.to_dict()
    doc["qi"] = qi.to_dict()
    doc["curves"] = curves_rep.to_dict()
    doc["covering"] = covering
    verdicts = [lip.verdict, qi.verdict, curves_rep.verdict, covering["verdict"]]
    doc["verdict"] = "PASS" if all(v == "PASS" for v in verdicts) else "FAIL"
    _write_or_print(doc, args.out)
    _log(f"report: {doc['verdict']}")
    return 0 if doc["verdict"] == "PASS" else 1


def _add_complex_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--complex", help="complex summary JSON to rebuild from")
    p.add_argument("--t0-depth", type=int, default=2, dest="t0_depth")
    p.add_argument("--hex-depth", type=int, default=4, dest="hex_depth")
    p.add_argument("--fiber-range", type=float, default=8.0, dest="fiber_range")
    p.add_argument(
        "--wall-comp-depth", type=int, default=None, dest="wall_comp_depth"
    )


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t0-depth", type=int, default=2, dest="t0_depth")
    p.add_argument("--hex-depth", type=int, default=4, dest="hex_depth")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--fiber-range", type=float, default=3.0, dest="fiber_range")
    p.add_argument("--wall-comp-depth", type=int, default=0, dest="wall_comp_depth")
    p.add_argument("--workers", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ogm")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a gluing-graph spec file")
    p.add_argument("spec")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("constants", help="hexagon constants as JSON")
    p.set_defaults(fn=cmd_constants)

    p = sub.add_parser("explore", help="build and dump a cover complex")
    p.add_argument("--spec", required=True)
    p.add_argument("--t0-depth", type=int, required=True, dest="t0_depth")
    p.add_argument("--hex-depth", type=int, required=True, dest="hex_depth")
    p.add_argument("--fiber-range", type=float, default=8.0, dest="fiber_range")
    p.add_argument("--wall-comp-depth", type=int, default=None, dest="wall_comp_depth")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_explore)

    p = sub.add_parser("geodesic", help="distance between two point addresses")
    p.add_argument("--spec", required=True)
    _add_complex_args(p)
    p.add_argument("--from", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_geodesic)

    p = sub.add_parser("phi", help="embedded product coordinates of a point")
    p.add_argument("--spec", required=True)
    _add_complex_args(p)
    p.add_argument("--point", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_phi)

    p = sub.add_parser("tree-dist", help="T_c distance between two points")
    p.add_argument("--spec", required=True)
    _add_complex_args(p)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--class-label", type=int, default=None, dest="class_label")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_tree_dist)

    p = sub.add_parser("curve", help="special witness curve between points")
    p.add_argument("--spec", required=True)
    _add_complex_args(p)
    p.add_argument("--from", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_curve)

    p = sub.add_parser("verify-qi", help="certify the quasi-isometry sandwich")
    p.add_argument("--spec", required=True)
    _add_run_args(p)
    p.add_argument("--csv", help="dump (d, e) sample pairs")
    p.set_defaults(fn=cmd_verify_qi)

    p = sub.add_parser("verify-lipschitz", help="certify the Lipschitz bounds")
    p.add_argument("--spec", required=True)
    _add_run_args(p)
    p.set_defaults(fn=cmd_verify_lipschitz)

    p = sub.add_parser("covering", help="colored covering checks at a scale")
    p.add_argument("--spec", required=True)
    _add_run_args(p)
    p.add_argument("--scale", type=float, default=8.0)
    p.add_argument("--binding-pairs", type=int, default=60, dest="binding_pairs")
    p.set_defaults(fn=cmd_covering)

    p = sub.add_parser("report", help="full verification pipeline")
    p.add_argument("--spec", required=True)
    _add_run_args(p)
    p.add_argument("--binding-pairs", type=int, default=60, dest="binding_pairs")
    p.set_defaults(fn=cmd_report)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CoverError, hx.TruncationError, OSError, ValueError) as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
