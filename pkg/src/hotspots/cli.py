"""Command-line front end.

Subcommands: solve, analyze, sweep, path, isosceles, selftest. All output
files begin with a header embedding the config hash and seed, so identical
inputs reproduce byte-identical artifacts. Exit codes: 0 ok, 1 usage/parse,
2 certification or verification failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import analysis, render, sweep as sweep_mod
from .config import config_hash, header_line, load_config
from .eigensolver import Eigenpair, NoEigenvalueDipError, find_mu2, \
    make_basis, residual_certificate
from .geometry import DegenerateTriangleError, LabeledTriangle, angles, \
    from_angles

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(EXIT_USAGE)


def _build_parser():
    p = _Parser(prog="hotspots",
                description="Second Neumann eigenfunctions of triangles: "
                            "solve, analyze, sweep.")
    p.add_argument("--config", help="flat-key config file")
    p.add_argument("--seed", type=int, help="override solver seed")
    p.add_argument("--output-dir", help="directory for output artifacts")
    sub = p.add_subparsers(dest="command", required=True)

    def add_triangle_args(sp):
        sp.add_argument("--triangle", help="JSON file {\"v\": [[x,y],...]}")
        sp.add_argument("--angles", help="beta1,beta2 in radians")

    sp = sub.add_parser("solve", help="compute the second Neumann eigenpair")
    add_triangle_args(sp)
    sp.add_argument("--out", default="eigenpair.json")

    sp = sub.add_parser("analyze", help="hot-spots verdict for an eigenpair")
    sp.add_argument("--eigenpair", required=True)
    sp.add_argument("--prefix", default="analysis")

    sp = sub.add_parser("sweep", help="moduli-space classification sweep")
    sp.add_argument("--resolution", type=int)
    sp.add_argument("--margin", type=float)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--out", default="sweep.csv")
    sp.add_argument("--svg", default="moduli.svg")

    sp = sub.add_parser("path", help="continuation along the straight-line "
                                     "path to the right isosceles triangle")
    add_triangle_args(sp)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--out", default="path.csv")

    sp = sub.add_parser("isosceles", help="apex-angle threshold scan")
    sp.add_argument("--lo", type=float, default=0.6)
    sp.add_argument("--hi", type=float, default=1.4)
    sp.add_argument("--steps", type=int, default=12)
    sp.add_argument("--out", default="isosceles.csv")

    sp = sub.add_parser("selftest", help="run the acceptance suite")
    sp.add_argument("--criteria", help="comma-separated ids, e.g. 1,5,12")
    return p


def _load_triangle(args):
    if args.triangle and args.angles:
        raise ValueError("give either --triangle or --angles, not both")
    if args.triangle:
        with open(args.triangle) as fh:
            return LabeledTriangle.from_json_dict(json.load(fh))
    if args.angles:
        parts = [float(x) for x in args.angles.split(",")]
        if len(parts) != 2:
            raise ValueError("--angles expects beta1,beta2")
        return from_angles(*parts)
    raise ValueError("a triangle is required (--triangle or --angles)")


def _out_path(cfg, args, name):
    out_dir = cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def _write_json(path, cfg, payload):
    doc = {"header": {"config_hash": config_hash(cfg),
                      "seed": cfg.solver.seed}}
    doc.update(payload)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _write_csv(path, cfg, header_cols, rows):
    with open(path, "w") as fh:
        fh.write(header_line(cfg) + "\n")
        fh.write(header_cols + "\n")
        for row in rows:
            fh.write(row + "\n")


def cmd_solve(args, cfg):
    tri = _load_triangle(args)
    try:
        ep = find_mu2(tri, cfg.solver)
    except NoEigenvalueDipError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    cert = residual_certificate(ep, seed=cfg.solver.seed)
    path = _out_path(cfg, args, args.out)
    _write_json(path, cfg, ep.to_json_dict())
    print(f"mu2 = {ep.mu!r}")
    print(f"sigma = {ep.sigma:.3e} (tol {cfg.solver.sigma_tol:.1e}), "
          f"sigma_gap = {ep.sigma_gap:.3e}"
          + (", multiplicity flagged" if ep.multiplicity_flag else ""))
    print(f"boundary residual = {cert['bnd_residual']:.3e}, "
          f"helmholtz residual = {cert['helmholtz_residual']:.3e}")
    print(f"wrote {path}")
    certified = ep.sigma <= cfg.solver.sigma_tol
    return EXIT_OK if certified else EXIT_VERIFY


def _check_eigenpair_geometry(ep):
    betas = angles(ep.triangle)
    for block in ep.basis.blocks:
        if block.kind != "vertex":
            continue
        nu_geom = np.pi / betas[block.label - 1]
        if abs(nu_geom - block.nu) > 1e-9 * nu_geom:
            raise ValueError(
                f"stale eigenpair: block at vertex {block.label} has "
                f"nu={block.nu}, geometry requires {nu_geom}")
        if abs(block.anchor - ep.triangle.vertex(block.label)) > 1e-12:
            raise ValueError("stale eigenpair: block anchor off its vertex")


def cmd_analyze(args, cfg):
    with open(args.eigenpair) as fh:
        ep = Eigenpair.from_json_dict(json.load(fh))
    try:
        _check_eigenpair_geometry(ep)
    except ValueError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY

    verdict = analysis.hot_spots_verdict(ep, cfg.analysis)
    arc = analysis.nodal_arc(ep, cfg.analysis)

    payload = {
        "classification": verdict.classification,
        "crit_count": verdict.crit_count,
        "critical_points": [
            {"x": r.location.real, "y": r.location.imag, "locus": r.locus,
             "edge": r.edge, "arclength": r.arclength, "morse": r.morse,
             "grad_residual": r.grad_residual,
             "det_hessian": None if np.isnan(r.det_hessian)
             else r.det_hessian}
            for r in verdict.reports],
        "extremum_at_vertices": verdict.extremum_at_vertices,
        "nodal_arc_ok": verdict.nodal_arc_ok,
        "coeff_ok": verdict.coeff_ok,
        "vertex_values": list(verdict.vertex_values),
        "vertex_c1": [None if np.isnan(c) else c for c in verdict.vertex_c1],
        "min_vertex_ratio": verdict.min_vertex_ratio,
        "margins": {k: repr(v) for k, v in verdict.margins.items()},
    }
    vpath = _out_path(cfg, args, f"{args.prefix}_verdict.json")
    _write_json(vpath, cfg, payload)

    rows = [f"{p.real!r},{p.imag!r}" for p in arc.points]
    npath = _out_path(cfg, args, f"{args.prefix}_nodal.csv")
    _write_csv(npath, cfg, "x,y", rows)

    svg = render.contour_svg(
        ep, header_line(cfg, comment="").strip(), nodal=arc.points,
        crits=[r.location for r in verdict.reports])
    spath = _out_path(cfg, args, f"{args.prefix}_contour.svg")
    with open(spath, "w") as fh:
        fh.write(svg)

    print(f"verdict: {verdict.classification} "
          f"(crit_count={verdict.crit_count})")
    print(f"wrote {vpath}, {npath}, {spath}")
    return EXIT_OK


def cmd_sweep(args, cfg):
    resolution = args.resolution or cfg.sweep.resolution
    margin = args.margin if args.margin is not None else cfg.sweep.margin
    records = sweep_mod.moduli_sweep(resolution, margin, cfg,
                                     workers=args.workers)
    path = _out_path(cfg, args, args.out)
    _write_csv(path, cfg, sweep_mod.SWEEP_CSV_HEADER,
               [r.csv_row() for r in records])
    svg = render.moduli_svg(records, header_line(cfg, comment="").strip(),
                            resolution, margin)
    spath = _out_path(cfg, args, args.svg)
    with open(spath, "w") as fh:
        fh.write(svg)
    counts = {}
    for r in records:
        counts[r.verdict] = counts.get(r.verdict, 0) + 1
    print(f"swept {len(records)} nodes: {counts}")
    print(f"wrote {path}, {spath}")
    return EXIT_OK


def cmd_path(args, cfg):
    tri = _load_triangle(args)
    steps = args.steps or cfg.sweep.path_steps
    records = sweep_mod.continuation(tri, steps, cfg)
    report = sweep_mod.crit_trajectory(records)
    path = _out_path(cfg, args, args.out)
    _write_csv(path, cfg, sweep_mod.PATH_CSV_HEADER,
               [r.csv_row() for r in records])
    print(f"continuation with {len(records)} records; critical point present "
          f"at {report.present_count} of them")
    if report.disappearance:
        d = report.disappearance
        print(f"disappears near vertex {d['vertex']} "
              f"(distance {d['distance']:.4f}, |u(v)|/scale "
              f"{d['vertex_ratio']:.3e})")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_isosceles(args, cfg):
    result = sweep_mod.isosceles_scan(args.lo, args.hi, args.steps, cfg)
    rows = [f"{b!r},{n},{v}" for b, n, v in
            zip(result.betas, result.crit_counts, result.verdicts)]
    path = _out_path(cfg, args, args.out)
    _write_csv(path, cfg, "beta,crit_count,verdict", rows)
    print(f"threshold = {result.threshold!r} "
          f"(pi/3 = {np.pi / 3.0!r}, monotone={result.monotone})")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_selftest(args, cfg):
    from . import acceptance
    wanted = None
    if args.criteria:
        wanted = {int(x) for x in args.criteria.split(",")}
    results = acceptance.run_criteria(cfg, only=wanted)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(r.line())
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_VERIFY


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["solver.seed"] = args.seed
    if args.output_dir:
        overrides["output_dir"] = args.output_dir
    try:
        cfg = load_config(args.config, overrides)
    except (OSError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    handlers = {"solve": cmd_solve, "analyze": cmd_analyze,
                "sweep": cmd_sweep, "path": cmd_path,
                "isosceles": cmd_isosceles, "selftest": cmd_selftest}
    try:
        return handlers[args.command](args, cfg)
    except (ValueError, DegenerateTriangleError, json.JSONDecodeError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
