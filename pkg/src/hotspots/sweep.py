"""Moduli-space classification sweeps, eigenfunction continuation along
deformation paths, critical-point trajectories, and the isosceles apex scan.

Sweep nodes are solved independently on a worker pool and reported sorted by
(beta1, beta2); per-node failures become AMBIGUOUS records with a reason,
never an aborted sweep. Continuation is sequential in t with warm-started
eigenvalue scans and sign alignment against the previous step.
"""

import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import qmc

from . import analysis, field as field_mod
from .config import RunConfig
from .eigensolver import NoEigenvalueDipError, find_mu2
from .fem import FemConvergenceError
from .geometry import classify, from_angles, straight_line_path

SWEEP_CSV_HEADER = ("beta1,beta2,mu2,u_v1,u_v2,u_v3,c1_v1,c1_v2,c1_v3,"
                    "verdict,crit_x,crit_y,sigma,flags")
PATH_CSV_HEADER = ("t,v1x,v1y,v2x,v2y,v3x,v3y,mu2,sigma,crit_x,crit_y,"
                   "min_vertex_ratio,c1_obtuse,flags")


@dataclass
class SweepRecord:
    beta1: float
    beta2: float
    mu2: float | None
    u_v: tuple
    c1_v: tuple
    verdict: str
    crit: complex | None
    sigma: float | None
    flags: tuple

    def csv_row(self):
        def num(x):
            return "" if x is None or (isinstance(x, float) and np.isnan(x)) \
                else repr(float(x))
        cells = [repr(self.beta1), repr(self.beta2), num(self.mu2),
                 *(num(u) for u in self.u_v), *(num(c) for c in self.c1_v),
                 self.verdict,
                 num(self.crit.real if self.crit is not None else None),
                 num(self.crit.imag if self.crit is not None else None),
                 num(self.sigma), ";".join(self.flags)]
        return ",".join(cells)


@dataclass
class PathRecord:
    t: float
    triangle: object
    eigenpair: object
    crit: complex | None
    crit_count: int
    vertex_ratios: tuple         # |u(v_i)| / scale
    min_vertex_ratio: float
    c1_obtuse: float | None
    flags: tuple

    def csv_row(self):
        tri = self.triangle
        ep = self.eigenpair
        cells = [repr(self.t)]
        for v in tri.vertices:
            cells += [repr(v.real), repr(v.imag)]
        cells += [repr(ep.mu), repr(ep.sigma)]
        cells += ["" if self.crit is None else repr(self.crit.real),
                  "" if self.crit is None else repr(self.crit.imag)]
        cells += [repr(self.min_vertex_ratio),
                  "" if self.c1_obtuse is None else repr(self.c1_obtuse),
                  ";".join(self.flags)]
        return ",".join(cells)


def simplex_grid(resolution, margin):
    """Angle pairs (beta1, beta2) of the triangular moduli grid, all three
    angles strictly greater than margin."""
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    if margin < 0.05:
        raise ValueError("margin must be at least 0.05 rad")
    h = (np.pi - 3.0 * margin) / resolution
    nodes = []
    for i in range(1, resolution):
        for j in range(1, resolution - i):
            nodes.append((margin + i * h, margin + j * h))
    return nodes


def _near_equilateral(betas, band):
    return all(abs(b - np.pi / 3.0) < band for b in betas)


def sweep_node(beta1, beta2, cfg):
    """One sweep node: solve, run the verdict, fold failures into AMBIGUOUS."""
    betas = (beta1, beta2, np.pi - beta1 - beta2)
    try:
        tri = from_angles(beta1, beta2)
        if _near_equilateral(betas, cfg.sweep.near_equilateral_band):
            ep = find_mu2(tri, cfg.solver)
            u_v = field_mod.eval_exact_sum(
                ep, np.array(tri.vertices, dtype=complex))
            scale = analysis.field_scale(ep)
            return SweepRecord(
                beta1=beta1, beta2=beta2, mu2=ep.mu,
                u_v=tuple(u_v / scale), c1_v=(np.nan,) * 3,
                verdict=analysis.AMBIGUOUS, crit=None, sigma=ep.sigma,
                flags=("near-equilateral",))
        ep = find_mu2(tri, cfg.solver)
        verdict = analysis.hot_spots_verdict(ep, cfg.analysis)
        crit = None
        for rep in verdict.reports:
            if rep.locus == "edge":
                crit = rep.location
                break
        flags = tuple(sorted(verdict.margins)) \
            + (("multiplicity",) if ep.multiplicity_flag else ())
        return SweepRecord(
            beta1=beta1, beta2=beta2, mu2=ep.mu,
            u_v=tuple(verdict.vertex_values), c1_v=tuple(verdict.vertex_c1),
            verdict=verdict.classification, crit=crit, sigma=ep.sigma,
            flags=flags)
    except (NoEigenvalueDipError, FemConvergenceError, ValueError,
            RuntimeError) as exc:
        return SweepRecord(
            beta1=beta1, beta2=beta2, mu2=None, u_v=(np.nan,) * 3,
            c1_v=(np.nan,) * 3, verdict=analysis.AMBIGUOUS, crit=None,
            sigma=None,
            flags=(f"solver-failure:{type(exc).__name__}",))
    except Exception:
        return SweepRecord(
            beta1=beta1, beta2=beta2, mu2=None, u_v=(np.nan,) * 3,
            c1_v=(np.nan,) * 3, verdict=analysis.AMBIGUOUS, crit=None,
            sigma=None,
            flags=("solver-failure:" + traceback.format_exc(limit=1)
                   .splitlines()[-1][:60],))


def _sweep_worker(args):
    beta1, beta2, cfg = args
    return sweep_node(beta1, beta2, cfg)


def moduli_sweep(resolution=24, margin=0.05, config=None, workers=None):
    """Classify every node of the moduli grid; returns records sorted by
    (beta1, beta2)."""
    cfg = config or RunConfig()
    nodes = simplex_grid(resolution, margin)
    jobs = [(b1, b2, cfg) for b1, b2 in nodes]
    n_workers = workers if workers else (cfg.sweep.workers or None)
    if n_workers == 1:
        records = [_sweep_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            records = list(pool.map(_sweep_worker, jobs, chunksize=4))
    records.sort(key=lambda r: (r.beta1, r.beta2))
    return records


def reference_barycentric(n=100):
    """Fixed quasi-random barycentric reference points (deterministic)."""
    raw = qmc.Halton(d=2, scramble=False).random(n + 8)[8:]
    a, b = raw[:, 0], raw[:, 1]
    flip = a + b > 1.0
    a[flip], b[flip] = 1.0 - a[flip], 1.0 - b[flip]
    return np.column_stack([1.0 - a - b, a, b])


def _path_record(tri, ep, cfg, flags=()):
    scale = analysis.field_scale(ep)
    u_v = field_mod.eval_exact_sum(ep, np.array(tri.vertices, dtype=complex))
    reports = analysis.boundary_critical_points(ep, cfg.analysis)
    crit = reports[0].location if reports else None
    shape = classify(tri)
    c1_obtuse = None
    if shape.kind == "obtuse":
        try:
            vc = analysis.bessel_coefficients(ep, shape.obtuse_vertex, n_max=1)
            c1_obtuse = float(vc.c[1])
        except analysis.CoefficientExtractionError:
            flags = tuple(flags) + ("c1-extraction-failed",)
    ratios = tuple(np.abs(u_v) / scale)
    return PathRecord(
        t=0.0, triangle=tri, eigenpair=ep, crit=crit, crit_count=len(reports),
        vertex_ratios=ratios, min_vertex_ratio=float(min(ratios)),
        c1_obtuse=c1_obtuse, flags=tuple(flags))


def continuation(tri0, steps=100, config=None):
    """Eigenfunctions along the straight-line path from tri0 to (0, 1, i).

    Signs are aligned to the previous step by inner product over fixed
    barycentric reference points (the affine correspondence between the
    triangles); the eigenvalue scan warm-starts from the previous value.
    """
    cfg = config or RunConfig()
    if steps < 50:
        raise ValueError("continuation needs at least 50 steps")
    shape = classify(tri0)
    if shape.kind == "right" or shape.is_equilateral:
        raise ValueError("path start must be non-right and non-equilateral")

    lam_ref = reference_barycentric(100)
    records = []
    prev_u = None
    prev_mu = None
    for k in range(steps + 1):
        t = k / steps
        tri = straight_line_path(tri0, t)
        flags = []
        ep, prev_mu = _solve_step(tri, cfg, prev_mu, lam_ref, prev_u)
        u_ref = field_mod.eval_fields(
            ep, tri.from_barycentric(lam_ref), want_grad=False)[0]
        if prev_u is not None:
            ip = float(u_ref @ prev_u) / (
                np.linalg.norm(u_ref) * np.linalg.norm(prev_u))
            if abs(ip) < 0.5:
                # step too coarse: solve the midpoint once and re-align
                t_mid = (records[-1].t + t) / 2.0
                tri_mid = straight_line_path(tri0, t_mid)
                ep_mid, _ = _solve_step(tri_mid, cfg, prev_mu, lam_ref, prev_u)
                u_mid = field_mod.eval_fields(
                    ep_mid, tri_mid.from_barycentric(lam_ref),
                    want_grad=False)[0]
                if float(u_mid @ prev_u) < 0:
                    u_mid = -u_mid
                ip = float(u_ref @ u_mid) / (
                    np.linalg.norm(u_ref) * np.linalg.norm(u_mid))
                if abs(ip) < 0.5:
                    flags.append("alignment")
            if ip < 0:
                ep = replace(ep, coeffs=-ep.coeffs)
                u_ref = -u_ref
        rec = _path_record(tri, ep, cfg, flags)
        rec.t = t
        records.append(rec)
        prev_u = u_ref
        prev_mu = ep.mu
    return records


def _solve_step(tri, cfg, prev_mu, lam_ref, prev_u):
    align = (lam_ref, prev_u) if prev_u is not None else None
    if prev_mu is not None:
        try:
            ep = find_mu2(tri, cfg.solver, window=(0.9 * prev_mu, 1.1 * prev_mu),
                          mu_ref=prev_mu, align_values=align)
            return ep, prev_mu
        except NoEigenvalueDipError:
            pass
    ep = find_mu2(tri, cfg.solver, align_values=align)
    return ep, ep.mu


@dataclass
class TrajectoryReport:
    points: list                 # (t, location) while present
    present_count: int
    max_step_displacement: float
    linking_ok: bool
    ambiguous: bool
    last_t: float | None
    disappearance: dict | None   # vertex label, distance, |u(v)|/scale


def crit_trajectory(path):
    """Link critical points across consecutive path records."""
    if not path:
        raise ValueError("empty path")
    dt = path[1].t - path[0].t if len(path) > 1 else 1.0
    points = [(r.t, r.crit) for r in path if r.crit is not None]
    present = len(points)
    linking_ok = True
    max_disp = 0.0
    for (t0, p0), (t1, p1) in zip(points, points[1:]):
        if abs(t1 - t0 - dt) > 1e-9:
            continue  # gap in presence; not a linked step
        gate = 10.0 * dt * straight_line_path_diameter(path, t1)
        d = abs(p1 - p0)
        max_disp = max(max_disp, d)
        if d > gate:
            linking_ok = False

    last = None
    disappearance = None
    for rec in path:
        if rec.crit is not None:
            last = rec
    if last is not None and last.t < path[-1].t:
        tri = last.triangle
        dists = [abs(last.crit - v) for v in tri.vertices]
        v_near = int(np.argmin(dists)) + 1
        disappearance = {
            "vertex": v_near,
            "distance": float(min(dists)),
            "vertex_ratio": last.vertex_ratios[v_near - 1],
            "min_vertex_ratio": last.min_vertex_ratio,
        }
    ambiguous = any(r.crit_count > 1 for r in path)
    return TrajectoryReport(
        points=points,
        present_count=present,
        max_step_displacement=max_disp,
        linking_ok=linking_ok,
        ambiguous=ambiguous,
        last_t=last.t if last is not None else None,
        disappearance=disappearance,
    )


def straight_line_path_diameter(path, t):
    for rec in path:
        if abs(rec.t - t) < 1e-12:
            return rec.triangle.diameter
    return path[-1].triangle.diameter


@dataclass
class IsoscelesScanResult:
    betas: list
    crit_counts: list
    verdicts: list
    threshold: float
    monotone: bool
    records: list


def _isosceles_triangle(beta):
    return from_angles((np.pi - beta) / 2.0, (np.pi - beta) / 2.0)


def _isosceles_has_crit(beta, cfg, warm=None):
    tri = _isosceles_triangle(beta)
    ep = find_mu2(tri, cfg.solver)
    reports = analysis.boundary_critical_points(ep, cfg.analysis)
    return len(reports), ep, reports


def isosceles_scan(beta_lo, beta_hi, steps=20, config=None):
    """Verdict along the isosceles family (apex angle beta at v3) and the
    bisected CRIT -> NOCRIT threshold.

    The scan verdict is the detected critical-point count (the quantity the
    threshold statement is about); endpoints must avoid pi/3 +- 0.02.
    """
    cfg = config or RunConfig()
    third = np.pi / 3.0
    if not (beta_lo < third - 0.02 and beta_hi > third + 0.02):
        raise ValueError("scan endpoints must straddle pi/3 by at least 0.02")
    betas = list(np.linspace(beta_lo, beta_hi, steps))
    counts = []
    records = []
    for b in betas:
        n, ep, reports = _isosceles_has_crit(b, cfg)
        counts.append(n)
        records.append((b, n, ep.mu, ep.sigma,
                        reports[0].location if reports else None))
    verdicts = [analysis.CRIT if n >= 1 else analysis.NOCRIT for n in counts]
    flips = [i for i in range(len(betas) - 1)
             if verdicts[i] != verdicts[i + 1]]
    monotone = len(flips) == 1 and verdicts[0] == analysis.CRIT \
        and verdicts[-1] == analysis.NOCRIT

    if not flips:
        raise RuntimeError("no CRIT/NOCRIT transition found in the scan range")
    lo, hi = betas[flips[0]], betas[flips[0] + 1]
    lo_crit = verdicts[flips[0]] == analysis.CRIT
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        n_mid = _isosceles_has_crit(mid, cfg)[0]
        mid_crit = n_mid >= 1
        if mid_crit == lo_crit:
            lo = mid
        else:
            hi = mid
    return IsoscelesScanResult(
        betas=betas, crit_counts=counts, verdicts=verdicts,
        threshold=0.5 * (lo + hi), monotone=monotone, records=records)
