"""Critical-point detection and Morse classification, vertex Bessel
coefficients, nodal-arc tracing, extremum location, and the per-triangle
hot-spots verdict.

Vertices are never critical points by definition; loci exclude a delta_v
neighborhood of each vertex and the coefficient analysis covers that zone
instead. AMBIGUOUS is a first-class verdict: any violated margin is recorded
rather than forced.
"""

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import field as field_mod
from .config import AnalysisConfig
from .geometry import edge_frame
from .specfun import bessel_j

CRIT, NOCRIT, AMBIGUOUS = "CRIT", "NOCRIT", "AMBIGUOUS"


class CoefficientExtractionError(RuntimeError):
    pass


@dataclass
class CriticalPointReport:
    location: complex
    locus: str                  # 'interior' or 'edge'
    edge: int | None
    arclength: float | None
    grad_residual: float        # |grad u| / field scale
    hessian: np.ndarray         # edge frame (tt, tn, nn) on edges, else global
    morse: str                  # 'index0' | 'index1' | 'index2' | 'degenerate'
    det_hessian: float
    mixed_term_ok: bool = True


@dataclass
class VertexCoefficients:
    vertex: int
    c: np.ndarray               # c_0 .. c_{n_max}
    err: np.ndarray             # conditioning-based absolute error estimates
    r_probe: float
    quad_nodes: int


@dataclass
class NodalArc:
    points: np.ndarray
    endpoints: list             # descriptors ('edge', e, s) or ('vertex', v)
    arc_count: int
    boundary_zeros: list
    stalled: bool = False


@dataclass
class ExtremumReport:
    argmax: complex
    argmin: complex
    max_at_vertex: bool
    min_at_vertex: bool
    max_vertex: int | None
    min_vertex: int | None
    vertex_values: np.ndarray


@dataclass
class HotSpotsVerdict:
    crit_count: int
    reports: list
    extremum_at_vertices: bool
    nodal_arc_ok: bool
    coeff_ok: bool
    classification: str
    margins: dict = dc_field(default_factory=dict)
    vertex_values: np.ndarray | None = None
    vertex_c1: np.ndarray | None = None
    min_vertex_ratio: float | None = None
    scale: float | None = None


@lru_cache(maxsize=128)
def field_scale(ep):
    """max |u| over a dense interior + boundary + vertex sample."""
    tri = ep.triangle
    pts = [np.array(tri.vertices, dtype=complex)]
    lam = _barycentric_grid(80)
    pts.append(tri.from_barycentric(lam))
    for e in (1, 2, 3):
        fr = edge_frame(tri, e)
        pts.append(fr.point(np.linspace(0.0, fr.length, 101)))
    u, _, _ = field_mod.eval_fields(ep, np.concatenate(pts), want_grad=False)
    return float(np.max(np.abs(u)))


def _barycentric_grid(n):
    i, j = np.meshgrid(np.arange(1, n), np.arange(1, n), indexing="ij")
    keep = i + j < n
    a = i[keep] / n
    b = j[keep] / n
    return np.column_stack([a, b, 1.0 - a - b])


def boundary_critical_points(ep, cfg=None):
    """Zeros of the tangential derivative on each open edge, Newton-polished,
    with the edge-frame Hessian attached."""
    cfg = cfg or AnalysisConfig()
    tri = ep.triangle
    scale = field_scale(ep)
    delta = cfg.delta_v * tri.diameter
    reports = []
    for e in (1, 2, 3):
        fr = edge_frame(tri, e)
        s = np.linspace(delta, fr.length - delta, cfg.edge_samples)
        pts = fr.point(s)
        _, g, _ = field_mod.eval_fields(ep, pts, want_grad=True)
        t_der = g @ fr.tangent
        sign_change = np.nonzero(np.sign(t_der[:-1]) * np.sign(t_der[1:]) < 0)[0]
        for i in sign_change:
            root = _edge_root(ep, fr, s[i], s[i + 1], t_der[i], t_der[i + 1])
            if root is None or not (delta < root < fr.length - delta):
                continue
            reports.append(_edge_report(ep, fr, root, scale, cfg))
    return reports


def _edge_root(ep, fr, a, b, fa, fb, bisect_iters=40, newton_iters=8):
    """Bisection then Newton (1D second derivative) for d_t u = 0 on an edge."""
    def t_and_tt(s):
        p = fr.point(s)
        _, g, h = field_mod.eval_fields(ep, [p], want_grad=True, want_hess=True)
        td = float(g[0] @ fr.tangent)
        tt = float(fr.tangent @ h[0] @ fr.tangent) if not np.any(np.isnan(h[0])) \
            else np.nan
        return td, tt

    for _ in range(bisect_iters):
        mid = 0.5 * (a + b)
        fm = t_and_tt(mid)[0]
        if fm == 0.0:
            a = b = mid
            break
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
        if b - a < 1e-3 * fr.length:
            break
    s = 0.5 * (a + b)
    for _ in range(newton_iters):
        td, tt = t_and_tt(s)
        if not np.isfinite(tt) or tt == 0.0:
            break
        step = td / tt
        if not np.isfinite(step) or abs(step) > 0.25 * fr.length:
            break
        s_new = s - step
        if not (0.0 < s_new < fr.length):
            break
        s = s_new
        if abs(step) < 1e-15 * fr.length:
            break
    return s


def _edge_report(ep, fr, s, scale, cfg):
    p = fr.point(s)
    _, g, h = field_mod.eval_fields(ep, [p], want_grad=True, want_hess=True)
    if np.any(np.isnan(h[0])):
        return CriticalPointReport(
            location=complex(p), locus="edge", edge=fr.edge,
            arclength=float(s),
            grad_residual=float(np.linalg.norm(g[0])) / scale,
            hessian=h[0], morse="unavailable", det_hessian=np.nan,
            mixed_term_ok=False)
    tt = float(fr.tangent @ h[0] @ fr.tangent)
    nn = float(fr.normal @ h[0] @ fr.normal)
    tn = float(fr.tangent @ h[0] @ fr.normal)
    h_edge = np.array([[tt, tn], [tn, nn]])
    h_mag = max(abs(tt), abs(nn), ep.mu * scale)
    report = CriticalPointReport(
        location=complex(p),
        locus="edge",
        edge=fr.edge,
        arclength=float(s),
        grad_residual=float(np.linalg.norm(g[0])) / scale,
        hessian=h_edge,
        morse="",
        det_hessian=float(tt * nn - tn * tn),
        mixed_term_ok=bool(abs(tn) <= cfg.mixed_term_tol * h_mag),
    )
    report.morse = classify_critical_point(report, ep.mu * scale,
                                           cfg.degeneracy_tol)
    return report


def interior_critical_points(ep, cfg=None):
    """Newton on grad u = 0 from a barycentric seed grid; converged points are
    deduplicated and filtered to the interior. Expected empty for genuine
    second eigenfunctions; anything found is reported, never suppressed."""
    cfg = cfg or AnalysisConfig()
    tri = ep.triangle
    scale = field_scale(ep)
    delta = cfg.delta_v * tri.diameter
    tol_grad = 1e-11 * scale * np.sqrt(ep.mu)

    lam = _barycentric_grid(cfg.newton_grid + 1)
    pts = tri.from_barycentric(lam)
    max_step = 0.5 * tri.diameter
    for _ in range(14):
        if len(pts) == 0:
            break
        _, g, h = field_mod.eval_fields(ep, pts, want_grad=True, want_hess=True)
        ok = ~np.isnan(h[:, 0, 0])
        dets = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]
        ok &= np.abs(dets) > 1e-300
        steps = np.zeros((len(pts), 2))
        steps[ok, 0] = (h[ok, 1, 1] * g[ok, 0] - h[ok, 0, 1] * g[ok, 1]) / dets[ok]
        steps[ok, 1] = (-h[ok, 1, 0] * g[ok, 0] + h[ok, 0, 0] * g[ok, 1]) / dets[ok]
        ok &= np.hypot(steps[:, 0], steps[:, 1]) < max_step
        pts = pts[ok] - (steps[ok, 0] + 1j * steps[ok, 1])
        inside = np.array([tri.contains(p, tol=1e-6 * tri.diameter)
                           for p in pts], dtype=bool)
        pts = pts[inside]

    found = []
    for p in pts:
        _, g, _ = field_mod.eval_fields(ep, [p], want_grad=True)
        if np.linalg.norm(g[0]) > tol_grad:
            continue
        if _edge_distance(tri, p) <= delta:
            continue
        if any(abs(p - q) < 1e-6 * tri.diameter for q in found):
            continue
        found.append(complex(p))

    reports = []
    for p in found:
        _, g, h = field_mod.eval_fields(ep, [p], want_grad=True, want_hess=True)
        report = CriticalPointReport(
            location=p,
            locus="interior",
            edge=None,
            arclength=None,
            grad_residual=float(np.linalg.norm(g[0])) / scale,
            hessian=h[0],
            morse="",
            det_hessian=float(h[0, 0, 0] * h[0, 1, 1] - h[0, 0, 1] ** 2),
        )
        report.morse = classify_critical_point(report, ep.mu * scale,
                                               cfg.degeneracy_tol)
        reports.append(report)
    return reports


def _edge_distance(tri, p):
    dists = []
    for e in (1, 2, 3):
        fr = edge_frame(tri, e)
        s = np.clip(fr.arclength(p), 0.0, fr.length)
        dists.append(abs(p - fr.point(s)))
    return min(dists)


def classify_critical_point(report, field_hessian_scale=None,
                            degeneracy_tol=1e-4):
    """Morse label from the Hessian eigenvalues (index = # negative ones;
    index 1 iff det < 0)."""
    h = np.asarray(report.hessian, dtype=float)
    if h.shape != (2, 2) or np.any(np.isnan(h)):
        raise ValueError("Hessian unavailable for classification")
    ev = np.linalg.eigvalsh(h)
    ref = max(np.max(np.abs(ev)), field_hessian_scale or 0.0)
    if np.min(np.abs(ev)) < degeneracy_tol * ref:
        return "degenerate"
    return f"index{int(np.sum(ev < 0.0))}"


def bessel_coefficients(ep, vertex, n_max=1, r_probe=None, quad_nodes=64):
    """First Bessel coefficients of u at a vertex by angular quadrature.

    c_n J_{n nu}(sqrt(mu) r) = (2 - delta_n0)/beta * int_0^beta
    u(r e^{i theta}) cos(n nu theta) dtheta, with theta in the block's own
    orientation convention (swept from the edge toward the next label).
    """
    cfg = AnalysisConfig()
    tri = ep.triangle
    block = ep.basis.vertex_block(vertex)
    beta = np.pi / block.nu
    adj = [tri.edge_length(e) for e in block.zero_edges]
    if r_probe is None:
        r_probe = cfg.probe_frac * min(adj)
    if not (1e-3 * min(adj) <= r_probe <= 0.2 * min(adj)):
        raise ValueError(f"probe radius {r_probe} outside [1e-3, 0.2] of the "
                         "shortest adjacent edge")

    x, w = leggauss(quad_nodes)
    theta = 0.5 * beta * (x + 1.0)
    w = 0.5 * beta * w
    pts = block.anchor + r_probe * np.exp(
        1j * (block.phi0 + block.sign * theta))
    u, _, _ = field_mod.eval_fields(ep, pts, want_grad=False)

    # the field itself carries ~sigma-level error; dividing by the Bessel
    # factor inflates it, so report the resulting conditioning per order
    k = np.sqrt(ep.mu)
    u_noise = max(ep.sigma, 1e-14) * field_scale(ep)
    c = np.empty(n_max + 1)
    err = np.empty(n_max + 1)
    for n in range(n_max + 1):
        jfac = bessel_j(n * block.nu, k * r_probe).value
        if abs(jfac) <= 1e-12:
            raise CoefficientExtractionError(
                f"Bessel factor J_{n * block.nu:.3f}({k * r_probe:.3f}) = "
                f"{jfac:.2e} too small; increase r_probe")
        proj = float(np.sum(w * u * np.cos(n * block.nu * theta)))
        c[n] = (1.0 if n == 0 else 2.0) / beta * proj / jfac
        err[n] = (1.0 if n == 0 else 2.0) * u_noise / abs(jfac)

    u_v, _, _ = field_mod.eval_fields(ep, [block.anchor], want_grad=False)
    ref = max(abs(c[0]), abs(float(u_v[0])))
    if ref > 1e-9 * field_scale(ep) and abs(c[0] - float(u_v[0])) > 1e-6 * ref:
        raise CoefficientExtractionError(
            f"c0 = {c[0]:.6e} disagrees with u(v) = {float(u_v[0]):.6e}")
    return VertexCoefficients(vertex=vertex, c=c, err=err,
                              r_probe=float(r_probe), quad_nodes=quad_nodes)


def nodal_arc(ep, cfg=None):
    """Trace the zero set from a boundary zero by predictor-corrector steps.

    Arc count is the number of boundary zeros (including vanishing vertices)
    divided by two, found independently of the trace.
    """
    cfg = cfg or AnalysisConfig()
    tri = ep.triangle
    scale = field_scale(ep)
    zeros = _boundary_zeros(ep, cfg, scale)
    arc_count = len(zeros) / 2.0

    edge_zeros = [z for z in zeros if z[0] == "edge"]
    if not edge_zeros:
        return NodalArc(points=np.empty(0, dtype=complex), endpoints=[],
                        arc_count=arc_count, boundary_zeros=zeros,
                        stalled=True)

    start_desc = edge_zeros[0]
    fr = edge_frame(tri, start_desc[1])
    start = fr.point(start_desc[2])
    h = cfg.trace_step * tri.diameter
    pts = [start]
    endpoints = [start_desc]
    stalled = False

    direction = None
    p = start
    max_steps = int(20.0 / cfg.trace_step)
    for _ in range(max_steps):
        _, g, _ = field_mod.eval_fields(ep, [p], want_grad=True)
        gn = np.linalg.norm(g[0])
        if gn == 0.0:
            stalled = True
            break
        tang = np.array([-g[0, 1], g[0, 0]]) / gn
        if direction is None:
            inward = np.array([fr.normal[0], fr.normal[1]]) * -1.0
            if tang @ inward < 0:
                tang = -tang
        elif tang @ direction < 0:
            tang = -tang
        direction = tang

        step = h
        q = None
        while step >= 1e-6 * tri.diameter:
            q = _correct_onto_zero(ep, p + step * (tang[0] + 1j * tang[1]),
                                   tol=1e-8 * scale)
            if q is not None:
                break
            step *= 0.5
        if q is None:
            stalled = True
            break
        if not tri.contains(q, tol=1e-12):
            q_edge = _boundary_crossing(ep, tri, p, q)
            pts.append(q_edge[0])
            endpoints.append(q_edge[1])
            break
        pts.append(q)
        p = q
    else:
        stalled = True

    if len(endpoints) < 2:
        stalled = True
    return NodalArc(points=np.array(pts), endpoints=endpoints,
                    arc_count=arc_count, boundary_zeros=zeros,
                    stalled=stalled)


def _boundary_zeros(ep, cfg, scale):
    tri = ep.triangle
    perim = sum(tri.edge_length(e) for e in (1, 2, 3))
    zeros = []
    for e in (1, 2, 3):
        fr = edge_frame(tri, e)
        n_s = max(16, int(round(cfg.boundary_zero_samples * fr.length / perim)))
        delta = cfg.delta_v * tri.diameter
        s = np.linspace(delta, fr.length - delta, n_s)
        u, _, _ = field_mod.eval_fields(ep, fr.point(s), want_grad=False)
        idx = np.nonzero(np.sign(u[:-1]) * np.sign(u[1:]) < 0)[0]
        for i in idx:
            a, b, fa, fb = s[i], s[i + 1], u[i], u[i + 1]
            for _ in range(60):
                mid = 0.5 * (a + b)
                fm = float(field_mod.eval_fields(ep, [fr.point(mid)],
                                                 want_grad=False)[0][0])
                if np.sign(fm) == np.sign(fa):
                    a, fa = mid, fm
                else:
                    b, fb = mid, fm
                if b - a <= 1e-13 * fr.length:
                    break
            zeros.append(("edge", e, 0.5 * (a + b)))
    uv, _, _ = field_mod.eval_fields(ep, np.array(tri.vertices, dtype=complex),
                                     want_grad=False)
    for i, val in enumerate(uv):
        if abs(val) < 1e-6 * scale:
            zeros.append(("vertex", i + 1))
    return zeros


def _correct_onto_zero(ep, p, tol, max_iter=12):
    for _ in range(max_iter):
        u, g, _ = field_mod.eval_fields(ep, [p], want_grad=True)
        if abs(u[0]) <= tol:
            return p
        gn2 = g[0] @ g[0]
        if gn2 == 0.0:
            return None
        step = u[0] / gn2
        p = p - step * (g[0, 0] + 1j * g[0, 1])
    u, _, _ = field_mod.eval_fields(ep, [p], want_grad=False)
    return p if abs(u[0]) <= tol else None


def _boundary_crossing(ep, tri, p_in, p_out):
    a, b = p_in, p_out
    for _ in range(60):
        mid = 0.5 * (a + b)
        if tri.contains(mid, tol=1e-12):
            a = mid
        else:
            b = mid
        if abs(b - a) < 1e-13 * tri.diameter:
            break
    p = 0.5 * (a + b)
    for v_label, v in enumerate(tri.vertices, start=1):
        if abs(p - v) < 1e-3 * tri.diameter:
            return p, ("vertex", v_label)
    best = None
    for e in (1, 2, 3):
        fr = edge_frame(tri, e)
        s = np.clip(fr.arclength(p), 0.0, fr.length)
        d = abs(p - fr.point(s))
        if best is None or d < best[0]:
            best = (d, fr, float(s))
    # the chord crossing sits O(step^2) off the true boundary zero; polish
    # along the edge
    _, fr, s = best
    span = max(2.0 * abs(p - p_in), 1e-3 * fr.length)
    s_lo = max(0.0, s - span)
    s_hi = min(fr.length, s + span)
    grid = np.linspace(s_lo, s_hi, 9)
    u = field_mod.eval_fields(ep, fr.point(grid), want_grad=False)[0]
    sign_change = np.nonzero(np.sign(u[:-1]) * np.sign(u[1:]) < 0)[0]
    if len(sign_change):
        i = sign_change[0]
        a, b, fa = grid[i], grid[i + 1], u[i]
        for _ in range(60):
            mid = 0.5 * (a + b)
            fm = float(field_mod.eval_fields(ep, [fr.point(mid)],
                                             want_grad=False)[0][0])
            if np.sign(fm) == np.sign(fa):
                a, fa = mid, fm
            else:
                b = mid
            if b - a <= 1e-13 * fr.length:
                break
        s = 0.5 * (a + b)
        p = fr.point(s)
    return p, ("edge", fr.edge, float(s))


def extremum_locus(ep, cfg=None):
    """Extrema over a dense sample; flags whether vertices win."""
    cfg = cfg or AnalysisConfig()
    tri = ep.triangle
    verts = np.array(tri.vertices, dtype=complex)
    lam = _barycentric_grid(cfg.extremum_grid)
    interior = tri.from_barycentric(lam)
    bnd = []
    for e in (1, 2, 3):
        fr = edge_frame(tri, e)
        s = np.linspace(0.0, fr.length, cfg.extremum_boundary // 3)
        bnd.append(fr.point(s))
    sample = np.concatenate([interior, np.concatenate(bnd)])

    u_s, _, _ = field_mod.eval_fields(ep, sample, want_grad=False)
    u_v = field_mod.eval_exact_sum(ep, verts)
    scale = field_scale(ep)
    tol = 1e-8 * scale

    # near-extremal samples get exactly-rounded re-evaluation: plain sums
    # carry cancellation noise at exactly the tolerance scale on thin shapes
    hot = np.abs(u_s - np.max(u_v)) < 100.0 * tol
    cold = np.abs(u_s - np.min(u_v)) < 100.0 * tol
    retest = hot | cold
    if np.any(retest):
        u_s = u_s.copy()
        u_s[retest] = field_mod.eval_exact_sum(ep, sample[retest])

    i_max = int(np.argmax(u_s))
    i_min = int(np.argmin(u_s))
    max_at_v = bool(u_s[i_max] <= np.max(u_v) + tol)
    min_at_v = bool(u_s[i_min] >= np.min(u_v) - tol)
    return ExtremumReport(
        argmax=complex(verts[np.argmax(u_v)]) if max_at_v else complex(sample[i_max]),
        argmin=complex(verts[np.argmin(u_v)]) if min_at_v else complex(sample[i_min]),
        max_at_vertex=max_at_v,
        min_at_vertex=min_at_v,
        max_vertex=int(np.argmax(u_v)) + 1 if max_at_v else None,
        min_vertex=int(np.argmin(u_v)) + 1 if min_at_v else None,
        vertex_values=u_v,
    )


def vertex_ring_extremum(ep, vertex, radius_frac=1e-2, n_samples=64):
    """Is u(v) a strict extremum over the sector arc at the given radius?"""
    tri = ep.triangle
    block = ep.basis.vertex_block(vertex)
    beta = np.pi / block.nu
    r = radius_frac * tri.diameter
    theta = np.linspace(0.0, beta, n_samples)
    pts = block.anchor + r * np.exp(1j * (block.phi0 + block.sign * theta))
    u_ring, _, _ = field_mod.eval_fields(ep, pts, want_grad=False)
    u_v, _, _ = field_mod.eval_fields(ep, [block.anchor], want_grad=False)
    gap_tol = 1e-9 * field_scale(ep)
    if float(u_v[0]) > np.max(u_ring) + gap_tol:
        return True
    if float(u_v[0]) < np.min(u_ring) - gap_tol:
        return True
    return False


def hot_spots_verdict(ep, cfg=None):
    """Aggregate verdict: CRIT / NOCRIT only when the detectors ran clean;
    any margin violation is recorded and yields AMBIGUOUS."""
    cfg = cfg or AnalysisConfig()
    scale = field_scale(ep)
    margins = {}

    bcp = boundary_critical_points(ep, cfg)
    icp = interior_critical_points(ep, cfg)
    reports = bcp + icp

    for i, rep in enumerate(reports):
        if rep.grad_residual > cfg.eps_g:
            margins[f"grad_residual[{i}]"] = rep.grad_residual
        if rep.morse in ("degenerate", "unavailable"):
            margins[f"degenerate[{i}]"] = rep.det_hessian
        if rep.locus == "edge" and not rep.mixed_term_ok:
            margins[f"mixed_term[{i}]"] = float(rep.hessian[0, 1])
    if icp:
        margins["interior_critical_points"] = len(icp)

    coeffs = []
    for v in (1, 2, 3):
        vc = None
        for n_max in (1, 0):
            try:
                vc = bessel_coefficients(ep, v, n_max=n_max)
                break
            except CoefficientExtractionError as exc:
                err_msg = str(exc)
        if vc is None:
            margins[f"coeff_extraction[{v}]"] = err_msg
        elif len(vc.c) == 1:
            # c1 not extractable at a very sharp vertex (its Bessel factor
            # underflows at any admissible probe radius); c0 = u(v) still
            # answers the coefficient-floor question
            vc.c = np.array([vc.c[0], np.nan])
            vc.err = np.array([vc.err[0], np.inf])
        coeffs.append(vc)
    floors = [np.nanmax(np.abs(vc.c)) / scale if vc is not None else 0.0
              for vc in coeffs]
    coeff_ok = all(f > cfg.coeff_floor for f in floors)
    if not coeff_ok:
        margins["coeff_floor"] = min(floors)

    for v in (1, 2, 3):
        one_r = coeffs[v - 1]
        if one_r is None:
            continue
        n_max = 1 if np.isfinite(one_r.c[1]) else 0
        try:
            two_r = bessel_coefficients(ep, v, n_max=n_max,
                                        r_probe=2.0 * one_r.r_probe)
        except CoefficientExtractionError as exc:
            margins[f"coeff_two_radius[{v}]"] = str(exc)
            continue
        c_a, c_b = one_r.c[:n_max + 1], two_r.c
        ref = max(np.max(np.abs(c_a)), np.max(np.abs(c_b)))
        diff = np.max(np.abs(c_a - c_b))
        # never looser than 1e-5 where the extraction is well conditioned;
        # at sharp vertices the Bessel-factor conditioning sets the bar
        tol = max(1e-5 * ref, 3.0 * np.max(one_r.err[:n_max + 1] + two_r.err))
        if diff > tol:
            margins[f"coeff_two_radius[{v}]"] = diff / ref

    arc = nodal_arc(ep, cfg)
    nodal_ok = (arc.arc_count == 1.0) and not arc.stalled
    if arc.stalled:
        margins["nodal_tracer_stalled"] = True
    if arc.arc_count != 1.0:
        margins["nodal_arc_count"] = arc.arc_count

    ext = extremum_locus(ep, cfg)
    ext_ok = ext.max_at_vertex and ext.min_at_vertex
    if not ext_ok:
        margins["extremum_not_at_vertex"] = (ext.max_at_vertex, ext.min_at_vertex)

    if ep.multiplicity_flag:
        margins["multiplicity_flagged"] = ep.sigma_gap

    u_v = ext.vertex_values
    c1 = np.array([vc.c[1] if vc is not None else np.nan for vc in coeffs])

    clean = (not margins) or set(margins) <= {"interior_critical_points"}
    index1 = [r for r in bcp if r.morse == "index1"]
    if clean and not icp and len(bcp) == 1 and len(index1) == 1:
        classification = CRIT
    elif clean and not reports:
        classification = NOCRIT
    else:
        classification = AMBIGUOUS

    return HotSpotsVerdict(
        crit_count=len(reports),
        reports=reports,
        extremum_at_vertices=ext_ok,
        nodal_arc_ok=nodal_ok,
        coeff_ok=coeff_ok,
        classification=classification,
        margins=margins,
        vertex_values=u_v / scale,
        vertex_c1=c1,
        min_vertex_ratio=float(np.min(np.abs(u_v))) / scale,
        scale=scale,
    )
