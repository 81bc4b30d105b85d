"""Second Neumann eigenvalue and eigenfunction by the Method of Particular
Solutions with Fourier-Bessel blocks anchored at all three vertices.

Each block spans J_{n*nu}(sqrt(mu) r) cos(n*nu*theta) about its vertex with
nu = pi/beta, so the Neumann condition holds exactly on the block's own two
edges. Boundary collocation enforces it on the rest; the eigenvalue is the
first dip of the smallest generalized singular value of the (boundary,
stacked) pencil below tolerance, bracketed by the independent FEM oracle.
"""

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as la
from scipy.optimize import golden
from scipy.stats import qmc

from . import field as field_mod
from .config import SolverConfig
from .fem import fem_bracket
from .geometry import angles, edge_frame
from .specfun import EnvelopeError, NU_MAX

__all__ = [
    "VertexBlock", "BasisSpec", "Discretization", "Eigenpair",
    "make_basis", "make_discretization", "assemble", "sigma_min",
    "fem_bracket", "find_mu2", "residual_certificate",
    "NoEigenvalueDipError", "RankCollapseError",
]


class NoEigenvalueDipError(RuntimeError):
    def __init__(self, message, scan_mus=None, scan_sigmas=None):
        super().__init__(message)
        self.scan_mus = scan_mus
        self.scan_sigmas = scan_sigmas


class RankCollapseError(RuntimeError):
    pass


@dataclass(frozen=True)
class VertexBlock:
    """One expansion block: a corner sector fan (kind='vertex', nu = pi/beta,
    theta swept from the edge toward the next labeled vertex) or an
    edge-midpoint half-disk fan (kind='edge', nu = 1, even across its edge).
    Both kinds satisfy the Neumann condition exactly on their zero_edges."""

    label: int           # vertex label, or edge label for kind='edge'
    anchor: complex
    nu: float
    n_terms: int
    phi0: float          # angle of the reference edge direction
    sign: int            # theta = sign * (arg(z - anchor) - phi0)
    kind: str = "vertex"

    @property
    def zero_edges(self):
        if self.kind == "vertex":
            return (self.label, 1 + (self.label + 1) % 3)
        return (self.label,)


@dataclass(frozen=True)
class BasisSpec:
    blocks: tuple

    def __post_init__(self):
        for b in self.blocks:
            if b.kind == "vertex":
                if b.nu <= 1.0:
                    raise ValueError(f"vertex block {b.label} has nu={b.nu} <= 1")
                if b.n_terms < 4:
                    raise ValueError(f"vertex block {b.label} has < 4 terms")
            elif b.kind == "edge":
                if b.nu != 1.0:
                    raise ValueError("edge blocks use integer harmonics (nu=1)")
            else:
                raise ValueError(f"unknown block kind {b.kind!r}")

    @property
    def n_columns(self):
        return sum(b.n_terms for b in self.blocks)

    def vertex_block(self, label):
        for b in self.blocks:
            if b.kind == "vertex" and b.label == label:
                return b
        raise KeyError(f"no vertex block with label {label}")

    def to_json_dict(self):
        return {"blocks": [
            {"kind": b.kind, "label": b.label,
             "anchor": [b.anchor.real, b.anchor.imag],
             "nu": b.nu, "terms": b.n_terms, "phi0": b.phi0, "sign": b.sign}
            for b in self.blocks]}

    @classmethod
    def from_json_dict(cls, d):
        return cls(tuple(
            VertexBlock(label=e["label"], anchor=complex(*e["anchor"]),
                        nu=e["nu"], n_terms=e["terms"], phi0=e["phi0"],
                        sign=e["sign"], kind=e.get("kind", "vertex"))
            for e in d["blocks"]))


@dataclass(frozen=True)
class Discretization:
    bnd_pts: np.ndarray      # complex boundary collocation points
    bnd_edge: np.ndarray     # edge label of each boundary point
    bnd_normal: np.ndarray   # outward normals, complex
    int_pts: np.ndarray      # complex interior points
    exclusion_radius: float
    seed: int


@dataclass(eq=False)
class Eigenpair:
    mu: float
    coeffs: np.ndarray
    basis: BasisSpec
    triangle: object
    sigma: float
    sigma_gap: float
    multiplicity_flag: bool
    seed: int
    normalization: str = "unit-interior-rms"

    def to_json_dict(self):
        d = {"mu": self.mu,
             "basis": {"triangle": self.triangle.to_json_dict(),
                       **self.basis.to_json_dict()},
             "coeffs": list(self.coeffs),
             "sigma": self.sigma,
             "sigma_gap": self.sigma_gap,
             "multiplicity_flag": self.multiplicity_flag,
             "seed": self.seed}
        return d

    @classmethod
    def from_json_dict(cls, d):
        from .geometry import LabeledTriangle
        tri = LabeledTriangle.from_json_dict(d["basis"]["triangle"])
        return cls(mu=d["mu"],
                   coeffs=np.array(d["coeffs"], dtype=float),
                   basis=BasisSpec.from_json_dict(d["basis"]),
                   triangle=tri,
                   sigma=d["sigma"],
                   sigma_gap=d["sigma_gap"],
                   multiplicity_flag=d.get("multiplicity_flag", False),
                   seed=d.get("seed", 0))


def make_basis(tri, n_terms=20, edge_terms=10):
    """Fourier-Bessel corner blocks at all three vertices (orders capped to
    the specfun envelope) plus half-disk fans at the edge midpoints.

    The corner blocks carry the corner singularities; the edge fans carry the
    smooth remainder on thin triangles, where the far tip falls outside the
    opposite corner expansion's disk of convergence and the corner-only basis
    stalls near sigma ~ 1e-4."""
    betas = angles(tri)
    verts = tri.vertices
    blocks = []
    for i in range(3):
        nu = np.pi / betas[i]
        cap = int(NU_MAX / nu) + 1
        n_i = min(n_terms, cap)
        if n_i < 4:
            raise EnvelopeError(
                f"vertex {i + 1} angle {betas[i]:.4f} rad too sharp for the "
                f"order envelope (needs (4-1)*nu <= {NU_MAX})")
        nxt = verts[(i + 1) % 3]
        blocks.append(VertexBlock(
            label=i + 1,
            anchor=verts[i],
            nu=nu,
            n_terms=n_i,
            phi0=float(np.angle(nxt - verts[i])),
            sign=tri.orientation,
        ))
    for e in range(1, 4):
        if edge_terms < 1:
            break
        fr = edge_frame(tri, e)
        blocks.append(VertexBlock(
            label=e,
            anchor=fr.point(0.5 * fr.length),
            nu=1.0,
            n_terms=edge_terms,
            phi0=float(np.angle(complex(fr.tangent[0], fr.tangent[1]))),
            sign=1,
            kind="edge",
        ))
    return BasisSpec(tuple(blocks))


def make_discretization(tri, basis, boundary_factor=3, interior_factor=3,
                        exclusion_frac=1e-3, seed=0,
                        boundary_per_edge=None, n_interior=None):
    """Chebyshev-clustered boundary collocation plus seeded quasi-random
    interior regularization points; points within the exclusion radius of a
    vertex are dropped."""
    n_cols = basis.n_columns
    n_max = max(b.n_terms for b in basis.blocks)
    if boundary_per_edge:
        m_e = boundary_per_edge
    else:
        # 3*N per edge, topped up so the stack stays >= 2x overdetermined
        m_e = max(boundary_factor * n_max, int(np.ceil(2.2 * n_cols / 3)) + 2)
    k_int = n_interior if n_interior else interior_factor * n_cols
    rho = exclusion_frac * tri.diameter

    bnd_pts, bnd_edge, bnd_normal = [], [], []
    for e in (1, 2, 3):
        fr = edge_frame(tri, e)
        s = 0.5 * fr.length * (1.0 - np.cos(np.pi * (np.arange(m_e) + 0.5) / m_e))
        s = s[(s > rho) & (s < fr.length - rho)]
        pts = fr.point(s)
        bnd_pts.append(pts)
        bnd_edge.append(np.full(len(pts), e, dtype=int))
        bnd_normal.append(np.full(len(pts), fr.normal[0] + 1j * fr.normal[1]))
    bnd_pts = np.concatenate(bnd_pts)
    bnd_edge = np.concatenate(bnd_edge)
    bnd_normal = np.concatenate(bnd_normal)

    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    raw = sampler.random(int(2.0 * k_int) + 32)
    a, b = raw[:, 0], raw[:, 1]
    flip = a + b > 1.0
    a[flip], b[flip] = 1.0 - a[flip], 1.0 - b[flip]
    pts = tri.v1 + a * (tri.v2 - tri.v1) + b * (tri.v3 - tri.v1)
    keep = np.ones(len(pts), dtype=bool)
    for v in tri.vertices:
        keep &= np.abs(pts - v) > rho
    int_pts = pts[keep][:k_int]

    if len(bnd_pts) < 2 * n_cols:
        raise ValueError("boundary collocation underdetermined: "
                         f"{len(bnd_pts)} points for {n_cols} columns")
    if len(int_pts) < n_cols:
        raise ValueError("too few interior regularization points")
    return Discretization(bnd_pts=bnd_pts, bnd_edge=bnd_edge,
                          bnd_normal=bnd_normal, int_pts=int_pts,
                          exclusion_radius=rho, seed=seed)


def _assemble_raw(tri, mu, basis, disc):
    """Unscaled (A_bnd, A_int): normal derivatives at boundary points, values
    at interior points. A block's own adjacent edges get exact zeros."""
    a_bnd = np.zeros((len(disc.bnd_pts), basis.n_columns))
    a_int = np.empty((len(disc.int_pts), basis.n_columns))
    k = np.sqrt(mu)
    col = 0
    for block in basis.blocks:
        cols = slice(col, col + block.n_terms)
        own = np.isin(disc.bnd_edge, block.zero_edges)
        other = ~own
        if np.any(other):
            _, grad, _ = field_mod.block_terms(block, k, disc.bnd_pts[other],
                                               want_grad=True)
            n = disc.bnd_normal[other]
            a_bnd[other, cols] = (np.conj(n)[:, None] * grad).real
        val, _, _ = field_mod.block_terms(block, k, disc.int_pts)
        a_int[:, cols] = val
        col += block.n_terms
    return a_bnd, a_int


def assemble(tri, mu, basis, disc):
    """(A_bnd, A_int) with columns scaled to unit norm over the stack."""
    a_bnd, a_int, _ = _assemble_scaled(tri, mu, basis, disc)
    return a_bnd, a_int


def _assemble_scaled(tri, mu, basis, disc):
    a_bnd, a_int = _assemble_raw(tri, mu, basis, disc)
    norms = np.sqrt(np.einsum("ij,ij->j", a_bnd, a_bnd)
                    + np.einsum("ij,ij->j", a_int, a_int))
    # columns many hundreds of orders of magnitude below the rest are pure
    # underflow noise; promoting them to unit norm would both poison the
    # rank decision and overflow the coefficient recovery
    dead = norms <= norms.max() * 1e-130
    if np.any(dead):
        a_bnd[:, dead] = 0.0
        a_int[:, dead] = 0.0
        norms = np.where(dead, 1.0, norms)
    return a_bnd / norms, a_int / norms, norms


def sigma_min(tri, mu, basis, disc, rank_rtol=1e-14, n_vectors=1):
    """Smallest generalized singular value of the (A_bnd, stacked) pencil.

    Returns (sigma, sigma_gap, coeffs); coeffs are in the raw basis, unit
    Euclidean norm. With n_vectors=2 the two smallest right vectors come back
    as columns (multiplicity handling).
    """
    a_bnd, a_int, col_norms = _assemble_scaled(tri, mu, basis, disc)
    m_b = a_bnd.shape[0]
    a = np.vstack([a_bnd, a_int])
    q, r, perm = la.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    cutoff = int(np.sum(diag > diag[0] * rank_rtol))
    if cutoff < 2:
        raise RankCollapseError(
            f"basis rank collapsed at mu={mu} "
            f"(condition ~ {diag[0] / max(diag[-1], 1e-300):.2e})")
    _, s, vh = la.svd(q[:m_b, :cutoff])
    sigma = float(s[-1])
    sigma_gap = float(s[-2] - s[-1])

    vecs = []
    for j in range(n_vectors):
        y = vh[-1 - j]
        w = la.solve_triangular(r[:cutoff, :cutoff], y)
        x = np.zeros(a.shape[1])
        x[perm[:cutoff]] = w
        x /= col_norms
        x /= np.linalg.norm(x)
        vecs.append(x)
    coeffs = vecs[0] if n_vectors == 1 else np.column_stack(vecs)
    return sigma, sigma_gap, coeffs


def _vertex_values(tri, mu, basis, coeffs):
    val, _, _ = field_mod.basis_matrices(tri, mu, basis,
                                         np.array(tri.vertices, dtype=complex))
    return val @ coeffs


def find_mu2(tri, cfg=None, window=None, mu_ref=None, align_values=None):
    """Locate the second Neumann eigenvalue and return a certified Eigenpair.

    Scans sigma(mu) upward over `window` (default [scan_lo, scan_hi] times the
    FEM bracket) with step mu_ref/scan_divisor, golden-refines each discrete
    dip to relative width 1e-10, and accepts the first dip below sigma_tol.
    `align_values`, if given, are reference u-values at the interior points
    used to pick and sign a branch when the dip is multiplicity-flagged.
    """
    cfg = cfg or SolverConfig()
    if mu_ref is None:
        mu_ref = fem_bracket(tri, cfg.fem_n)
    if window is None:
        window = (cfg.scan_lo * mu_ref, cfg.scan_hi * mu_ref)
    step = mu_ref / cfg.scan_divisor
    lo, hi = window

    def make(n_terms, edge_terms):
        basis = make_basis(tri, n_terms, edge_terms)
        disc = make_discretization(
            tri, basis, boundary_factor=cfg.boundary_factor,
            interior_factor=cfg.interior_factor,
            exclusion_frac=cfg.exclusion_radius, seed=cfg.seed)

        def sig(mu):
            return sigma_min(tri, mu, basis, disc, cfg.rank_rtol)[0]
        return basis, disc, sig

    # dips sit at the Neumann eigenvalues whatever the basis, so the walk
    # over the window runs on a light basis; depth is then certified with
    # the configured basis at each located dip, escalating the edge fans
    # where awkward shapes (thin, very obtuse) keep sigma above tolerance
    _, _, sig_light = make(min(cfg.terms, 12), min(cfg.edge_terms, 6))
    tiers = list(dict.fromkeys([cfg.edge_terms, 16, 24, 32, 48]))

    def certify_dip(center):
        for edge_terms in tiers:
            if edge_terms < cfg.edge_terms:
                continue
            basis, disc, sig = make(cfg.terms, edge_terms)
            grid = np.linspace(center - 0.6 * step, center + 0.6 * step, 9)
            vals = [sig(g) for g in grid]
            i = int(np.argmin(vals))
            if not 0 < i < len(grid) - 1:
                continue
            mu_min, s_min = _golden_refine(sig, (grid[i - 1], grid[i],
                                                 grid[i + 1]))
            if s_min <= cfg.sigma_tol:
                return mu_min, basis, disc
        return None

    def walk(sig_fn, on_dip):
        mus = [lo, lo + step]
        sigmas = [sig_fn(mus[0]), sig_fn(mus[1])]
        m = mus[1]
        while m < hi:
            m = min(m + step, hi)
            mus.append(m)
            sigmas.append(sig_fn(m))
            if sigmas[-2] < sigmas[-3] and sigmas[-2] < sigmas[-1]:
                found = on_dip(mus[-3:], sigmas[-3:])
                if found is not None:
                    return found, mus, sigmas
        return None, mus, sigmas

    def fast_dip(triple, striple):
        # cheap prefilter: true eigenvalue dips dive well below the local
        # background even on the light basis
        mu_l, s_l = _golden_refine(sig_light, tuple(triple))
        if s_l > min(5e-2, 0.25 * min(striple[0], striple[2])):
            return None
        return certify_dip(mu_l)

    def full_dip(triple, striple):
        mu_c, s_c = _golden_refine(sig_cfg, tuple(triple))
        if s_c <= cfg.sigma_tol:
            return mu_c, basis_cfg, disc_cfg
        return certify_dip(mu_c)

    found, mus, sigmas = walk(sig_light, fast_dip)
    if found is None:
        # authoritative pass with the configured basis (rare: shapes whose
        # light-basis dip is too shallow for the prefilter)
        basis_cfg, disc_cfg, sig_cfg = make(cfg.terms, cfg.edge_terms)
        found, mus, sigmas = walk(sig_cfg, full_dip)
    if found is None:
        raise NoEigenvalueDipError(
            f"no sigma dip below {cfg.sigma_tol} in [{lo:.6g}, {hi:.6g}]",
            scan_mus=np.array(mus), scan_sigmas=np.array(sigmas))
    mu_star, basis, disc = found

    sigma, sigma_gap, coeffs = sigma_min(tri, mu_star, basis, disc,
                                         cfg.rank_rtol)
    mult_flag = sigma_gap < 10.0 * sigma
    if mult_flag and align_values is not None:
        # pick the branch closest to the tracked one at fixed barycentric
        # reference points
        lam_ref, prev_u = align_values
        _, _, pair = sigma_min(tri, mu_star, basis, disc, cfg.rank_rtol,
                               n_vectors=2)
        pts = tri.from_barycentric(np.asarray(lam_ref))
        val, _, _ = field_mod.basis_matrices(tri, mu_star, basis, pts)
        u_pair = val @ pair
        ips = u_pair.T @ np.asarray(prev_u)
        coeffs = pair[:, int(np.argmax(np.abs(ips)))]

    a_int_raw = _assemble_raw(tri, mu_star, basis, disc)[1]
    u_int = a_int_raw @ coeffs
    coeffs = coeffs / np.sqrt(np.mean(u_int**2))

    uv = _vertex_values(tri, mu_star, basis, coeffs)
    lead = int(np.argmax(np.abs(uv)))
    if uv[lead] < 0:
        coeffs = -coeffs

    return Eigenpair(mu=float(mu_star), coeffs=coeffs, basis=basis,
                     triangle=tri, sigma=sigma, sigma_gap=sigma_gap,
                     multiplicity_flag=bool(mult_flag), seed=cfg.seed)


def _golden_refine(f, bracket):
    xa, xb, xc = bracket
    xmin, fmin, _ = golden(f, brack=(xa, xb, xc), tol=1e-10, full_output=True)
    return float(xmin), float(fmin)


def residual_certificate(ep, n_boundary=200, n_interior=50, seed=0):
    """Certificate residuals of a computed eigenpair.

    bnd_residual: max |du/dn| over a dense boundary sample divided by the max
    |u| over an interior sample. helmholtz_residual: max |tr H + mu u| at
    random interior points, divided by mu * max |u| (zero up to special
    function error, since every basis term solves the equation exactly).
    """
    tri = ep.triangle
    rho = 1e-3 * tri.diameter

    grads, us = [], []
    for e in (1, 2, 3):
        fr = edge_frame(tri, e)
        s = np.linspace(rho, fr.length - rho, n_boundary)
        pts = fr.point(s)
        _, g, _ = field_mod.eval_fields(ep, pts, want_grad=True)
        grads.append(g @ fr.normal)
    dn_max = float(np.max(np.abs(np.concatenate(grads))))

    rng = np.random.default_rng(seed)
    lam = rng.dirichlet(np.ones(3), size=max(n_interior, 8))
    pts = ep.triangle.from_barycentric(lam)
    u, _, h = field_mod.eval_fields(ep, pts, want_grad=False, want_hess=True)
    u_max = float(np.max(np.abs(u)))
    trace = h[:, 0, 0] + h[:, 1, 1]
    helm = float(np.nanmax(np.abs(trace + ep.mu * u)))
    return {
        "bnd_residual": dn_max / u_max,
        "helmholtz_residual": helm / (ep.mu * u_max),
        "interior_max": u_max,
    }
