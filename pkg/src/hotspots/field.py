"""Pointwise evaluation of the eigenfunction, its derivatives, and the
rotational / edge-parallel derivative fields.

Everything is analytic differentiation of the basis blocks. Derivatives use
the division-free ladder identities for cylinder harmonics F_m = J_m(k r)
e^{i m theta} in each block's local frame,

    (d/dxi + i d/deta) F_m = -k F_{m+1},   (d/dxi - i d/deta) F_m = k F_{m-1},

then rotate to global coordinates. No finite differences anywhere. Near a
block's own anchor the Bessel factors switch to the scaled series
J_m(k r) = r^m S_m(r), which stays finite and accurate down to r = 0.

The core works on plain (triangle, mu, basis, coeffs) data so the eigensolver
can assemble collocation matrices from the same routines.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, jv

from .specfun import bessel_j_scaled

NEAR_ANCHOR_RADIUS = 1e-6   # switch to the scaled series below this distance


class OutsideDomainError(ValueError):
    pass


@dataclass(frozen=True)
class FieldSample:
    point: complex
    u: float
    grad: np.ndarray
    hessian: np.ndarray | None   # None within the vertex exclusion radius


def _local_polar(block, pts):
    dz = pts - block.anchor
    rho = np.abs(dz)
    theta = block.sign * (np.angle(dz) - block.phi0)
    theta = np.mod(theta, 2.0 * np.pi)
    theta = np.where(theta > 1.5 * np.pi, theta - 2.0 * np.pi, theta)
    return rho, theta


def _n_effective(nu, n_terms, x_max):
    """Orders to evaluate: drop the tail that underflows on the whole batch.

    The derivative ladder reaches down to order m - 2, whose leading term
    (x/2)^(m-2)/Gamma(m-1) decides whether the column can contribute at all
    (J_2's Hessian at the anchor is k^2/4, not zero)."""
    m = nu * np.arange(n_terms)
    q = np.maximum(m - 2.0, 0.0)
    if x_max <= 0.0:
        return max(1, int(np.sum(q == 0.0)))
    with np.errstate(divide="ignore", invalid="ignore"):
        lead = np.where(q == 0.0, 0.0,
                        q * np.log(x_max / 2.0) - gammaln(q + 1.0))
    keep = (q <= x_max) | (lead >= -640.0)
    return max(1, int(np.sum(keep)))


def block_terms(block, k, pts, want_grad=False, want_hess=False,
                near_radius=NEAR_ANCHOR_RADIUS):
    """Per-term value/gradient/Hessian arrays of one block at pts.

    val is (L, N); grad is (L, N) complex (gradients as gx + i*gy); hess is
    (L, N, 3) rows (hxx, hxy, hyy). Hessians of fractional-order (vertex)
    blocks are NaN within near_radius of the anchor, where they may be
    genuinely singular; integer-order (edge) blocks evaluate everywhere.
    Trailing orders that underflow on the whole batch are exact zeros.
    """
    pts = np.atleast_1d(np.asarray(pts, dtype=complex))
    n = block.n_terms
    rho, theta = _local_polar(block, pts)
    far = rho >= near_radius

    n_eff = _n_effective(block.nu, n, k * rho.max() if len(rho) else 0.0)
    m = block.nu * np.arange(n_eff)

    val = np.zeros((len(pts), n))
    grad = np.zeros((len(pts), n), dtype=complex) if want_grad else None
    hess = np.full((len(pts), n, 3), np.nan) if want_hess else None
    if want_hess:
        hess[:, n_eff:, :] = 0.0

    if np.any(far):
        _terms_far(block, k, m, rho[far], theta[far], far, val, grad, hess)
    if not np.all(far):
        _terms_near(block, k, m, rho[~far], theta[~far], ~far, val, grad, hess)
    return val, grad, hess


def _assign_from_ladder(block, k, n_eff, F, mask, val, grad, hess):
    """Fill output rows from the cylinder-harmonic ladder dictionary F,
    mapping local-frame derivatives to global coordinates."""
    val[mask, :n_eff] = F["0"].real
    e_xi = np.exp(1j * block.phi0)

    if grad is not None:
        g_xi = 0.5 * k * (F["-1"] - F["+1"]).real
        g_eta = -0.5 * k * (F["-1"] + F["+1"]).imag
        # local -> global: vector (a, b) maps to e_xi * (a + i*sign*b)
        grad[mask, :n_eff] = e_xi * (g_xi + 1j * block.sign * g_eta)

    if hess is not None:
        kk = 0.25 * k * k
        h_xx = kk * (F["-2"] - 2.0 * F["0"] + F["+2"]).real
        h_yy = -kk * (F["-2"] + 2.0 * F["0"] + F["+2"]).real
        h_xy = -kk * (F["-2"] - F["+2"]).imag
        e_eta = 1j * block.sign * e_xi
        r00, r10 = e_xi.real, e_xi.imag
        r01, r11 = e_eta.real, e_eta.imag
        g_xx = r00 * r00 * h_xx + 2 * r00 * r01 * h_xy + r01 * r01 * h_yy
        g_xy = r00 * r10 * h_xx + (r00 * r11 + r01 * r10) * h_xy + r01 * r11 * h_yy
        g_yy = r10 * r10 * h_xx + 2 * r10 * r11 * h_xy + r11 * r11 * h_yy
        hess[mask, :n_eff] = np.stack([g_xx, g_xy, g_yy], axis=-1)


def _terms_far(block, k, m, rho, theta, mask, val, grad, hess):
    x = k * rho[:, None]
    mm = m[None, :]
    th = theta[:, None]

    jm = jv(mm, x)
    jm1 = jv(mm - 1.0, x)
    # neighbours by the three-term recurrence (a step each way is benign)
    jp1 = (2.0 * mm / x) * jm - jm1
    F = {"0": jm * np.exp(1j * mm * th),
         "-1": jm1 * np.exp(1j * (mm - 1.0) * th),
         "+1": jp1 * np.exp(1j * (mm + 1.0) * th)}
    if hess is not None:
        jm2 = (2.0 * (mm - 1.0) / x) * jm1 - jm
        jp2 = (2.0 * (mm + 1.0) / x) * jp1 - jm
        F["-2"] = jm2 * np.exp(1j * (mm - 2.0) * th)
        F["+2"] = jp2 * np.exp(1j * (mm + 2.0) * th)
    _assign_from_ladder(block, k, len(m), F, mask, val, grad, hess)


def _terms_near(block, k, m, rho, theta, mask, val, grad, hess):
    """Scaled-series ladder: J_q(k rho) = rho^q S_q(rho), exact as rho -> 0.

    Negative orders appear only for integer-order columns, where
    J_{-q} = (-1)^q J_q. Fractional (vertex) blocks get NaN Hessians here:
    their q = m - 2 < 0 orders are genuinely singular at the anchor.
    """
    rows = np.nonzero(mask)[0]
    n_eff = len(m)

    def scaled_j(q, r):
        # J_q(k r) for possibly negative q, via the series; r may be 0
        if q >= 0.0:
            return (r ** q) * bessel_j_scaled(q, r, k)
        if abs(q - round(q)) > 1e-12:
            return np.nan
        qi = int(round(-q))
        return ((-1.0) ** qi) * (r ** qi) * bessel_j_scaled(float(qi), r, k)

    for i, row in enumerate(rows):
        r, th = rho[i], theta[i]

        def harmonics(shift):
            q = m + shift
            j = np.array([scaled_j(qq, r) for qq in q])
            return (j * np.exp(1j * q * th))[None, :]

        F = {"0": harmonics(0.0), "-1": harmonics(-1.0), "+1": harmonics(1.0)}
        if hess is not None:
            F["-2"] = harmonics(-2.0)
            F["+2"] = harmonics(2.0)
        one = np.zeros(len(mask), dtype=bool)
        one[row] = True
        _assign_from_ladder(block, k, n_eff, F, one, val, grad, hess)


def basis_matrices(tri, mu, basis, pts, want_grad=False, want_hess=False,
                   near_radius=NEAR_ANCHOR_RADIUS):
    """Stacked per-term arrays over all blocks at pts (columns block-major)."""
    k = np.sqrt(mu)
    vals, grads, hesss = [], [], []
    for block in basis.blocks:
        v, g, h = block_terms(block, k, pts, want_grad, want_hess, near_radius)
        vals.append(v)
        if want_grad:
            grads.append(g)
        if want_hess:
            hesss.append(h)
    val = np.concatenate(vals, axis=1)
    grad = np.concatenate(grads, axis=1) if want_grad else None
    hess = np.concatenate(hesss, axis=1) if want_hess else None
    return val, grad, hess


def hessian_exclusion_radius(tri):
    return 1e-3 * tri.diameter


def eval_fields(ep, pts, want_grad=True, want_hess=False, check_inside=False):
    """u (L,), gradient (L,2), Hessian (L,2,2) of the eigenpair at pts.

    Hessian rows are NaN within the vertex exclusion radius of any vertex
    anchor (fractional orders may be singular there)."""
    pts = np.atleast_1d(np.asarray(pts, dtype=complex))
    tri = ep.triangle
    if check_inside:
        for p in pts:
            if not tri.contains(p, tol=1e-9):
                raise OutsideDomainError(f"point {p} outside the triangle")
    val, grad, hess = basis_matrices(tri, ep.mu, ep.basis, pts,
                                     want_grad=want_grad, want_hess=want_hess)
    u = val @ ep.coeffs
    g = None
    if want_grad:
        gc = grad @ ep.coeffs
        g = np.stack([gc.real, gc.imag], axis=-1)
    h = None
    if want_hess:
        hflat = np.einsum("lnc,n->lc", hess, ep.coeffs)
        h = np.empty((len(pts), 2, 2))
        h[:, 0, 0] = hflat[:, 0]
        h[:, 0, 1] = hflat[:, 1]
        h[:, 1, 0] = hflat[:, 1]
        h[:, 1, 1] = hflat[:, 2]
        excl = hessian_exclusion_radius(tri)
        for v in tri.vertices:
            h[np.abs(pts - v) < excl] = np.nan
    return u, g, h


def eval_exact_sum(ep, pts):
    """u at pts with exactly-rounded summation over basis terms.

    The raw-coefficient representation can cancel catastrophically on thin
    triangles (products up to ~1e8 x the value); compensated summation makes
    comparisons at the 1e-8 x scale level trustworthy where it matters.
    """
    import math
    pts = np.atleast_1d(np.asarray(pts, dtype=complex))
    val, _, _ = basis_matrices(ep.triangle, ep.mu, ep.basis, pts)
    prods = val * ep.coeffs
    return np.array([math.fsum(row.tolist()) for row in prods])


def eval(ep, p):
    """Full field sample at one point of the closed triangle."""
    p = complex(p)
    if not ep.triangle.contains(p, tol=1e-9):
        raise OutsideDomainError(f"point {p} outside the triangle")
    u, g, h = eval_fields(ep, [p], want_grad=True, want_hess=True)
    hess = None if np.any(np.isnan(h[0])) else h[0]
    return FieldSample(point=p, u=float(u[0]), grad=g[0], hessian=hess)


def rotational_derivative(ep, anchor, p):
    """Derivative along the ccw rotation field about `anchor`, at p."""
    anchor = complex(anchor)
    p = complex(p)
    u, g, _ = eval_fields(ep, [p], want_grad=True)
    return float(-(p.imag - anchor.imag) * g[0, 0] + (p.real - anchor.real) * g[0, 1])


def directional_derivative(ep, direction, p):
    """Derivative along a unit direction (dx, dy) at p."""
    d = np.asarray(direction, dtype=float)
    u, g, _ = eval_fields(ep, [complex(p)], want_grad=True)
    return float(g[0] @ d)


def grid_samples(ep, n=50):
    """Interior barycentric grid with u and gradient, for CSV/contour export."""
    tri = ep.triangle
    lam = []
    for i in range(1, n + 1):
        for j in range(1, n + 1 - i):
            lam.append((i / (n + 1), j / (n + 1)))
    lam = np.array(lam)
    lam3 = np.column_stack([lam, 1.0 - lam.sum(axis=1)])
    pts = lam3 @ np.array([tri.v1, tri.v2, tri.v3])
    u, g, _ = eval_fields(ep, pts, want_grad=True)
    return pts, u, g
