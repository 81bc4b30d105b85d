import numpy as np
import pytest

from hotspots import field
from hotspots.analysis import field_scale
from hotspots.geometry import RIGHT_ISOSCELES

PI = np.pi


def ri_scale(ep):
    # multiplier s with u = s * (cos pi x - cos pi y)
    u_v2 = field.eval_fields(ep, [1.0 + 0.0j], want_grad=False)[0][0]
    return u_v2 / -2.0


def test_vertex_values(ep_right_isosceles):
    ep = ep_right_isosceles
    u, _, _ = field.eval_fields(ep, np.array([0.0, 1.0, 1.0j], dtype=complex),
                                want_grad=False)
    s = ri_scale(ep)
    assert abs(u[0]) < 1e-9 * abs(s)
    assert u[1] / u[2] == pytest.approx(-1.0, rel=1e-9)
    assert u[1] == pytest.approx(-2.0 * s, rel=1e-10)


def test_gradient_closed_form(ep_right_isosceles):
    # grad of cos(pi x) - cos(pi y) at (1/2, 1/4) is (-pi, pi sqrt(2)/2)
    ep = ep_right_isosceles
    s = ri_scale(ep)
    p = 0.5 + 0.25j
    sample = field.eval(ep, p)
    assert sample.grad[0] == pytest.approx(-PI * s, rel=1e-8)
    assert sample.grad[1] == pytest.approx(PI * np.sqrt(2) / 2 * s, rel=1e-8)
    assert sample.u == pytest.approx(
        (np.cos(PI * 0.5) - np.cos(PI * 0.25)) * s, rel=1e-9)


def test_gradient_vs_central_differences(ep_scalene):
    ep = ep_scalene
    tri = ep.triangle
    scale = field_scale(ep)
    gref = np.sqrt(ep.mu) * scale
    h = 1e-5 * tri.diameter
    rng = np.random.default_rng(1)
    lam = rng.dirichlet((2, 2, 2), size=50)
    pts = tri.from_barycentric(lam)
    _, g, _ = field.eval_fields(ep, pts, want_grad=True)
    for i, p in enumerate(pts):
        fd_x = (field.eval_fields(ep, [p + h], want_grad=False)[0][0]
                - field.eval_fields(ep, [p - h], want_grad=False)[0][0]) / (2 * h)
        fd_y = (field.eval_fields(ep, [p + 1j * h], want_grad=False)[0][0]
                - field.eval_fields(ep, [p - 1j * h], want_grad=False)[0][0]) / (2 * h)
        err = np.hypot(fd_x - g[i, 0], fd_y - g[i, 1])
        assert err <= 1e-6 * max(np.hypot(*g[i]), 1e-2 * gref)


def test_hessian_vs_gradient_differences(ep_scalene):
    ep = ep_scalene
    tri = ep.triangle
    h = 1e-5 * tri.diameter
    rng = np.random.default_rng(9)
    lam = rng.dirichlet((3, 3, 3), size=10)
    pts = tri.from_barycentric(lam)
    _, _, hess = field.eval_fields(ep, pts, want_grad=False, want_hess=True)
    for i, p in enumerate(pts):
        gxp = field.eval_fields(ep, [p + h], want_grad=True)[1][0]
        gxm = field.eval_fields(ep, [p - h], want_grad=True)[1][0]
        gyp = field.eval_fields(ep, [p + 1j * h], want_grad=True)[1][0]
        gym = field.eval_fields(ep, [p - 1j * h], want_grad=True)[1][0]
        fd = np.empty((2, 2))
        fd[:, 0] = (gxp - gxm) / (2 * h)
        fd[:, 1] = (gyp - gym) / (2 * h)
        fd = 0.5 * (fd + fd.T)
        assert np.max(np.abs(fd - hess[i])) <= 1e-5 * max(
            1.0, np.max(np.abs(hess[i])))


def test_helmholtz_trace_identity(ep_scalene):
    ep = ep_scalene
    rng = np.random.default_rng(4)
    lam = rng.dirichlet((1.5, 1.5, 1.5), size=100)
    pts = ep.triangle.from_barycentric(lam)
    u, _, h = field.eval_fields(ep, pts, want_grad=False, want_hess=True)
    trace = h[:, 0, 0] + h[:, 1, 1]
    bound = 1e-6 * (np.abs(ep.mu * u) + np.nanmax(np.abs(h), axis=(1, 2)) + 1.0)
    assert np.all(np.abs(trace + ep.mu * u)[~np.isnan(trace)]
                  <= bound[~np.isnan(trace)])


def test_hessian_unavailable_near_vertex(ep_right_isosceles):
    ep = ep_right_isosceles
    p = 1e-5 + 1e-5j   # inside the exclusion radius of vertex 1
    sample = field.eval(ep, p)
    assert sample.hessian is None
    assert np.all(np.isfinite(sample.grad))


def test_rotational_derivative(ep_right_isosceles):
    ep = ep_right_isosceles
    s = ri_scale(ep)
    # R_0 u of the closed form at (1/2, 1/2) equals pi * s
    val = field.rotational_derivative(ep, 0.0, 0.5 + 0.5j)
    assert val == pytest.approx(PI * s, rel=1e-8)
    # anchor equals evaluation point: the rotation field vanishes there
    assert field.rotational_derivative(ep, 0.3 + 0.2j, 0.3 + 0.2j) \
        == pytest.approx(0.0, abs=1e-12)


def test_rotational_derivative_vanishes_on_adjacent_edges(ep_right_isosceles):
    ep = ep_right_isosceles
    scale = field_scale(ep)
    for s in np.linspace(0.1, 0.9, 7):
        # edge 1 (0 -> 1) is adjacent to the vertex anchor at 0
        val = field.rotational_derivative(ep, 0.0, complex(s, 0.0))
        assert abs(val) < 1e-7 * scale * np.sqrt(ep.mu)


def test_directional_derivative(ep_right_isosceles):
    ep = ep_right_isosceles
    s = ri_scale(ep)
    p = 0.5 + 0.25j
    val = field.directional_derivative(ep, (1.0, 0.0), p)
    assert val == pytest.approx(-PI * s, rel=1e-8)
    sample = field.eval(ep, p)
    perp = np.array([-sample.grad[1], sample.grad[0]])
    perp /= np.linalg.norm(perp)
    assert field.directional_derivative(ep, perp, p) == pytest.approx(
        0.0, abs=1e-9 * np.linalg.norm(sample.grad))


def test_normal_derivative_residual_on_edges(ep_right_isosceles):
    ep = ep_right_isosceles
    scale = field_scale(ep)
    from hotspots.geometry import edge_frame
    for e in (1, 2, 3):
        fr = edge_frame(ep.triangle, e)
        for s in np.linspace(0.2, 0.8, 5):
            val = field.directional_derivative(ep, fr.normal, fr.point(s * fr.length))
            assert abs(val) < 1e-7 * scale


def test_grid_correlation_with_closed_form(ep_right_isosceles):
    from hotspots.acceptance import grid_correlation, right_isosceles_reference
    corr = grid_correlation(ep_right_isosceles, right_isosceles_reference)
    assert corr >= 1.0 - 1e-8


def test_eval_outside_raises(ep_right_isosceles):
    with pytest.raises(field.OutsideDomainError):
        field.eval(ep_right_isosceles, 2.0 + 2.0j)


def test_exact_sum_matches_plain(ep_right_isosceles):
    pts = np.array([0.3 + 0.2j, 0.1 + 0.05j, 0.5 + 0.49j])
    u_plain = field.eval_fields(ep_right_isosceles, pts, want_grad=False)[0]
    u_exact = field.eval_exact_sum(ep_right_isosceles, pts)
    assert u_plain == pytest.approx(u_exact, abs=1e-10)
