import numpy as np

from hotspots.render import contour_svg, marching_squares, moduli_svg
from hotspots.sweep import SweepRecord


def test_marching_squares_circle():
    xs = np.linspace(-1.5, 1.5, 61)
    ys = np.linspace(-1.5, 1.5, 61)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    grid = gx**2 + gy**2
    segs = marching_squares(xs, ys, grid, 1.0)
    assert len(segs) > 40
    for x0, y0, x1, y1 in segs:
        assert abs(np.hypot(x0, y0) - 1.0) < 0.06
        assert abs(np.hypot(x1, y1) - 1.0) < 0.06


def test_marching_squares_skips_nan():
    xs = ys = np.linspace(0.0, 1.0, 5)
    grid = np.full((5, 5), np.nan)
    assert marching_squares(xs, ys, grid, 0.0) == []


def test_contour_svg(ep_right_isosceles):
    svg = contour_svg(ep_right_isosceles, "config_hash=abc seed=0",
                      n_grid=40, nodal=np.array([0.1 + 0.1j, 0.2 + 0.2j]),
                      crits=[0.5 + 0.0j])
    assert svg.startswith("<!-- config_hash=abc seed=0 -->")
    assert "<svg" in svg and "</svg>" in svg
    assert "polygon" in svg and "circle" in svg
    # deterministic
    svg2 = contour_svg(ep_right_isosceles, "config_hash=abc seed=0",
                       n_grid=40, nodal=np.array([0.1 + 0.1j, 0.2 + 0.2j]),
                       crits=[0.5 + 0.0j])
    assert svg == svg2


def test_moduli_svg():
    recs = [SweepRecord(beta1=1.0, beta2=0.8, mu2=12.0, u_v=(1, 1, 1),
                        c1_v=(0, 0, 0), verdict="CRIT", crit=None,
                        sigma=1e-9, flags=()),
            SweepRecord(beta1=0.5, beta2=0.6, mu2=20.0, u_v=(1, 1, 1),
                        c1_v=(0, 0, 0), verdict="NOCRIT", crit=None,
                        sigma=1e-8, flags=())]
    svg = moduli_svg(recs, "config_hash=zzz seed=1", 24, 0.05)
    assert svg.startswith("<!-- config_hash=zzz seed=1 -->")
    assert svg.count("<rect") >= 3
    assert "CRIT" in svg
