import numpy as np
import pytest

from hotspots.analysis import AMBIGUOUS, CRIT, NOCRIT
from hotspots.config import RunConfig
from hotspots.sweep import (PathRecord, SweepRecord, crit_trajectory,
                            isosceles_scan, reference_barycentric,
                            simplex_grid, sweep_node)

PI = np.pi


def test_simplex_grid_margins():
    nodes = simplex_grid(24, 0.05)
    assert len(nodes) == 23 * 22 // 2
    for b1, b2 in nodes:
        assert b1 > 0.05 and b2 > 0.05
        assert b1 + b2 < PI - 0.05
    assert nodes == sorted(nodes)
    with pytest.raises(ValueError):
        simplex_grid(4, 0.05)
    with pytest.raises(ValueError):
        simplex_grid(24, 0.01)


def test_reference_barycentric_fixed():
    a = reference_barycentric(100)
    b = reference_barycentric(100)
    assert np.array_equal(a, b)
    assert a.shape == (100, 3)
    assert np.all(a > 0) and np.allclose(a.sum(axis=1), 1.0)


def test_sweep_node_verdicts_and_symmetry():
    cfg = RunConfig()
    b1, b2 = 1.3, 0.9
    rec = sweep_node(b1, b2, cfg)
    assert rec.verdict == CRIT
    assert rec.crit is not None
    assert rec.mu2 is not None and rec.sigma is not None
    # label permutation: swapping beta1, beta2 must not change the verdict
    rec_swapped = sweep_node(b2, b1, cfg)
    assert rec_swapped.verdict == rec.verdict
    assert rec_swapped.mu2 == pytest.approx(rec.mu2, rel=1e-7)
    # third relabeling: (beta2, beta3); the normalized placement puts a
    # different side at unit length, so mu rescales by that side squared
    from hotspots.geometry import from_angles
    rec_cycled = sweep_node(b2, PI - b1 - b2, cfg)
    assert rec_cycled.verdict == rec.verdict
    ell = abs(from_angles(b1, b2).v3 - 1.0)
    assert rec_cycled.mu2 == pytest.approx(rec.mu2 * ell**2, rel=1e-7)


def test_sweep_node_obtuse():
    rec = sweep_node(0.5, 0.7, RunConfig())
    assert rec.verdict == NOCRIT
    assert rec.crit is None


def test_sweep_node_near_equilateral_flag():
    rec = sweep_node(PI / 3 + 0.01, PI / 3 - 0.01, RunConfig())
    assert rec.verdict == AMBIGUOUS
    assert "near-equilateral" in rec.flags


def test_sweep_node_failure_is_ambiguous():
    # beta1 + beta2 ~ pi gives a degenerate triangle: recorded, not raised
    rec = sweep_node(1.6, PI - 1.6 - 1e-9, RunConfig())
    assert rec.verdict == AMBIGUOUS
    assert any(f.startswith("solver-failure") for f in rec.flags)


def test_sweep_record_csv_row():
    rec = SweepRecord(beta1=1.0, beta2=0.8, mu2=12.5, u_v=(1.0, -0.5, 0.25),
                      c1_v=(0.1, 0.2, np.nan), verdict=CRIT,
                      crit=0.5 + 0.0j, sigma=1e-9, flags=("x",))
    row = rec.csv_row()
    cells = row.split(",")
    assert len(cells) == 14
    assert cells[9] == "CRIT"
    assert cells[8] == ""          # NaN c1 serializes empty
    assert cells[13] == "x"
    # byte-identical reproducibility
    assert row == rec.csv_row()


def _fake_path(crit_ts, m=100):
    from hotspots.geometry import from_angles, straight_line_path
    tri0 = from_angles(0.9, 0.9)
    recs = []
    for k in range(m + 1):
        t = k / m
        tri = straight_line_path(tri0, t)
        crit = complex(0.5, 0.0) + 0.001 * t if t in crit_ts else None
        ratio = 0.5 if crit is not None else 0.01
        recs.append(PathRecord(t=t, triangle=tri, eigenpair=None, crit=crit,
                               crit_count=1 if crit is not None else 0,
                               vertex_ratios=(ratio, 0.9, 0.9),
                               min_vertex_ratio=ratio,
                               c1_obtuse=None, flags=()))
    return recs


def test_crit_trajectory_linking():
    ts = {k / 100 for k in range(10, 60)}
    path = _fake_path(ts)
    report = crit_trajectory(path)
    assert report.present_count == 50
    assert report.linking_ok
    assert report.last_t == pytest.approx(0.59)
    assert report.disappearance is not None
    assert report.disappearance["vertex"] in (1, 2, 3)


def test_crit_trajectory_present_nowhere():
    report = crit_trajectory(_fake_path(set()))
    assert report.present_count == 0
    assert report.disappearance is None


def test_isosceles_scan_rejects_bad_range():
    with pytest.raises(ValueError):
        isosceles_scan(1.03, 1.4, steps=4)
    with pytest.raises(ValueError):
        isosceles_scan(0.6, 1.05, steps=4)
