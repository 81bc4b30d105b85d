import numpy as np
import pytest

from hotspots.fem import fem_bracket
from hotspots.geometry import RIGHT_ISOSCELES, from_angles

PI = np.pi


def test_right_isosceles_value():
    mu = fem_bracket(RIGHT_ISOSCELES, 32)
    assert abs(mu - PI**2) / PI**2 < 0.02


def test_equilateral_value():
    mu = fem_bracket(from_angles(PI / 3, PI / 3), 32)
    ref = 16.0 * PI**2 / 9.0
    assert abs(mu - ref) / ref < 0.02


def test_quadratic_convergence():
    err16 = fem_bracket(RIGHT_ISOSCELES, 16) - PI**2
    err32 = fem_bracket(RIGHT_ISOSCELES, 32) - PI**2
    assert err16 / err32 == pytest.approx(4.0, rel=0.15)


def test_near_equilateral_degenerate_pair():
    # single-vector iteration stalls here; the block handles it
    mu = fem_bracket(from_angles(1.059, 1.031), 24)
    assert 15.0 < mu < 20.0


def test_refinement_range():
    with pytest.raises(ValueError):
        fem_bracket(RIGHT_ISOSCELES, 4)
    with pytest.raises(ValueError):
        fem_bracket(RIGHT_ISOSCELES, 100)
