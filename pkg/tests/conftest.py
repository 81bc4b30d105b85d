import numpy as np
import pytest

from hotspots.config import RunConfig
from hotspots.eigensolver import find_mu2
from hotspots.geometry import RIGHT_ISOSCELES, from_angles


@pytest.fixture(scope="session")
def cfg():
    return RunConfig()


@pytest.fixture(scope="session")
def ep_right_isosceles(cfg):
    return find_mu2(RIGHT_ISOSCELES, cfg.solver)


@pytest.fixture(scope="session")
def ep_scalene(cfg):
    return find_mu2(from_angles(1.2, 0.9), cfg.solver)


@pytest.fixture(scope="session")
def ep_obtuse(cfg):
    return find_mu2(from_angles(0.5, 0.7), cfg.solver)
