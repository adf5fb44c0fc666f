import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import gaugelab as gl


@pytest.fixture(scope="session")
def unit_disk():
    return gl.ball_body(2)


@pytest.fixture(scope="session")
def unit_square():
    return gl.cube_body(2, 1.0)


@pytest.fixture(scope="session")
def half_cube():
    return gl.cube_body(2, 0.5)


@pytest.fixture(scope="session")
def square_mesh(unit_square):
    return gl.triangulate_boundary(unit_square, 4096)


@pytest.fixture(scope="session")
def square_measure(square_mesh):
    return gl.from_mesh(square_mesh, normalize=True)


@pytest.fixture(scope="session")
def circle_mesh(unit_disk):
    return gl.triangulate_boundary(unit_disk, 4096)


@pytest.fixture(scope="session")
def circle_measure(circle_mesh):
    return gl.from_mesh(circle_mesh, normalize=True)


@pytest.fixture(scope="session")
def five_caps():
    ang = (np.arange(5) + 0.5) * np.pi / 5
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return gl.CapFamily(dirs, 0.05)


@pytest.fixture(scope="session")
def five_cap_measure(unit_disk, five_caps):
    mesh = gl.triangulate_boundary(unit_disk, 16384)
    return gl.construct_good_measure(unit_disk, mesh, five_caps)
