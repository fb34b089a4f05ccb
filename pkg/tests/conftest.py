import numpy as np
import pytest

from DEC2D.build_meshes import gen_disk, gen_square
from DEC2D.mesh import MaterialSpec, boundary_dirichlet


@pytest.fixture
def right_triangle():
    return np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def obtuse_triangle():
    return np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.1]])


@pytest.fixture
def equilateral_triangle():
    return np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])


@pytest.fixture
def unit_square():
    return gen_square(1)


@pytest.fixture
def isotropic():
    return {0: MaterialSpec(0, 1.0, 1.0)}


@pytest.fixture
def disk_materials():
    """The anisotropic disk problem: K from (1.5, 1.0, 30 degrees), q = 1."""
    return {1: MaterialSpec(1, 1.5, 1.0, 30.0, 1.0)}


@pytest.fixture
def disk_problem(disk_materials):
    mesh = gen_disk(8, material=1)
    return mesh, disk_materials, boundary_dirichlet(mesh, 10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
