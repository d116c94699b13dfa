import numpy as np
import pytest

from markov_dirichlet.geometry import build_domain
from markov_dirichlet.kernels import build_kernel
from markov_dirichlet.presets import boundary_angles


@pytest.fixture(scope="session")
def square3():
    return build_domain({"shape": "square", "n": 3})


@pytest.fixture(scope="session")
def square17():
    return build_domain({"shape": "square", "n": 17})


@pytest.fixture(scope="session")
def disk9():
    return build_domain({"shape": "disk", "n": 9})


@pytest.fixture(scope="session")
def disk17():
    return build_domain({"shape": "disk", "n": 17})


@pytest.fixture(scope="session")
def disk33():
    return build_domain({"shape": "disk", "n": 33})


@pytest.fixture(scope="session")
def annulus17():
    return build_domain({"shape": "annulus", "n": 17, "inner_radius": 0.5})


@pytest.fixture(scope="session")
def lshape17():
    return build_domain({"shape": "lshape", "n": 17})


@pytest.fixture(scope="session")
def walk_square3(square3):
    return build_kernel(square3, {"type": "grid-walk", "lazy": 0.0})


@pytest.fixture(scope="session")
def walk_disk17(disk17):
    return build_kernel(disk17, {"type": "grid-walk", "lazy": 0.0})


@pytest.fixture(scope="session")
def walk_disk33(disk33):
    return build_kernel(disk33, {"type": "grid-walk", "lazy": 0.0})


@pytest.fixture(scope="session")
def ball_disk17(disk17):
    return build_kernel(disk17, {"type": "ball-average", "radius_factor": 0.5})


def cos_theta_data(domain, k=1):
    angles = boundary_angles(domain)
    return {
        int(b): complex(np.cos(k * a))
        for b, a in zip(domain.boundary_ids, angles)
    }


@pytest.fixture(scope="session")
def disk17_cos(disk17):
    return cos_theta_data(disk17)
