import numpy as np
import pytest

from whitney.mesh import (
    generate_annulus_mesh,
    generate_cube_mesh,
    generate_disk_mesh,
    generate_square_mesh,
)


@pytest.fixture(scope="session")
def square4():
    return generate_square_mesh(4, pattern="uniform")


@pytest.fixture(scope="session")
def crossed2():
    return generate_square_mesh(2, pattern="crossed")


@pytest.fixture(scope="session")
def disk2():
    return generate_disk_mesh(2)


@pytest.fixture(scope="session")
def annulus8():
    return generate_annulus_mesh(8)


@pytest.fixture(scope="session")
def cube2():
    return generate_cube_mesh(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
