import numpy as np
import pytest

from swesphere import build_mesh


@pytest.fixture(scope="session")
def mesh33():
    """6 x 3 x 3 unit-sphere mesh at order 3, the operator-suite workhorse."""
    return build_mesh(3, 3)


@pytest.fixture(scope="session")
def mesh22():
    return build_mesh(2, 3)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
