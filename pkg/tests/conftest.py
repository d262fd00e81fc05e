import numpy as np
import pytest

from edgecert import overlap as ov
from edgecert import states
from edgecert.tensor_core import HilbertDims


@pytest.fixture(scope="session")
def tiles_delta():
    return states.tiles_delta()


@pytest.fixture(scope="session")
def tiles_support(tiles_delta):
    return ov.support_projector(tiles_delta)


@pytest.fixture(scope="session")
def tiles_beta(tiles_support):
    return ov.seesaw_overlap(tiles_support, restarts=100, seed=7)


@pytest.fixture
def random_subspace():
    def make(rng, da, db, k):
        vecs = rng.standard_normal((k, da * db)) + 1j * rng.standard_normal((k, da * db))
        return ov.Subspace.from_vectors(vecs, HilbertDims((da, db), 1))

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
