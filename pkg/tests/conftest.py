import numpy as np
import pytest

from halfspace_concentration import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20201016)


@pytest.fixture
def small_data(rng):
    return Dataset(rng.normal(size=(200, 4)), "fixture")
