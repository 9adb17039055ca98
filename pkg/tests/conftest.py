import numpy as np
import pytest

from tsmatch.bench import random_walks
from tsmatch.core import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def walk_ds():
    return Dataset.from_arrays(random_walks(8, 128, seed=7))
