import numpy as np
import pytest

from stable_passage.models import Lattice, simple_random_walk


@pytest.fixture
def srw():
    return simple_random_walk()


@pytest.fixture
def three_point():
    # zero-mean lattice law with an asymmetric support
    return Lattice((-1, 0, 2), (0.5, 0.25, 0.25))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240611))
