from fractions import Fraction

import numpy as np
import pytest

from parakant import DiscreteMeasure, FiniteMetricSpace

F = Fraction


@pytest.fixture
def two_points():
    return FiniteMetricSpace.line([0, 1])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def measure(weights, space=None):
    space = space or FiniteMetricSpace.discrete(len(weights))
    return DiscreteMeasure(space, weights)
