import numpy as np
import pytest

from cat0lab import (
    Model,
    StepDistribution,
    e2_isometry,
    h2_isometry,
    inverse,
    t4_isometry,
)

ALL_MODELS = [Model.E2, Model.H2, Model.T4, Model.H2xR]


def standard_h2_pair():
    return h2_isometry(2, 0, 0, 0.5), h2_isometry(1, 1, 1, 2)


@pytest.fixture
def h2_spec():
    g, h = standard_h2_pair()
    return StepDistribution.uniform([g, inverse(g), h, inverse(h)])


@pytest.fixture
def t4_uniform():
    return StepDistribution.uniform([t4_isometry(w) for w in "aAbB"])


@pytest.fixture
def e2_centered():
    return StepDistribution.uniform([
        e2_isometry(0, (1, 0)), e2_isometry(0, (-1, 0)),
        e2_isometry(0, (0, 1)), e2_isometry(0, (0, -1)),
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
