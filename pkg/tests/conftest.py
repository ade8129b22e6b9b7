import math

import numpy as np
import pytest
from hypothesis import settings

from qfric import LorentzModel, Temperature, lambda_n

settings.register_profile("default", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("default")


@pytest.fixture(scope="session")
def model():
    return LorentzModel.single(1.0, 0.01, 1.0)


@pytest.fixture(scope="session")
def lambdas_zero(model):
    """Lambda_0..Lambda_3 at zero temperature for the default pair."""
    return [lambda_n(model, model, n, Temperature(0.0)) for n in range(4)]


@pytest.fixture(scope="session")
def lambdas_warm(model):
    """Lambda_0..Lambda_3 at Theta = 0.01 for the default pair."""
    return [lambda_n(model, model, n, Temperature(0.01)) for n in range(4)]


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def random_directions(seed, count):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(count, 3))
    return pts / np.linalg.norm(pts, axis=1)[:, None]


TWO_PI = 2 * math.pi
