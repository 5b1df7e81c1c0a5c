import numpy as np
import pytest

from families import get_family
from models.data import Dataset


def make_dataset(family, n, theta0, seed=0, scale=1.0):
    """Gaussian design times `scale`, responses drawn from the family."""
    family = get_family(family)
    theta0 = np.asarray(theta0, dtype=float)
    rng = np.random.default_rng(seed)
    x = scale * rng.standard_normal((n, theta0.shape[0]))
    return Dataset(x, family.sample(x @ theta0, rng))


@pytest.fixture
def logistic():
    return get_family("logistic")


@pytest.fixture
def poisson():
    return get_family("poisson")


@pytest.fixture
def logistic_theta0():
    return np.array([1.0, -1.0, 0.0, 0.0, 0.0, 0.0])


@pytest.fixture
def poisson_theta0():
    return np.array([0.5, -0.5, 0.0, 0.0, 0.0, 0.0])


@pytest.fixture
def logistic_data(logistic_theta0):
    return make_dataset("logistic", 200, logistic_theta0, seed=1)


@pytest.fixture
def poisson_data(poisson_theta0):
    return make_dataset("poisson", 200, poisson_theta0, seed=2, scale=0.7)


@pytest.fixture
def dataset_factory():
    return make_dataset
