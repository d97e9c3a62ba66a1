import numpy as np
import pytest

from ribnet import load_dataset


@pytest.fixture(scope="session")
def ds2():
    return load_dataset("ds-n2-l1")


@pytest.fixture(scope="session")
def ds3():
    return load_dataset("ds-n3-l2")


@pytest.fixture(scope="session")
def dsN():
    return load_dataset("ds-n2-N1-l1")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
