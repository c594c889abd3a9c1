import random

import pytest
from hypothesis import settings

from vtsafl.group import DEFAULT_GROUP, SchnorrGroup

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def group():
    return DEFAULT_GROUP


@pytest.fixture(scope="session")
def toy():
    """Order-101 subgroup of Z_607^*; small enough to brute-force discrete logs."""
    return SchnorrGroup.from_order(101)


@pytest.fixture(scope="session")
def toy_log(toy):
    table = {toy.gexp(e): e for e in range(toy.order)}
    return table.__getitem__


@pytest.fixture
def rng():
    return random.Random(1234)
