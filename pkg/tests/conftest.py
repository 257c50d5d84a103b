import random

import pytest

from fracbp.core import crown, domino

SEED = 20260823


@pytest.fixture
def rng():
    return random.Random(SEED)


@pytest.fixture
def d():
    return domino()


@pytest.fixture
def crown5():
    return crown(5)
