import random

import pytest

from gclab.textcore import Text


def random_text(rng: random.Random, sigma: int, n: int) -> Text:
    return Text([rng.randrange(sigma) for _ in range(n)], sigma)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
