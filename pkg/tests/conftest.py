import random

import pytest

from argengine.core import ArgumentationFramework


def random_framework(rng: random.Random, max_args: int = 12,
                     edge_probs=(0.1, 0.3, 0.5)) -> ArgumentationFramework:
    n = rng.randint(0, max_args)
    p = rng.choice(edge_probs)
    names = [f"x{i}" for i in range(n)]
    attacks = [(a, b) for a in names for b in names if rng.random() < p]
    return ArgumentationFramework(names, attacks)


@pytest.fixture
def rng():
    return random.Random(20240824)
