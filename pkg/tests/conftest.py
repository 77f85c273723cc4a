import random

import pytest

from snip.graph import Arc, Network
from snip.instances import Instance, Scenario
from snip.pathcuts import PathFunction


def make_diamond() -> Instance:
    """Four-node instance with two parallel s-t routes, budget for one sensor."""
    net = Network(
        4,
        [
            Arc(0, 1, 0.9),
            Arc(1, 3, 0.8, 0.4, 1.0),
            Arc(0, 2, 0.7, 0.07, 1.0),
            Arc(2, 3, 0.9),
        ],
    )
    return Instance(net, [Scenario(0, 3, 1.0)], 1.0)


@pytest.fixture
def diamond() -> Instance:
    return make_diamond()


@pytest.fixture
def two_arc_pf() -> PathFunction:
    """The worked fixture: two interdictable arcs, r=(0.8,0.5), q=(0.4,0.25)."""
    return PathFunction([(1, 0.8, 0.4), (2, 0.5, 0.25)])


def random_path_function(
    rng: random.Random, max_arcs: int = 6, regime: str = "factor", min_arcs: int = 1
) -> PathFunction:
    """Random single-path reliability function for property tests."""
    n = rng.randint(min_arcs, max_arcs)
    inter = []
    for a in range(1, n + 1):
        r = rng.uniform(0.3, 0.99)
        if regime == "factor":
            q = rng.uniform(0.05, 0.9) * r
        elif regime == "zero":
            q = 0.0
        elif regime == "mixed":
            q = rng.uniform(0.05, 0.9) * r if rng.random() < 0.5 else 0.0
        else:
            raise ValueError(regime)
        inter.append((a, r, q))
    return PathFunction(inter, r_rest=rng.uniform(0.5, 1.0))
