import itertools

import numpy as np
import pytest

from snip.graph import (
    Arc,
    Network,
    NoPathError,
    extract_path,
    fractional_sigma,
    max_reliability_labels,
    plan_sigma,
    reliability_values,
    uninterdicted_bounds,
)
from snip.instances import GeneratorParams, generate


def test_arc_validation():
    with pytest.raises(ValueError):
        Arc(0, 1, 0.0)
    with pytest.raises(ValueError):
        Arc(0, 1, 1.2)
    with pytest.raises(ValueError):
        Arc(0, 1, 0.5, q=0.5)  # q must be strictly below r
    with pytest.raises(ValueError):
        Arc(0, 1, 0.5, cost=2.0)  # cost without q
    with pytest.raises(ValueError):
        Arc(0, 1, 0.5, q=0.1, cost=0.0)
    assert Arc(0, 1, 0.5, q=0.1).cost == 1.0  # default unit cost
    assert Arc(0, 1, 0.5).interdictable is False
    assert Arc(0, 1, 0.5, q=0.0).interdictable is True


def test_network_validation():
    with pytest.raises(ValueError):
        Network(0, [])
    with pytest.raises(ValueError):
        Network(2, [Arc(0, 0, 0.5)])
    with pytest.raises(ValueError):
        Network(2, [Arc(0, 1, 0.5), Arc(0, 1, 0.6)])
    with pytest.raises(ValueError):
        Network(2, [Arc(0, 3, 0.5)])


def test_network_indexing():
    net = Network(3, [Arc(0, 1, 0.9), Arc(1, 2, 0.8, 0.1), Arc(0, 2, 0.5, 0.2)])
    assert net.interdictable_ids == [1, 2]
    assert net.d_pos == {1: 0, 2: 1}
    assert net.num_interdictable == 2
    assert net.in_arcs(2) == [1, 2]
    np.testing.assert_allclose(net.r, [0.9, 0.8, 0.5])


def _enumerate_best(net, sigma, s, t):
    """Reference: best path product by enumerating all simple paths."""
    best = 0.0
    stack = [(s, 1.0, {s})]
    while stack:
        node, value, seen = stack.pop()
        if node == t:
            best = max(best, value)
            continue
        for aid, arc in enumerate(net.arcs):
            if arc.tail == node and arc.head not in seen:
                stack.append((arc.head, value * sigma[aid], seen | {arc.head}))
    return best


def test_labels_match_path_enumeration():
    net = generate(GeneratorParams(rows=3, cols=3, seed=11)).network
    sigma = net.r
    labels = max_reliability_labels(net, sigma, 8)
    for s in range(net.node_count):
        assert labels.pi[s] == pytest.approx(
            _enumerate_best(net, sigma, s, 8), abs=1e-12
        )


def test_labels_and_bellman_agree():
    for seed in range(5):
        net = generate(GeneratorParams(rows=3, cols=4, seed=seed)).network
        rng = np.random.default_rng(seed)
        sigma = rng.uniform(0.1, 1.0, size=len(net.arcs))
        for t in (0, net.node_count - 1):
            lab = max_reliability_labels(net, sigma, t)
            np.testing.assert_allclose(
                lab.pi, reliability_values(net, sigma, t), atol=1e-12
            )


def test_extract_path_value_matches_label():
    net = generate(GeneratorParams(rows=3, cols=3, seed=2)).network
    lab = max_reliability_labels(net, net.r, 8)
    for s in range(net.node_count):
        if lab.pi[s] <= 0.0 or s == 8:
            continue
        path = extract_path(net, lab, s)
        value = 1.0
        for aid in path.arcs:
            value *= net.arcs[aid].r
        assert value == pytest.approx(lab.pi[s], abs=1e-12)
        assert path.origin == s and path.destination == 8


def test_extract_path_disconnected():
    net = Network(3, [Arc(0, 1, 0.5)])
    lab = max_reliability_labels(net, net.r, 2)
    with pytest.raises(NoPathError):
        extract_path(net, lab, 0)


def test_tie_break_prefers_smaller_arc_id():
    # two identical parallel routes 0->1->3 and 0->2->3
    net = Network(
        4,
        [Arc(0, 1, 0.8), Arc(1, 3, 0.5), Arc(0, 2, 0.8), Arc(2, 3, 0.5)],
    )
    lab = max_reliability_labels(net, net.r, 3)
    assert extract_path(net, lab, 0).arcs == (0, 1)


def test_uninterdicted_bounds():
    net = generate(GeneratorParams(rows=3, cols=3, seed=4)).network
    u = uninterdicted_bounds(net, [8, 5])
    for t in (8, 5):
        assert u[t][t] == 1.0
        assert np.all(u[t] >= 0.0) and np.all(u[t] <= 1.0)


def test_sigma_builders():
    net = Network(3, [Arc(0, 1, 0.9), Arc(1, 2, 0.8, 0.2), Arc(0, 2, 0.5, 0.0)])
    np.testing.assert_allclose(plan_sigma(net, [1, 0]), [0.9, 0.2, 0.5])
    np.testing.assert_allclose(plan_sigma(net, [0, 1]), [0.9, 0.8, 0.0])
    np.testing.assert_allclose(fractional_sigma(net, [0.5, 0.0]), [0.9, 0.5, 0.5])
    # convex interpolation matches the plan at binary points
    for x in itertools.product([0.0, 1.0], repeat=2):
        np.testing.assert_allclose(fractional_sigma(net, x), plan_sigma(net, x))
