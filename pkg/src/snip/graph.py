"""Directed network model and maximum-reliability path routines.

Reliabilities are per-arc probabilities of undetected traversal.  The value of
a path is the product of its arc reliabilities, and the most reliable path is
found with a label-setting search (all factors are <= 1, so labels only shrink
along extensions and a Dijkstra-style search is exact).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Arc",
    "Network",
    "ReliabilityLabels",
    "Path",
    "NoPathError",
    "max_reliability_labels",
    "reliability_values",
    "uninterdicted_bounds",
    "extract_path",
    "plan_sigma",
    "fractional_sigma",
]


class NoPathError(Exception):
    """Raised when a path is requested between disconnected nodes."""


@dataclass(frozen=True)
class Arc:
    """A directed arc with an evasion probability.

    An arc is interdictable iff ``q`` is given; then installing a sensor drops
    its evasion probability from ``r`` to ``q``, at price ``cost``.
    """

    tail: int
    head: int
    r: float
    q: float | None = None
    cost: float | None = None

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError(f"arc ({self.tail},{self.head}): r={self.r} not in (0, 1]")
        if self.q is not None:
            if not 0.0 <= self.q < self.r:
                raise ValueError(
                    f"arc ({self.tail},{self.head}): q={self.q} not in [0, r)"
                )
            cost = 1.0 if self.cost is None else self.cost
            if cost <= 0.0:
                raise ValueError(f"arc ({self.tail},{self.head}): cost must be > 0")
            object.__setattr__(self, "cost", cost)
        elif self.cost is not None:
            raise ValueError(f"arc ({self.tail},{self.head}): cost without q")

    @property
    def interdictable(self) -> bool:
        return self.q is not None


class Network:
    """Immutable directed graph with per-arc evasion data.

    Arcs are referenced everywhere by their index in ``arcs``.  The subset of
    interdictable arc ids is ``interdictable_ids`` (the set D).
    """

    def __init__(self, node_count: int, arcs: list[Arc]):
        if node_count <= 0:
            raise ValueError("node_count must be positive")
        seen = set()
        for a in arcs:
            if not (0 <= a.tail < node_count and 0 <= a.head < node_count):
                raise ValueError(f"arc ({a.tail},{a.head}) endpoint out of range")
            if a.tail == a.head:
                raise ValueError(f"self-loop at node {a.tail}")
            if (a.tail, a.head) in seen:
                raise ValueError(f"duplicate arc ({a.tail},{a.head})")
            seen.add((a.tail, a.head))
        self.node_count = node_count
        self.arcs = list(arcs)
        self.interdictable_ids = [i for i, a in enumerate(arcs) if a.interdictable]
        # position of an arc id within D, for interdiction-plan vectors
        self.d_pos = {a: k for k, a in enumerate(self.interdictable_ids)}
        self.r = np.array([a.r for a in arcs], dtype=float)
        self._in_arcs: list[list[int]] = [[] for _ in range(node_count)]
        for i, a in enumerate(arcs):
            self._in_arcs[a.head].append(i)
        # flat arrays for the vectorized Bellman sweep
        self._tails = np.array([a.tail for a in arcs], dtype=np.intp)
        self._heads = np.array([a.head for a in arcs], dtype=np.intp)

    @property
    def num_interdictable(self) -> int:
        return len(self.interdictable_ids)

    def in_arcs(self, node: int) -> list[int]:
        return self._in_arcs[node]


@dataclass
class ReliabilityLabels:
    """Maximum-reliability values toward one destination.

    ``pi[i]`` is the best product of arc reliabilities over simple paths from
    ``i`` to ``destination`` (0 if unreachable); ``successor[i]`` is the first
    arc of one optimal path (-1 where undefined).
    """

    destination: int
    pi: np.ndarray
    successor: np.ndarray


@dataclass(frozen=True)
class Path:
    """A simple path stored as an ordered list of arc ids."""

    arcs: tuple[int, ...]
    origin: int
    destination: int


def max_reliability_labels(network: Network, sigma, t: int) -> ReliabilityLabels:
    """Label-setting search for most reliable paths into destination ``t``.

    ``sigma`` holds one reliability in [0, 1] per arc.  Ties between equally
    reliable extensions are broken toward the smaller arc id so that
    :func:`extract_path` is deterministic.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = network.node_count
    pi = np.zeros(n)
    succ = np.full(n, -1, dtype=np.intp)
    done = np.zeros(n, dtype=bool)
    pi[t] = 1.0
    heap = [(-1.0, t)]
    while heap:
        negval, j = heapq.heappop(heap)
        if done[j]:
            continue
        done[j] = True
        pj = -negval
        if pj <= 0.0:
            break
        for aid in network.in_arcs(j):
            i = network.arcs[aid].tail
            if done[i]:
                continue
            cand = sigma[aid] * pj
            if cand > pi[i]:
                pi[i] = cand
                succ[i] = aid
                heapq.heappush(heap, (-cand, i))
            elif cand == pi[i] and cand > 0.0 and (succ[i] == -1 or aid < succ[i]):
                succ[i] = aid
    succ[t] = -1
    return ReliabilityLabels(destination=t, pi=pi, successor=succ)


def reliability_values(network: Network, sigma, t: int) -> np.ndarray:
    """Value-only variant of :func:`max_reliability_labels`.

    Runs a vectorized Bellman sweep; used in hot loops (brute force) where
    successors are not needed.
    """
    sigma = np.asarray(sigma, dtype=float)
    pi = np.zeros(network.node_count)
    pi[t] = 1.0
    tails, heads = network._tails, network._heads
    for _ in range(network.node_count):
        cand = sigma * pi[heads]
        new = pi.copy()
        np.maximum.at(new, tails, cand)
        new[t] = 1.0
        if np.array_equal(new, pi):
            break
        pi = new
    return pi


def uninterdicted_bounds(network: Network, destinations) -> dict[int, np.ndarray]:
    """Per-node maximum-reliability values with no sensors installed.

    Returns ``u[t][j]`` for each requested destination ``t``; these serve both
    as big-M coefficients and as variable upper bounds downstream.
    """
    return {
        t: max_reliability_labels(network, network.r, t).pi.copy()
        for t in destinations
    }


def extract_path(network: Network, labels: ReliabilityLabels, s: int) -> Path:
    """Walk successors from ``s`` to the label destination."""
    if labels.pi[s] <= 0.0:
        raise NoPathError(f"node {s} cannot reach {labels.destination}")
    arcs = []
    node = s
    while node != labels.destination:
        aid = int(labels.successor[node])
        if aid < 0:
            raise NoPathError(f"broken successor chain at node {node}")
        arcs.append(aid)
        node = network.arcs[aid].head
    return Path(arcs=tuple(arcs), origin=s, destination=labels.destination)


def plan_sigma(network: Network, x) -> np.ndarray:
    """Arc reliabilities under a binary interdiction plan.

    ``x`` has one 0/1 entry per interdictable arc, ordered as
    ``network.interdictable_ids``.
    """
    sigma = network.r.copy()
    for pos, aid in enumerate(network.interdictable_ids):
        if x[pos] >= 0.5:
            sigma[aid] = network.arcs[aid].q
    return sigma


def fractional_sigma(network: Network, x) -> np.ndarray:
    """Convex-combination arc reliabilities for fractional plans."""
    sigma = network.r.copy()
    for pos, aid in enumerate(network.interdictable_ids):
        xa = float(x[pos])
        sigma[aid] = (1.0 - xa) * network.arcs[aid].r + xa * network.arcs[aid].q
    return sigma
