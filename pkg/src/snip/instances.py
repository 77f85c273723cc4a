"""Instance data model, file format, synthetic generator, and the brute-force
optimality oracle.

The document format is JSON: ``{"nodes": int, "arcs": [...], "scenarios":
[...], "budget": real}``.  An arc is interdictable iff its object carries a
``"q"`` key ("cost" defaults to 1.0).  Node ids are 0-based.  Unknown keys are
rejected so that golden files stay honest.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

import numpy as np

from .graph import (
    Arc,
    Network,
    plan_sigma,
    reliability_values,
    uninterdicted_bounds,
)

__all__ = [
    "Scenario",
    "Instance",
    "ParseError",
    "ValidationError",
    "InfeasibleParamsError",
    "TooLargeError",
    "GeneratorParams",
    "load",
    "loads",
    "save",
    "dumps",
    "generate",
    "brute_force",
]


class ParseError(Exception):
    """Document is not syntactically valid."""


class ValidationError(Exception):
    """Document parsed but violates an instance invariant."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class InfeasibleParamsError(Exception):
    """Generator parameters cannot produce a valid instance."""


class TooLargeError(Exception):
    """Brute-force enumeration guard tripped."""


@dataclass(frozen=True)
class Scenario:
    """An origin-destination pair with its realization probability."""

    s: int
    t: int
    p: float


class Instance:
    """A network, a scenario distribution, and an interdiction budget."""

    def __init__(self, network: Network, scenarios: list[Scenario], budget: float):
        if budget <= 0.0:
            raise ValidationError("budget", f"must be > 0, got {budget}")
        total = sum(sc.p for sc in scenarios)
        if not scenarios:
            raise ValidationError("scenarios", "at least one scenario required")
        if abs(total - 1.0) > 1e-9:
            raise ValidationError("scenarios", f"probabilities sum to {total}, not 1")
        for k, sc in enumerate(scenarios):
            if sc.p <= 0.0:
                raise ValidationError(f"scenarios[{k}].p", "must be > 0")
            for label, node in (("s", sc.s), ("t", sc.t)):
                if not 0 <= node < network.node_count:
                    raise ValidationError(
                        f"scenarios[{k}].{label}", f"node {node} out of range"
                    )
            if sc.s == sc.t:
                raise ValidationError(f"scenarios[{k}]", "origin equals destination")
        self.network = network
        # renormalize exactly once the 1e-9 check has passed
        self.scenarios = [Scenario(sc.s, sc.t, sc.p / total) for sc in scenarios]
        self.budget = float(budget)
        self.destinations = sorted({sc.t for sc in self.scenarios})
        self._u: dict[int, np.ndarray] | None = None
        for k, sc in enumerate(self.scenarios):
            if self.u[sc.t][sc.s] <= 0.0:
                raise ValidationError(f"scenarios[{k}]", f"no path from {sc.s} to {sc.t}")

    @property
    def u(self) -> dict[int, np.ndarray]:
        """Uninterdicted maximum-reliability values, one vector per destination."""
        if self._u is None:
            self._u = uninterdicted_bounds(self.network, self.destinations)
        return self._u

    @property
    def costs(self) -> list[float]:
        return [self.network.arcs[a].cost for a in self.network.interdictable_ids]

    def to_dict(self) -> dict:
        arcs = []
        for a in self.network.arcs:
            doc = {"tail": a.tail, "head": a.head, "r": a.r}
            if a.interdictable:
                doc["q"] = a.q
                doc["cost"] = a.cost
            arcs.append(doc)
        return {
            "nodes": self.network.node_count,
            "arcs": arcs,
            "scenarios": [{"s": sc.s, "t": sc.t, "p": sc.p} for sc in self.scenarios],
            "budget": self.budget,
        }


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ValidationError(where, f"unknown keys {sorted(extra)}")


def loads(text: str) -> Instance:
    """Parse and validate an instance document from a string."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level document must be an object")
    _check_keys(doc, {"nodes", "arcs", "scenarios", "budget"}, "document")
    for key in ("nodes", "arcs", "scenarios", "budget"):
        if key not in doc:
            raise ValidationError(key, "missing")
    arcs = []
    for k, rec in enumerate(doc["arcs"]):
        _check_keys(rec, {"tail", "head", "r", "q", "cost"}, f"arcs[{k}]")
        try:
            arcs.append(
                Arc(
                    tail=rec["tail"],
                    head=rec["head"],
                    r=rec["r"],
                    q=rec.get("q"),
                    cost=rec.get("cost"),
                )
            )
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"arcs[{k}]", str(exc)) from exc
    try:
        network = Network(doc["nodes"], arcs)
    except ValueError as exc:
        raise ValidationError("arcs", str(exc)) from exc
    scenarios = []
    for k, rec in enumerate(doc["scenarios"]):
        _check_keys(rec, {"s", "t", "p"}, f"scenarios[{k}]")
        try:
            scenarios.append(Scenario(s=rec["s"], t=rec["t"], p=rec["p"]))
        except KeyError as exc:
            raise ValidationError(f"scenarios[{k}]", f"missing key {exc}") from exc
    return Instance(network, scenarios, doc["budget"])


def load(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(instance: Instance) -> str:
    return json.dumps(instance.to_dict(), indent=2)


def save(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(instance))
        fh.write("\n")


@dataclass
class GeneratorParams:
    """Knobs for the synthetic grid generator.

    ``q_mode`` selects the interdicted-probability regime: ``"factor"`` sets
    q = q_factor * r on every interdictable arc, ``"zero"`` sets q = 0, and
    ``"mixed"`` flips a coin per arc between the two.
    """

    rows: int
    cols: int
    interdictable_fraction: float = 0.5
    q_mode: str = "factor"
    q_factor: float = 0.5
    scenario_count: int = 1
    budget: float = 1.0
    seed: int = 0
    destination_count: int | None = None


def generate(params: GeneratorParams) -> Instance:
    """Build a deterministic directed-grid instance.

    The grid has forward (left-to-right) arcs plus lateral arcs in both
    vertical directions; r is sampled uniformly in [0.5, 0.99] and every
    interdiction costs 1.  Scenarios are origin-destination pairs with
    verified connectivity and uniform probability.
    """
    if params.rows < 2 or params.cols < 2:
        raise InfeasibleParamsError("grid must be at least 2x2")
    if params.scenario_count < 1:
        raise InfeasibleParamsError("scenario_count must be >= 1")
    if not 0.0 <= params.q_factor < 1.0:
        raise InfeasibleParamsError("q_factor must be in [0, 1)")
    if params.q_mode not in ("factor", "zero", "mixed"):
        raise InfeasibleParamsError(f"unknown q_mode {params.q_mode!r}")
    rng = random.Random(params.seed)
    rows, cols = params.rows, params.cols

    def node(i: int, j: int) -> int:
        return i * cols + j

    pairs = []
    for i in range(rows):
        for j in range(cols):
            if j + 1 < cols:
                pairs.append((node(i, j), node(i, j + 1)))
            if i + 1 < rows:
                pairs.append((node(i, j), node(i + 1, j)))
                pairs.append((node(i + 1, j), node(i, j)))
    arcs = []
    for tail, head in pairs:
        r = round(rng.uniform(0.5, 0.99), 6)
        if rng.random() < params.interdictable_fraction:
            if params.q_mode == "factor":
                q = round(params.q_factor * r, 6)
            elif params.q_mode == "zero":
                q = 0.0
            else:
                q = round(params.q_factor * r, 6) if rng.random() < 0.5 else 0.0
            arcs.append(Arc(tail, head, r, q=q, cost=1.0))
        else:
            arcs.append(Arc(tail, head, r))
    network = Network(rows * cols, arcs)

    # candidate (s, t) pairs, origin strictly left of destination
    candidates = []
    for si in range(rows):
        for ti in range(rows):
            for sj in range(cols - 1):
                for tj in range(sj + 1, cols):
                    candidates.append((node(si, sj), node(ti, tj)))
    rng.shuffle(candidates)
    if params.destination_count is not None:
        dests = []
        for _, t in candidates:
            if t not in dests:
                dests.append(t)
            if len(dests) >= params.destination_count:
                break
        candidates = [(s, t) for s, t in candidates if t in dests]
    labels_cache: dict[int, np.ndarray] = {}
    chosen = []
    for s, t in candidates:
        if len(chosen) == params.scenario_count:
            break
        if t not in labels_cache:
            labels_cache[t] = reliability_values(network, network.r, t)
        if labels_cache[t][s] > 0.0:
            chosen.append((s, t))
    if len(chosen) < params.scenario_count:
        raise InfeasibleParamsError(
            f"only {len(chosen)} connected scenario pairs available"
        )
    p = 1.0 / params.scenario_count
    scenarios = [Scenario(s, t, p) for s, t in chosen]
    return Instance(network, scenarios, params.budget)


def _expected_reliability(instance: Instance, sigma: np.ndarray) -> float:
    values = {
        t: reliability_values(instance.network, sigma, t)
        for t in instance.destinations
    }
    return sum(sc.p * values[sc.t][sc.s] for sc in instance.scenarios)


def brute_force(
    instance: Instance, max_subsets: int = 2_000_000
) -> tuple[float, tuple[int, ...]]:
    """Exhaustive minimum over budget-feasible interdiction sets.

    Returns the optimal expected attacker reliability and the interdicted arc
    ids of one optimal plan (the lexicographically smallest characteristic
    vector among exact ties).  Guarded: raises :class:`TooLargeError` when the
    enumeration would be intractable.
    """
    network = instance.network
    d = network.interdictable_ids
    if len(d) > 25:
        raise TooLargeError(f"|D|={len(d)} exceeds the brute-force guard")
    costs = instance.costs
    best = [np.inf, ()]
    counter = [0]
    x = np.zeros(len(d))

    def evaluate():
        counter[0] += 1
        if counter[0] > max_subsets:
            raise TooLargeError("feasible interdiction sets exceed enumeration cap")
        obj = _expected_reliability(instance, plan_sigma(network, x))
        if obj < best[0]:
            best[0] = obj
            best[1] = tuple(d[k] for k in range(len(d)) if x[k] > 0.5)

    def recurse(pos: int, remaining: float):
        if pos == len(d):
            evaluate()
            return
        # x=0 branch first: enumeration order is lexicographic in x
        recurse(pos + 1, remaining)
        if costs[pos] <= remaining + 1e-9:
            x[pos] = 1.0
            recurse(pos + 1, remaining - costs[pos])
            x[pos] = 0.0

    recurse(0, instance.budget)
    return float(best[0]), best[1]
