"""Deterministic equivalent formulations of the interdiction problem.

Two mixed-binary builders: the scenario-expanded model (one block of
reachability variables per scenario) and the compact model (one block per
distinct destination).  Both share the x binaries and the budget row; the
destination value variable is fixed to 1 through its bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import BranchAndCutOptions, LinearModel, SolveResult, branch_and_cut, solve_lp
from .instances import Instance

__all__ = [
    "DefModelMap",
    "build_def",
    "build_compact_def",
    "lp_relaxation_value",
    "solve_def",
    "solve_compact_def",
]


@dataclass
class DefModelMap:
    """Variable/row bookkeeping for a deterministic equivalent model.

    ``pi`` maps (node, block) to a variable index, where the block key is the
    scenario index for the expanded model and the destination node for the
    compact one.
    """

    x: dict[int, int] = field(default_factory=dict)  # arc id -> var
    pi: dict[tuple[int, object], int] = field(default_factory=dict)
    budget_row: int = -1
    rows_pi1: dict[tuple[int, object], int] = field(default_factory=dict)
    rows_pi2: dict[tuple[int, object], int] = field(default_factory=dict)
    rows_pi3: dict[tuple[int, object], int] = field(default_factory=dict)


def _build(instance: Instance, blocks: list[tuple[object, int, dict[int, float]]]):
    """Shared builder.

    ``blocks`` lists (block key, destination, objective weight per origin
    node); one full copy of the reachability rows is emitted per block.
    """
    network = instance.network
    model = LinearModel()
    mapping = DefModelMap()
    for aid in network.interdictable_ids:
        mapping.x[aid] = model.add_variable(0.0, 1.0, 0.0, integer=True, name=f"x_{aid}")
    mapping.budget_row = model.add_row(
        {mapping.x[a]: instance.network.arcs[a].cost for a in network.interdictable_ids},
        "<=",
        instance.budget,
    )
    for key, t, weights in blocks:
        u = instance.u[t]
        for i in range(network.node_count):
            if i == t:
                lb = ub = 1.0
            else:
                lb, ub = 0.0, float(u[i])
            obj = weights.get(i, 0.0)
            mapping.pi[(i, key)] = model.add_variable(lb, ub, obj, name=f"pi_{i}_{key}")
        for aid, arc in enumerate(network.arcs):
            vi = mapping.pi[(arc.tail, key)]
            vj = mapping.pi[(arc.head, key)]
            if not arc.interdictable:
                mapping.rows_pi1[(aid, key)] = model.add_row(
                    {vi: 1.0, vj: -arc.r}, ">=", 0.0
                )
            else:
                big_m = (arc.r - arc.q) * float(u[arc.head])
                mapping.rows_pi2[(aid, key)] = model.add_row(
                    {vi: 1.0, vj: -arc.r, mapping.x[aid]: big_m}, ">=", 0.0
                )
                mapping.rows_pi3[(aid, key)] = model.add_row(
                    {vi: 1.0, vj: -arc.q}, ">=", 0.0
                )
    return model, mapping


def build_def(instance: Instance) -> tuple[LinearModel, DefModelMap]:
    """Scenario-expanded deterministic equivalent model."""
    blocks = [
        (k, sc.t, {sc.s: sc.p}) for k, sc in enumerate(instance.scenarios)
    ]
    return _build(instance, blocks)


def build_compact_def(instance: Instance) -> tuple[LinearModel, DefModelMap]:
    """Compact model: one reachability block per distinct destination."""
    blocks = []
    for t in instance.destinations:
        weights: dict[int, float] = {}
        for sc in instance.scenarios:
            if sc.t == t:
                weights[sc.s] = weights.get(sc.s, 0.0) + sc.p
        blocks.append((t, t, weights))
    return _build(instance, blocks)


def lp_relaxation_value(model: LinearModel) -> float:
    """Optimal value with integrality dropped."""
    sol = solve_lp(model)
    if sol.status != "optimal":
        raise RuntimeError(f"LP relaxation is {sol.status}")
    return sol.objective


def _solve(instance, builder, options):
    model, mapping = builder(instance)
    result = branch_and_cut(model, None, options)
    arc_of_var = {v: a for a, v in mapping.x.items()}
    result.plan = tuple(sorted(arc_of_var[v] for v in result.plan))
    return result


def solve_def(instance: Instance, options: BranchAndCutOptions | None = None) -> SolveResult:
    return _solve(instance, build_def, options)


def solve_compact_def(
    instance: Instance, options: BranchAndCutOptions | None = None
) -> SolveResult:
    return _solve(instance, build_compact_def, options)
