"""Benders decomposition on the scenario-expanded deterministic equivalent.

The master keeps the interdiction binaries plus one epigraph variable per
scenario; scenario subproblems price the attacker's best response at a fixed
(possibly fractional) plan and return a dual point whose optimality cut is
tight there.  The subproblem can be evaluated two ways: a direct LP on the
reachability rows, or a label-setting recursion that builds the same dual
point by walking the argmax path with prefix products.  The recursion is the
default; the LP is kept as a cross-check and benchmark foil.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import (
    BranchAndCutOptions,
    Cut,
    LinearModel,
    SolveResult,
    branch_and_cut,
    solve_lp,
)
from .instances import Instance, Scenario

__all__ = [
    "BendersMaster",
    "DualPoint",
    "subproblem_lp",
    "subproblem_dp",
    "benders_cut",
    "benders_root_loop",
    "solve_benders",
]

VIOLATION_TOL = 1e-6


class IterationLimitError(Exception):
    """Root cutting loop failed to converge; indicates numerical stalling."""


@dataclass
class DualPoint:
    """A feasible point of the scenario subproblem's dual.

    ``y`` and ``z`` hold per-arc flow values (z only on interdictable arcs);
    ``y_t`` is the dual of the destination-fixing row.
    """

    scenario: int
    y: dict[int, float]
    z: dict[int, float]
    y_t: float


@dataclass
class BendersMaster:
    model: LinearModel
    x: dict[int, int]  # arc id -> var
    theta: list[int]  # scenario index -> var
    pool_keys: set = field(default_factory=set)
    cuts: list[Cut] = field(default_factory=list)


def build_master(instance: Instance) -> BendersMaster:
    model = LinearModel()
    x = {}
    for aid in instance.network.interdictable_ids:
        x[aid] = model.add_variable(0.0, 1.0, 0.0, integer=True, name=f"x_{aid}")
    theta = []
    for k, sc in enumerate(instance.scenarios):
        ub = float(instance.u[sc.t][sc.s])
        theta.append(model.add_variable(0.0, ub, sc.p, name=f"theta_{k}"))
    model.add_row(
        {x[a]: instance.network.arcs[a].cost for a in instance.network.interdictable_ids},
        "<=",
        instance.budget,
    )
    return BendersMaster(model=model, x=x, theta=theta)


def _subproblem_model(instance: Instance, scenario: Scenario, xbar):
    """LP over the reachability rows at a fixed plan."""
    network = instance.network
    u = instance.u[scenario.t]
    model = LinearModel()
    pi = [model.add_variable(-np.inf, np.inf, 0.0, name=f"pi_{i}") for i in range(network.node_count)]
    model.obj[pi[scenario.s]] = 1.0
    y_rows, z_rows = {}, {}
    for aid, arc in enumerate(network.arcs):
        if not arc.interdictable:
            y_rows[aid] = model.add_row({pi[arc.tail]: 1.0, pi[arc.head]: -arc.r}, ">=", 0.0)
        else:
            xa = float(xbar[network.d_pos[aid]])
            rhs = -(arc.r - arc.q) * float(u[arc.head]) * xa
            y_rows[aid] = model.add_row({pi[arc.tail]: 1.0, pi[arc.head]: -arc.r}, ">=", rhs)
            z_rows[aid] = model.add_row({pi[arc.tail]: 1.0, pi[arc.head]: -arc.q}, ">=", 0.0)
    t_row = model.add_row({pi[scenario.t]: 1.0}, "=", 1.0)
    return model, y_rows, z_rows, t_row


def subproblem_lp(
    instance: Instance, scenario_index: int, xbar
) -> tuple[float, DualPoint]:
    """Attacker's best-response value and a dual-optimal point, via LP."""
    scenario = instance.scenarios[scenario_index]
    model, y_rows, z_rows, t_row = _subproblem_model(instance, scenario, xbar)
    sol = solve_lp(model)
    if sol.status != "optimal":
        raise RuntimeError(f"scenario subproblem is {sol.status}")
    y = {a: float(sol.duals[row]) for a, row in y_rows.items()}
    z = {a: float(sol.duals[row]) for a, row in z_rows.items()}
    return sol.objective, DualPoint(
        scenario=scenario_index, y=y, z=z, y_t=float(sol.duals[t_row])
    )


def subproblem_dp(
    instance: Instance, scenario_index: int, xbar
) -> tuple[float, DualPoint]:
    """Attacker's best-response value via label setting.

    The recursion mirrors the reachability rows: extending a label across an
    interdictable arc takes the better of the penalized full-reliability
    branch and the interdicted branch.  The dual point is assembled by walking
    the argmax path from the origin and carrying the product of the chosen
    branch coefficients.
    """
    network = instance.network
    scenario = instance.scenarios[scenario_index]
    u = instance.u[scenario.t]
    n = network.node_count
    pi = np.zeros(n)
    choice: list[tuple[int, str] | None] = [None] * n
    done = np.zeros(n, dtype=bool)
    pi[scenario.t] = 1.0
    heap = [(-1.0, scenario.t)]
    while heap:
        negval, j = heapq.heappop(heap)
        if done[j]:
            continue
        done[j] = True
        pj = -negval
        for aid in network.in_arcs(j):
            arc = network.arcs[aid]
            i = arc.tail
            if done[i]:
                continue
            if arc.interdictable:
                xa = float(xbar[network.d_pos[aid]])
                r_branch = arc.r * pj - (arc.r - arc.q) * float(u[j]) * xa
                q_branch = arc.q * pj
                if r_branch >= q_branch:
                    cand, branch = r_branch, "r"
                else:
                    cand, branch = q_branch, "q"
            else:
                cand, branch = arc.r * pj, "r"
            # first arrival must be recorded even at value 0 (fully interdicted
            # q=0 routes) so the dual walk below always has a successor chain
            if cand > pi[i] or (
                cand == pi[i]
                and (choice[i] is None or aid < choice[i][0])
            ):
                pi[i] = cand
                choice[i] = (aid, branch)
                heapq.heappush(heap, (-cand, i))
    # walk the argmax path, carrying the prefix product of branch coefficients
    y: dict[int, float] = {}
    z: dict[int, float] = {}
    flow = 1.0
    node = scenario.s
    while node != scenario.t:
        if choice[node] is None:
            raise RuntimeError(f"no argmax path from {scenario.s} to {scenario.t}")
        aid, branch = choice[node]
        arc = network.arcs[aid]
        if branch == "r":
            y[aid] = flow
            flow *= arc.r
        else:
            z[aid] = flow
            flow *= arc.q
        node = arc.head
    return float(pi[scenario.s]), DualPoint(
        scenario=scenario_index, y=y, z=z, y_t=flow
    )


def benders_cut(dual: DualPoint, instance: Instance, master: BendersMaster) -> Cut:
    """Optimality cut induced by a dual point."""
    scenario = instance.scenarios[dual.scenario]
    u = instance.u[scenario.t]
    coeffs = {master.theta[dual.scenario]: 1.0}
    for aid, yval in dual.y.items():
        arc = instance.network.arcs[aid]
        if not arc.interdictable or yval == 0.0:
            continue
        coeffs[master.x[aid]] = (arc.r - arc.q) * float(u[arc.head]) * yval
    return Cut.make(coeffs, ">=", dual.y_t, "benders", scenario=dual.scenario)


def _add_if_new(master: BendersMaster, cut: Cut) -> bool:
    key = cut.key()
    if key in master.pool_keys:
        return False
    master.pool_keys.add(key)
    master.model.add_cut(cut)
    master.cuts.append(cut)
    return True


def benders_root_loop(
    instance: Instance,
    master: BendersMaster | None = None,
    subproblem=subproblem_dp,
    max_passes: int = 10000,
    stats: dict | None = None,
    time_limit: float = float("inf"),
) -> tuple[BendersMaster, float]:
    """Cutting-plane loop on the LP relaxation of the master.

    Separation is restricted to the scenarios that yielded cuts in the last
    pass; when that list comes up dry it is refreshed to all scenarios, and
    the loop stops once a full pass over all scenarios finds no violation.
    """
    master = master or build_master(instance)
    nscen = len(instance.scenarios)
    active = list(range(nscen))
    root_value = np.nan
    stats = stats if stats is not None else {}
    stats.setdefault("cutgen_time", 0.0)
    stats.setdefault("cuts", 0)
    start = time.perf_counter()
    for _ in range(max_passes):
        if time.perf_counter() - start > time_limit:
            break
        sol = solve_lp(master.model)
        if sol.status != "optimal":
            raise RuntimeError(f"Benders master LP is {sol.status}")
        root_value = sol.objective
        xbar = np.array([sol.x[master.x[a]] for a in instance.network.interdictable_ids])

        def separate(scenario_list):
            yielded = []
            for k in scenario_list:
                t0 = time.perf_counter()
                value, dual = subproblem(instance, k, xbar)
                cut = benders_cut(dual, instance, master)
                stats["cutgen_time"] += time.perf_counter() - t0
                if value - sol.x[master.theta[k]] > VIOLATION_TOL and _add_if_new(
                    master, cut
                ):
                    stats["cuts"] += 1
                    yielded.append(k)
            return yielded

        yielded = separate(active)
        if not yielded and len(active) < nscen:
            yielded = separate([k for k in range(nscen) if k not in set(active)])
            yielded = sorted(set(yielded))
        if not yielded:
            if len(active) == nscen:
                return master, root_value
            active = list(range(nscen))
        else:
            active = yielded
    else:
        raise IterationLimitError(f"no convergence after {max_passes} passes")
    return master, root_value


def solve_benders(
    instance: Instance,
    options: BranchAndCutOptions | None = None,
    subproblem=subproblem_dp,
    master: BendersMaster | None = None,
) -> SolveResult:
    """Root cutting loop, then branch-and-cut with lazy cuts at integer points.

    Passing ``master`` lets callers keep a handle on the model, e.g. to audit
    the cut rows added during the run.
    """
    opts = options or BranchAndCutOptions()
    stats: dict = {}
    start = time.perf_counter()
    master, root_value = benders_root_loop(
        instance,
        master=master,
        subproblem=subproblem,
        stats=stats,
        time_limit=opts.time_limit,
    )
    remaining = opts.time_limit - (time.perf_counter() - start)
    opts = replace(opts, time_limit=remaining)
    d_arcs = instance.network.interdictable_ids

    def separator(x, is_integer):
        xbar = np.array([x[master.x[a]] for a in d_arcs])
        cuts = []
        for k in range(len(instance.scenarios)):
            value, dual = subproblem(instance, k, xbar)
            if value - x[master.theta[k]] > VIOLATION_TOL:
                cuts.append(benders_cut(dual, instance, master))
        return cuts

    result = branch_and_cut(master.model, separator, opts)
    arc_of_var = {v: a for a, v in master.x.items()}
    result.plan = tuple(sorted(arc_of_var[v] for v in result.plan))
    result.root_value = root_value
    result.time_cutgen += stats["cutgen_time"]
    result.cuts_added["benders"] += stats["cuts"]
    return result
