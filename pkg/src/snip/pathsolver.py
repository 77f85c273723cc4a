"""Path-based branch-and-cut built on the single-path cut families.

The master carries only the interdiction binaries and one epigraph variable
per distinct origin/destination pair; reachability structure enters solely
through cutting planes generated from most-reliable paths.  The root loop
separates at fractional plans using relaxed arc reliabilities, then the tree
search adds exact cuts at integer plans.
"""

from __future__ import annotations

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
from .graph import (
    NoPathError,
    extract_path,
    fractional_sigma,
    max_reliability_labels,
    plan_sigma,
)
from .instances import Instance
from .pathcuts import PathCut, PathFunction, separate_fractional, separate_integer

__all__ = [
    "PathMaster",
    "build_path_master",
    "power_sigma",
    "path_root_loop",
    "solve_path",
]

VIOLATION_TOL = 1e-6


@dataclass
class PathMaster:
    model: LinearModel
    x: dict[int, int]  # arc id -> var
    pairs: list[tuple[int, int]]  # distinct (origin, destination)
    pi: list[int]  # pair index -> epigraph var
    pool_keys: set = field(default_factory=set)


def build_path_master(instance: Instance) -> PathMaster:
    """Master with x binaries, budget row, and one epigraph var per pair."""
    model = LinearModel()
    x = {}
    for aid in instance.network.interdictable_ids:
        x[aid] = model.add_variable(0.0, 1.0, 0.0, integer=True, name=f"x_{aid}")
    model.add_row(
        {x[a]: instance.network.arcs[a].cost for a in instance.network.interdictable_ids},
        "<=",
        instance.budget,
    )
    weights: dict[tuple[int, int], float] = {}
    for sc in instance.scenarios:
        weights[(sc.s, sc.t)] = weights.get((sc.s, sc.t), 0.0) + sc.p
    pairs = sorted(weights)
    pi = []
    for s, t in pairs:
        ub = float(instance.u[t][s])
        pi.append(model.add_variable(0.0, ub, weights[(s, t)], name=f"pi_{s}_{t}"))
    return PathMaster(model=model, x=x, pairs=pairs, pi=pi)


def power_sigma(network, x) -> np.ndarray:
    """Geometric-interpolation arc reliabilities for fractional plans."""
    sigma = network.r.copy()
    for pos, aid in enumerate(network.interdictable_ids):
        xa = float(x[pos])
        if xa > 0.0:
            arc = network.arcs[aid]
            sigma[aid] = arc.r ** (1.0 - xa) * arc.q**xa
    return sigma


def _master_cut(master: PathMaster, pair_index: int, cut: PathCut) -> Cut:
    """Translate a single-path inequality onto master variables."""
    coeffs = {master.pi[pair_index]: 1.0}
    for aid, c in cut.coeffs:
        coeffs[master.x[aid]] = -c
    return Cut.make(coeffs, ">=", cut.const, cut.provenance, scenario=pair_index)


def _add_if_new(master: PathMaster, cut: Cut) -> bool:
    key = cut.key()
    if key in master.pool_keys:
        return False
    master.pool_keys.add(key)
    master.model.add_cut(cut)
    return True


def _sigma_candidates(network, xvec, frac_sigma: str):
    if frac_sigma == "convex":
        return [fractional_sigma(network, xvec)]
    if frac_sigma == "power":
        return [power_sigma(network, xvec)]
    if frac_sigma == "both":
        return [fractional_sigma(network, xvec), power_sigma(network, xvec)]
    raise ValueError(f"unknown frac_sigma mode {frac_sigma!r}")


def path_root_loop(
    instance: Instance,
    master: PathMaster | None = None,
    frac_sigma: str = "convex",
    max_passes: int = 10000,
    stats: dict | None = None,
    time_limit: float = float("inf"),
) -> tuple[PathMaster, float]:
    """Cutting-plane loop on the LP relaxation of the path master.

    Separation is restricted to the pairs that yielded cuts on the previous
    pass; a dry pass widens back to all pairs, and the loop ends once a full
    pass finds nothing violated.
    """
    network = instance.network
    master = master or build_path_master(instance)
    npairs = len(master.pairs)
    active = list(range(npairs))
    root_value = np.nan
    stats = stats if stats is not None else {}
    stats.setdefault("cutgen_time", 0.0)
    stats.setdefault("cuts", {})
    stats.setdefault("label_runs", 0)
    d_arcs = network.interdictable_ids
    start = time.perf_counter()
    for _ in range(max_passes):
        if time.perf_counter() - start > time_limit:
            break
        sol = solve_lp(master.model)
        if sol.status != "optimal":
            raise RuntimeError(f"path master LP is {sol.status}")
        root_value = sol.objective
        xvec = np.array([sol.x[master.x[a]] for a in d_arcs])
        xdict = {a: xvec[i] for i, a in enumerate(d_arcs)}

        def separate(pair_list):
            t0 = time.perf_counter()
            yielded = []
            for sigma in _sigma_candidates(network, xvec, frac_sigma):
                labels = {}
                for k in pair_list:
                    s, t = master.pairs[k]
                    if t not in labels:
                        labels[t] = max_reliability_labels(network, sigma, t)
                        stats["label_runs"] += 1
                    lab = labels[t]
                    pibar = float(sol.x[master.pi[k]])
                    if lab.pi[s] <= pibar + VIOLATION_TOL:
                        continue
                    try:
                        path = extract_path(network, lab, s)
                    except NoPathError:
                        continue
                    pf = PathFunction.from_path(network, path)
                    for cut in separate_fractional(pf, xdict, pibar):
                        if _add_if_new(master, _master_cut(master, k, cut)):
                            stats["cuts"][cut.provenance] = (
                                stats["cuts"].get(cut.provenance, 0) + 1
                            )
                            if k not in yielded:
                                yielded.append(k)
            stats["cutgen_time"] += time.perf_counter() - t0
            return yielded

        yielded = separate(active)
        if not yielded and len(active) < npairs:
            yielded = separate([k for k in range(npairs) if k not in set(active)])
        if not yielded:
            if len(active) == npairs:
                return master, root_value
            active = list(range(npairs))
        else:
            active = sorted(set(yielded))
    return master, root_value


def solve_path(
    instance: Instance,
    options: BranchAndCutOptions | None = None,
    frac_sigma: str = "convex",
    master: PathMaster | None = None,
) -> SolveResult:
    """Root cutting loop, then branch-and-cut with exact cuts at integer plans.

    Passing ``master`` lets callers keep a handle on the model, e.g. to audit
    the cut rows added during the run.
    """
    opts = options or BranchAndCutOptions()
    network = instance.network
    stats: dict = {}
    start = time.perf_counter()
    master, root_value = path_root_loop(
        instance,
        master=master,
        frac_sigma=frac_sigma,
        stats=stats,
        time_limit=opts.time_limit,
    )
    remaining = opts.time_limit - (time.perf_counter() - start)
    opts = replace(opts, time_limit=remaining)
    d_arcs = network.interdictable_ids

    def separator(x, is_integer):
        xvec = np.array([x[master.x[a]] for a in d_arcs])
        xdict = {a: xvec[i] for i, a in enumerate(d_arcs)}
        sigma = plan_sigma(network, xvec)
        labels = {}
        cuts = []
        for k, (s, t) in enumerate(master.pairs):
            if t not in labels:
                labels[t] = max_reliability_labels(network, sigma, t)
                stats["label_runs"] += 1
            lab = labels[t]
            pibar = float(x[master.pi[k]])
            if lab.pi[s] <= pibar + VIOLATION_TOL:
                continue
            path = extract_path(network, lab, s)
            pf = PathFunction.from_path(network, path)
            for cut in separate_integer(pf, xdict, pibar):
                cuts.append(_master_cut(master, k, cut))
        return cuts

    result = branch_and_cut(master.model, separator, opts)
    arc_of_var = {v: a for a, v in master.x.items()}
    result.plan = tuple(sorted(arc_of_var[v] for v in result.plan))
    result.root_value = root_value
    result.time_cutgen += stats["cutgen_time"]
    for name, count in stats["cuts"].items():
        result.cuts_added[name] += count
    return result
