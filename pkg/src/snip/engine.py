"""Linear programming core and a branch-and-cut framework with lazy cuts.

The LP layer wraps scipy's HiGHS solver behind a small row/column model; the
branch-and-bound loop, cut management, and incumbent handling are implemented
here.  Row duals follow the dObj/dRhs convention: >= rows have nonnegative
duals, <= rows nonpositive ones (minimization).
"""

from __future__ import annotations

import heapq
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

__all__ = [
    "LinearModel",
    "LpSolution",
    "Cut",
    "SolveResult",
    "BranchAndCutOptions",
    "solve_lp",
    "branch_and_cut",
]

FEAS_TOL = 1e-7
INT_TOL = 1e-6
CUT_VIOLATION_TOL = 1e-6


class LinearModel:
    """A sparse mixed-binary minimization model.

    Variables carry bounds, an objective coefficient, and an integrality flag;
    rows are sparse with sense in {">=", "<=", "="}.
    """

    def __init__(self):
        self.obj: list[float] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.is_integer: list[bool] = []
        self.names: list[str] = []
        self.rows: list[dict[int, float]] = []
        self.senses: list[str] = []
        self.rhs: list[float] = []

    @property
    def num_vars(self) -> int:
        return len(self.obj)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def add_variable(
        self,
        lb: float = 0.0,
        ub: float = np.inf,
        obj: float = 0.0,
        integer: bool = False,
        name: str = "",
    ) -> int:
        if lb > ub:
            raise ValueError(f"variable bounds crossed: [{lb}, {ub}]")
        self.obj.append(float(obj))
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.is_integer.append(integer)
        self.names.append(name or f"x{len(self.obj) - 1}")
        return len(self.obj) - 1

    def add_row(self, coeffs: dict[int, float], sense: str, rhs: float) -> int:
        if sense not in (">=", "<=", "="):
            raise ValueError(f"bad sense {sense!r}")
        for idx, c in coeffs.items():
            if not 0 <= idx < self.num_vars:
                raise ValueError(f"row references unknown variable {idx}")
            if not np.isfinite(c):
                raise ValueError("non-finite row coefficient")
        self.rows.append(dict(coeffs))
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        return len(self.rows) - 1

    def add_cut(self, cut: "Cut") -> int:
        return self.add_row(dict(cut.coeffs), cut.sense, cut.rhs)

    def dump(self) -> str:
        """Human-readable inequality listing (diagnostic only)."""
        lines = [
            "min "
            + " + ".join(
                f"{c:g}*{self.names[j]}" for j, c in enumerate(self.obj) if c != 0.0
            )
        ]
        for row, sense, rhs in zip(self.rows, self.senses, self.rhs):
            expr = " + ".join(f"{c:g}*{self.names[j]}" for j, c in sorted(row.items()))
            lines.append(f"  {expr} {sense} {rhs:g}")
        for j in range(self.num_vars):
            kind = "bin" if self.is_integer[j] else "cont"
            lines.append(f"  {self.lb[j]:g} <= {self.names[j]} <= {self.ub[j]:g} [{kind}]")
        return "\n".join(lines)


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    objective: float = np.nan
    lower_marginals: np.ndarray | None = None
    upper_marginals: np.ndarray | None = None


@dataclass(frozen=True)
class Cut:
    """A sparse linear inequality over model variables with provenance."""

    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    provenance: str
    scenario: int | None = None

    @staticmethod
    def make(coeffs: dict[int, float], sense: str, rhs: float, provenance: str,
             scenario: int | None = None) -> "Cut":
        items = tuple(sorted((j, float(c)) for j, c in coeffs.items() if c != 0.0))
        return Cut(items, sense, float(rhs), provenance, scenario)

    def violation(self, x: np.ndarray) -> float:
        """Positive when ``x`` violates the cut."""
        lhs = sum(c * x[j] for j, c in self.coeffs)
        if self.sense == ">=":
            return self.rhs - lhs
        if self.sense == "<=":
            return lhs - self.rhs
        return abs(lhs - self.rhs)

    def key(self) -> tuple:
        """Dedup key: scenario, support, coefficients rounded to 1e-12."""
        return (
            self.scenario,
            self.sense,
            round(self.rhs / 1e-12),
            tuple((j, round(c / 1e-12)) for j, c in self.coeffs),
        )


@dataclass
class SolveResult:
    status: str  # optimal | limit | infeasible
    objective: float
    bound: float
    gap: float
    plan: tuple[int, ...]
    x: dict[int, float] = field(default_factory=dict)
    nodes: int = 0
    cuts_added: Counter = field(default_factory=Counter)
    time_total: float = 0.0
    time_cutgen: float = 0.0
    time_lp: float = 0.0
    root_value: float = np.nan


@dataclass
class BranchAndCutOptions:
    gap_tol: float = 1e-4
    time_limit: float = 3600.0
    node_limit: int | None = None
    integrality_tol: float = INT_TOL
    cut_violation_tol: float = CUT_VIOLATION_TOL


def solve_lp(model: LinearModel, bound_overrides: dict[int, tuple[float, float]] | None = None) -> LpSolution:
    """Solve the LP relaxation of ``model`` with HiGHS.

    ``bound_overrides`` maps variable index to replacement (lb, ub); used by
    the branch-and-bound loop for branching decisions.
    """
    n = model.num_vars
    lb = np.array(model.lb)
    ub = np.array(model.ub)
    if bound_overrides:
        for j, (lo, hi) in bound_overrides.items():
            lb[j], ub[j] = lo, hi
    ub_rows, ub_rhs, ub_ids, ub_sign = [], [], [], []
    eq_rows, eq_rhs, eq_ids = [], [], []
    for k, (row, sense, rhs) in enumerate(zip(model.rows, model.senses, model.rhs)):
        if sense == "=":
            eq_rows.append(row)
            eq_rhs.append(rhs)
            eq_ids.append(k)
        elif sense == "<=":
            ub_rows.append(row)
            ub_rhs.append(rhs)
            ub_ids.append(k)
            ub_sign.append(1.0)
        else:  # >= becomes -row <= -rhs
            ub_rows.append({j: -c for j, c in row.items()})
            ub_rhs.append(-rhs)
            ub_ids.append(k)
            ub_sign.append(-1.0)

    def to_matrix(rows):
        data, ri, ci = [], [], []
        for i, row in enumerate(rows):
            for j, c in row.items():
                ri.append(i)
                ci.append(j)
                data.append(c)
        return sp.csr_matrix((data, (ri, ci)), shape=(len(rows), n))

    res = linprog(
        c=np.array(model.obj),
        A_ub=to_matrix(ub_rows) if ub_rows else None,
        b_ub=np.array(ub_rhs) if ub_rows else None,
        A_eq=to_matrix(eq_rows) if eq_rows else None,
        b_eq=np.array(eq_rhs) if eq_rows else None,
        bounds=np.column_stack([lb, ub]),
        method="highs",
    )
    if res.status == 2:
        return LpSolution(status="infeasible")
    if res.status == 3:
        return LpSolution(status="unbounded")
    if res.status != 0:
        raise RuntimeError(f"LP solve failed: {res.message}")
    duals = np.zeros(model.num_rows)
    if ub_rows:
        for i, k in enumerate(ub_ids):
            duals[k] = ub_sign[i] * res.ineqlin.marginals[i]
    for i, k in enumerate(eq_ids):
        duals[k] = res.eqlin.marginals[i]
    return LpSolution(
        status="optimal",
        x=res.x,
        duals=duals,
        objective=float(res.fun),
        lower_marginals=res.lower.marginals,
        upper_marginals=res.upper.marginals,
    )


def _relative_gap(objective: float, bound: float) -> float:
    if not (np.isfinite(objective) and np.isfinite(bound)):
        return np.inf
    return (objective - bound) / max(abs(objective), 1e-10)


def branch_and_cut(
    model: LinearModel,
    lazy_separator=None,
    options: BranchAndCutOptions | None = None,
) -> SolveResult:
    """Best-bound branch-and-bound with lazy cuts at integer points.

    ``lazy_separator(x, is_integer) -> list[Cut]`` is invoked at every node
    solution whose integer variables are integral; violated returned cuts are
    appended to the model and the node LP re-solved.  An incumbent is accepted
    only when the separator returns no violated cut.
    """
    opts = options or BranchAndCutOptions()
    start = time.perf_counter()
    time_lp = [0.0]
    time_cutgen = [0.0]
    cuts_added: Counter = Counter()
    seen_cuts: set = set()
    int_vars = [j for j in range(model.num_vars) if model.is_integer[j]]

    def timed_lp(overrides):
        t0 = time.perf_counter()
        sol = solve_lp(model, overrides)
        time_lp[0] += time.perf_counter() - t0
        return sol

    incumbent_obj = np.inf
    incumbent_x: np.ndarray | None = None
    node_counter = 0
    tie = 0
    # heap entries: (parent bound estimate, tiebreak, bound overrides)
    heap: list[tuple[float, int, dict]] = [(-np.inf, tie, {})]
    hit_limit = False
    pruned_bound = np.inf  # weakest bound among nodes pruned by the gap rule

    def out_of_budget() -> bool:
        if time.perf_counter() - start > opts.time_limit:
            return True
        if opts.node_limit is not None and node_counter >= opts.node_limit:
            return True
        return False

    def fractional(x):
        return [
            j for j in int_vars if abs(x[j] - round(x[j])) > opts.integrality_tol
        ]

    final_bound = None
    while heap:
        est, _, overrides = heapq.heappop(heap)
        best_open = min([est] + [e for e, _, _ in heap])
        if _relative_gap(incumbent_obj, best_open) <= opts.gap_tol:
            final_bound = min(best_open, pruned_bound, incumbent_obj)
            break
        if out_of_budget():
            heapq.heappush(heap, (est, tie + 1, overrides))
            hit_limit = True
            break
        node_counter += 1
        # cut loop: separate at integral solutions until clean, then bound
        while True:
            sol = timed_lp(overrides)
            if sol.status == "unbounded":
                raise RuntimeError("node LP unbounded; model is malformed")
            if sol.status != "optimal":
                sol = None
                break
            # tight pruning (not gap-relative): keeps incumbents exact so the
            # final objective matches enumeration at desk scale
            if sol.objective >= incumbent_obj - 1e-9:
                pruned_bound = min(pruned_bound, sol.objective)
                sol = None  # prune by bound
                break
            if fractional(sol.x) or lazy_separator is None:
                break
            t0 = time.perf_counter()
            candidates = lazy_separator(sol.x, True)
            time_cutgen[0] += time.perf_counter() - t0
            added = 0
            for cut in candidates:
                if cut.violation(sol.x) <= opts.cut_violation_tol:
                    continue
                key = cut.key()
                if key in seen_cuts:
                    continue
                seen_cuts.add(key)
                model.add_cut(cut)
                cuts_added[cut.provenance] += 1
                added += 1
            if added == 0:
                break
        if sol is None:
            continue
        frac = fractional(sol.x)
        if not frac:
            if sol.objective < incumbent_obj:
                incumbent_obj = sol.objective
                incumbent_x = sol.x.copy()
            continue
        # branch on the most fractional integer variable, smallest index on ties
        _, jbr = min((abs(sol.x[j] - np.floor(sol.x[j]) - 0.5), j) for j in frac)
        lo = float(np.floor(sol.x[jbr]))
        for lbx, ubx in ((model.lb[jbr], lo), (lo + 1.0, model.ub[jbr])):
            child = dict(overrides)
            child[jbr] = (lbx, ubx)
            tie += 1
            heapq.heappush(heap, (sol.objective, tie, child))

    if final_bound is None:
        open_bound = min((e for e, _, _ in heap), default=np.inf)
        final_bound = min(open_bound, pruned_bound, incumbent_obj)
    bound = final_bound
    if incumbent_x is None:
        status = "limit" if hit_limit else "infeasible"
        objective = np.inf
        x_map = {}
        plan = ()
        if status == "infeasible":
            bound = np.inf
    else:
        status = "limit" if hit_limit else "optimal"
        objective = incumbent_obj
        x_map = {j: float(incumbent_x[j]) for j in range(model.num_vars)}
        plan = tuple(j for j in int_vars if incumbent_x[j] > 0.5)
    gap = _relative_gap(objective, bound)
    return SolveResult(
        status=status,
        objective=objective,
        bound=bound,
        gap=max(gap, 0.0),
        plan=plan,
        x=x_map,
        nodes=node_counter,
        cuts_added=cuts_added,
        time_total=time.perf_counter() - start,
        time_cutgen=time_cutgen[0],
        time_lp=time_lp[0],
    )
