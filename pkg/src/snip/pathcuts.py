"""Valid inequalities for single-path reliability epigraphs.

A path's reliability, as a function of the interdicted arc set, is a
supermodular set function.  This module evaluates it, builds the classic
exponential family of supermodular inequalities, strengthens them with
subadditive lifting (computed by the two prefix-scan algorithms below), covers
the all-zero interdicted-probability case with the convex-hull inequality, and
handles paths mixing zero and positive interdicted probabilities through a
McCormick relaxation collapsed to a single surviving inequality.  Integer and
fractional separation routines sit on top.

Cut records are sparse over the interdictable arcs of the path; arcs off the
path always carry coefficient 0 and are never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MixedQError",
    "NotAllZeroError",
    "PathCut",
    "PathFunction",
    "LiftingContext",
    "h_value",
    "rho",
    "base_cut_9",
    "base_cut_10",
    "zeta",
    "phi",
    "xi",
    "psi",
    "lifted_cut_1",
    "lifted_cut_2",
    "q_zero_cut",
    "mixed_cut",
    "separate_integer",
    "separate_fractional",
]

VIOLATION_TOL = 1e-6
RHO_EPS = 1e-15  # marginal differences below this are treated as exact zeros


class MixedQError(Exception):
    """Lifted q>0 machinery invoked on a path with zero-q interdictable arcs."""


class NotAllZeroError(Exception):
    """Zero-q convex-hull cut invoked on a path with positive-q arcs."""


@dataclass(frozen=True)
class PathCut:
    """An inequality ``pi >= const + sum coeffs[a] * x_a`` for one path."""

    coeffs: tuple[tuple[int, float], ...]
    const: float
    provenance: str

    @staticmethod
    def make(coeffs: dict[int, float], const: float, provenance: str) -> "PathCut":
        items = tuple(sorted((a, float(c)) for a, c in coeffs.items()))
        return PathCut(items, float(const), provenance)

    def rhs_at(self, x) -> float:
        """Right-hand side value at a plan (mapping arc id -> value)."""
        return self.const + sum(c * float(x.get(a, 0.0)) for a, c in self.coeffs)

    def violation(self, x, pibar: float) -> float:
        return self.rhs_at(x) - pibar


class PathFunction:
    """The reliability of one path as a function of its interdicted arcs.

    ``inter`` lists (arc id, r, q) for the interdictable arcs on the path;
    ``r_rest`` is the product of r over the path's non-interdictable arcs.
    """

    def __init__(self, inter: list[tuple[int, float, float]], r_rest: float = 1.0):
        self.r_rest = float(r_rest)
        self.keys: tuple[int, ...] = tuple(a for a, _, _ in inter)
        self.r_of = {a: float(r) for a, r, _ in inter}
        self.q_of = {a: float(q) for a, _, q in inter}
        for a in self.keys:
            if not 0.0 < self.r_of[a] <= 1.0:
                raise ValueError(f"arc {a}: r out of (0, 1]")
            if not 0.0 <= self.q_of[a] < self.r_of[a]:
                raise ValueError(f"arc {a}: q out of [0, r)")
        self.plus = tuple(a for a in self.keys if self.q_of[a] > 0.0)
        self.zero = tuple(a for a in self.keys if self.q_of[a] == 0.0)
        self.alpha = {
            a: math.log(self.r_of[a]) - math.log(self.q_of[a]) for a in self.plus
        }
        # -log of the full path reliability with no interdiction
        self.beta = -math.log(self.r_rest) - sum(
            math.log(self.r_of[a]) for a in self.keys
        )

    @classmethod
    def from_path(cls, network, path) -> "PathFunction":
        inter = []
        r_rest = 1.0
        for aid in path.arcs:
            arc = network.arcs[aid]
            if arc.interdictable:
                inter.append((aid, arc.r, arc.q))
            else:
                r_rest *= arc.r
        return cls(inter, r_rest)

    def restricted_to_plus(self) -> "PathFunction":
        """The positive-q portion alone, with unit surrounding reliability."""
        return PathFunction(
            [(a, self.r_of[a], self.q_of[a]) for a in self.plus], r_rest=1.0
        )

    def r_product(self, arcs) -> float:
        out = 1.0
        for a in arcs:
            out *= self.r_of[a]
        return out


def h_value(pf: PathFunction, S) -> float:
    """Path reliability when the arcs in ``S`` are interdicted."""
    out = pf.r_rest
    for a in pf.keys:
        out *= pf.q_of[a] if a in S else pf.r_of[a]
    return out


def rho(pf: PathFunction, a: int, S) -> float:
    """Marginal change of the path reliability when ``a`` joins ``S``."""
    if a not in pf.r_of or a in S:
        base = h_value(pf, S)
        return 0.0 if a not in pf.r_of else h_value(pf, set(S) | {a}) - base
    return h_value(pf, set(S) | {a}) - h_value(pf, S)


def base_cut_9(pf: PathFunction, S) -> PathCut:
    """First supermodular inequality of the exponential family."""
    S = set(S) & set(pf.keys)
    full = set(pf.keys)
    coeffs = {}
    const = h_value(pf, S)
    for a in S:
        c = rho(pf, a, full - {a})
        coeffs[a] = c
        const -= c
    for a in full - S:
        coeffs[a] = rho(pf, a, S)
    return PathCut.make(coeffs, const, "base-9")


def base_cut_10(pf: PathFunction, S) -> PathCut:
    """Second supermodular inequality of the exponential family."""
    S = set(S) & set(pf.keys)
    coeffs = {}
    const = h_value(pf, S)
    for a in S:
        c = rho(pf, a, S - {a})
        coeffs[a] = c
        const -= c
    for a in set(pf.keys) - S:
        coeffs[a] = rho(pf, a, set())
    return PathCut.make(coeffs, const, "base-10")


class LiftingContext:
    """Ordering and prefix data shared by the two lifting scans.

    ``ground`` is the arc list being scanned (the path arcs outside S for the
    first lifting, S itself for the second), sorted by non-increasing alpha
    with ties toward the smaller arc id.  Arcs whose marginal difference is
    numerically zero are dropped from the scan.
    """

    def __init__(self, pf: PathFunction, S, ground, rho_values: dict[int, float]):
        if pf.zero:
            raise MixedQError("lifting requires q > 0 on every path arc")
        self.pf = pf
        self.S = set(S)
        order = sorted(ground, key=lambda a: (-pf.alpha[a], a))
        self.order = [a for a in order if abs(rho_values[a]) >= RHO_EPS]
        self.rho_values = rho_values
        self.alpha_S = sum(pf.alpha[a] for a in self.S)
        self.prefix_alpha = [0.0]
        self.prefix_rho = [0.0]
        for a in self.order:
            self.prefix_alpha.append(self.prefix_alpha[-1] + pf.alpha[a])
            self.prefix_rho.append(self.prefix_rho[-1] + rho_values[a])

    @classmethod
    def for_first_lifting(cls, pf: PathFunction, S) -> "LiftingContext":
        S = set(S) & set(pf.keys)
        ground = [a for a in pf.keys if a not in S]
        return cls(pf, S, ground, {a: rho(pf, a, S) for a in ground})

    @classmethod
    def for_second_lifting(cls, pf: PathFunction, S) -> "LiftingContext":
        S = set(S) & set(pf.keys)
        return cls(pf, S, list(S), {a: rho(pf, a, S - {a}) for a in S})


def zeta(ctx: LiftingContext, eta: float) -> tuple[float, int]:
    """Prefix scan for the first lifting function (eta <= 0)."""
    A = ctx.prefix_alpha
    m = len(ctx.order)
    k = 0
    while k < m and A[k] + eta < 0.0:
        k += 1
    value = (
        -math.exp(-ctx.alpha_S - A[k] - ctx.pf.beta - eta)
        + ctx.prefix_rho[k]
        + math.exp(-ctx.alpha_S - ctx.pf.beta)
    )
    return value, k


def phi(ctx: LiftingContext, eta: float) -> float:
    """Subadditive lifting coefficient for arcs inside the generating set.

    The scan value is replaced by a double-tangent line where eta falls in
    the bridge over the convex kink between exponential pieces k and k-1;
    that kink only exists for k >= 2 (at k = 1 the would-be kink is the
    domain boundary eta = 0 and the scan value is already the envelope).
    """
    value, k = zeta(ctx, eta)
    if k <= 1:
        return value
    a = ctx.order[k - 1]
    rho_k = ctx.rho_values[a]
    alpha_k = ctx.pf.alpha[a]
    A = ctx.prefix_alpha
    mu_k = -math.log(-rho_k / alpha_k) - ctx.alpha_S - ctx.pf.beta
    if mu_k - A[k] <= eta <= mu_k - A[k - 1]:
        b_k = mu_k - A[k - 1] - eta
        return zeta(ctx, mu_k - A[k - 1])[0] + rho_k * b_k / alpha_k
    return value


def xi(ctx: LiftingContext, eta: float) -> tuple[float, int]:
    """Prefix scan for the second lifting function (eta >= 0)."""
    A = ctx.prefix_alpha
    n = len(ctx.order)
    k = 0
    while k < n and A[k] < eta:
        k += 1
    value = (
        -math.exp(-ctx.alpha_S + A[k] - ctx.pf.beta - eta)
        - ctx.prefix_rho[k]
        + math.exp(-ctx.alpha_S - ctx.pf.beta)
    )
    return value, k


def psi(ctx: LiftingContext, eta: float) -> float:
    """Subadditive lifting coefficient for arcs outside the generating set.

    Mirror of :func:`phi`: the linear piece is the double tangent over the
    interior kink between pieces k-1 and k, so it applies only for k >= 2.
    The tangency point nu_k reduces to log((exp(alpha_k) - 1) / alpha_k).
    """
    value, k = xi(ctx, eta)
    if k <= 1:
        return value
    a = ctx.order[k - 1]
    rho_k = ctx.rho_values[a]
    alpha_k = ctx.pf.alpha[a]
    A = ctx.prefix_alpha
    nu_k = ctx.alpha_S + math.log(-rho_k / alpha_k) + ctx.pf.beta
    if A[k - 1] - nu_k <= eta <= A[k] - nu_k:
        b_k = A[k] - nu_k - eta
        return xi(ctx, A[k] - nu_k)[0] + rho_k * b_k / alpha_k
    return value


def lifted_cut_1(pf: PathFunction, S) -> PathCut:
    """Lifted strengthening of the first supermodular inequality."""
    if pf.zero:
        raise MixedQError("lifted cut requires q > 0 on every path arc")
    S = set(S) & set(pf.keys)
    ctx = LiftingContext.for_first_lifting(pf, S)
    coeffs = {}
    const = h_value(pf, S)
    for a in S:
        c = phi(ctx, -pf.alpha[a])
        coeffs[a] = c
        const -= c
    for a in set(pf.keys) - S:
        coeffs[a] = rho(pf, a, S)
    return PathCut.make(coeffs, const, "supermod-lifted-1")


def lifted_cut_2(pf: PathFunction, S) -> PathCut:
    """Lifted strengthening of the second supermodular inequality."""
    if pf.zero:
        raise MixedQError("lifted cut requires q > 0 on every path arc")
    S = set(S) & set(pf.keys)
    ctx = LiftingContext.for_second_lifting(pf, S)
    coeffs = {}
    const = h_value(pf, S)
    for a in S:
        c = rho(pf, a, S - {a})
        coeffs[a] = c
        const -= c
    for a in set(pf.keys) - S:
        coeffs[a] = -psi(ctx, pf.alpha[a])
    return PathCut.make(coeffs, const, "supermod-lifted-2")


def q_zero_cut(pf: PathFunction) -> PathCut:
    """Convex-hull inequality when every interdictable path arc has q = 0."""
    if pf.plus:
        raise NotAllZeroError("q-zero cut requires q = 0 on every path arc")
    r_p = h_value(pf, set())
    coeffs = {a: -r_p for a in pf.zero}
    return PathCut.make(coeffs, r_p, "q-zero")


def mixed_cut(pf: PathFunction, S, inner: str = "lifted-1") -> PathCut:
    """Surviving inequality of the McCormick/projection scheme.

    Valid for paths mixing q > 0 and q = 0 interdictable arcs.  The inner
    inequality on the positive-q portion comes from either lifted family.
    """
    if not pf.plus or not pf.zero:
        raise MixedQError("mixed cut requires both q > 0 and q = 0 path arcs")
    pf_plus = pf.restricted_to_plus()
    inner_cut = (lifted_cut_1 if inner == "lifted-1" else lifted_cut_2)(
        pf_plus, set(S) & set(pf.plus)
    )
    scale = pf.r_rest * pf.r_product(pf.zero)
    r_plus = pf.r_product(pf.plus)
    coeffs = {a: scale * c for a, c in inner_cut.coeffs}
    for a in pf.zero:
        coeffs[a] = -scale * r_plus
    return PathCut.make(coeffs, scale * inner_cut.const, "mixed")


def separate_integer(pf: PathFunction, xbar, pibar: float) -> list[PathCut]:
    """Cuts violated at a binary plan, or an empty list if feasible.

    ``xbar`` maps arc id to its 0/1 value (missing arcs count as 0).  When the
    point is infeasible, the cut built from the plan's support is tight at the
    path reliability, so it is violated by the full infeasibility amount.
    """
    S = {a for a in pf.keys if float(xbar.get(a, 0.0)) > 0.5}
    h = h_value(pf, S)
    if pibar >= h - VIOLATION_TOL:
        return []
    if not pf.zero:
        return [lifted_cut_1(pf, S), lifted_cut_2(pf, S)]
    if not pf.plus:
        return [q_zero_cut(pf)]
    cuts = [mixed_cut(pf, S, inner="lifted-1"), mixed_cut(pf, S, inner="lifted-2")]
    return [c for c in cuts if c.violation(xbar, pibar) > VIOLATION_TOL]


def _round_greedily(objective, z: np.ndarray) -> np.ndarray:
    """Round fractional entries, least objective loss first, ties toward 0."""
    z = z.copy()
    frac = [i for i in range(len(z)) if 1e-9 < z[i] < 1.0 - 1e-9]
    while frac:
        current = objective(z)
        best = None
        for i in frac:
            for v in (0.0, 1.0):
                trial = z.copy()
                trial[i] = v
                loss = current - objective(trial)
                cand = (loss, v, i)
                if best is None or cand < best:
                    best = cand
        _, v, i = best
        z[i] = v
        frac.remove(i)
    return np.round(z)


def _ascend(objective, gradient, z0: np.ndarray, iterations: int = 200) -> np.ndarray:
    """Projected gradient ascent on the unit box with backtracking steps."""
    z = np.clip(z0, 0.0, 1.0)
    value = objective(z)
    for _ in range(iterations):
        g = gradient(z)
        step = 1.0
        improved = False
        while step > 1e-8:
            trial = np.clip(z + step * g, 0.0, 1.0)
            trial_value = objective(trial)
            if trial_value > value + 1e-12:
                z, value = trial, trial_value
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return z


def _nlp_seed_sets(pf: PathFunction, xbar, pibar: float):
    """Heuristic generating sets for fractional separation.

    Maximizes the two continuous relaxations of the most-violated-cut
    problems, then greedily rounds.  Returns (set for the first lifted
    family, set for the second).
    """
    keys = list(pf.keys)
    n = len(keys)
    alphas = np.array([pf.alpha[a] for a in keys])
    xvec = np.array([float(xbar.get(a, 0.0)) for a in keys])
    beta = pf.beta
    h_empty = h_value(pf, set())
    rho_empty = np.array([rho(pf, a, set()) for a in keys])
    h_single = np.array([h_value(pf, {a}) for a in keys])
    lead = 1.0 - pibar

    def denom(z):
        return max(1.0 - math.exp(-float(alphas @ z) - beta), 1e-12)

    c1 = rho_empty / (h_empty + 1.0) * xvec

    def obj1(z):
        return lead / denom(z) + float(c1 @ (1.0 - z))

    def grad1(z):
        d = denom(z)
        e = math.exp(-float(alphas @ z) - beta)
        return -lead * e / (d * d) * alphas - c1

    c2 = rho_empty / (h_single + 1.0) * (1.0 - xvec)

    def obj2(z):
        return lead / denom(z) - float(c2 @ z)

    def grad2(z):
        d = denom(z)
        e = math.exp(-float(alphas @ z) - beta)
        return -lead * e / (d * d) * alphas - c2

    out = []
    for objective, gradient in ((obj1, grad1), (obj2, grad2)):
        z = _ascend(objective, gradient, xvec.copy())
        z = _round_greedily(objective, z)
        out.append({keys[i] for i in range(n) if z[i] > 0.5})
    return out


def separate_fractional(pf: PathFunction, xbar, pibar: float) -> list[PathCut]:
    """Heuristic separation at a fractional plan.

    May return an empty list even when a violated inequality exists.  Paths
    with only zero-q interdictable arcs are handled by checking the single
    convex-hull cut; mixed paths round the positive-q components to pick the
    generating set.
    """
    if not pf.plus and not pf.zero:
        cut = lifted_cut_1(pf, set())  # constant cut pi >= r(P)
        return [cut] if cut.violation(xbar, pibar) > VIOLATION_TOL else []
    if not pf.plus:
        cut = q_zero_cut(pf)
        return [cut] if cut.violation(xbar, pibar) > VIOLATION_TOL else []
    if pf.zero:
        S = {a for a in pf.plus if float(xbar.get(a, 0.0)) >= 0.5}
        cuts = [mixed_cut(pf, S, inner="lifted-1"), mixed_cut(pf, S, inner="lifted-2")]
        return [c for c in cuts if c.violation(xbar, pibar) > VIOLATION_TOL]
    s1, s2 = _nlp_seed_sets(pf, xbar, pibar)
    cuts = [lifted_cut_1(pf, s1), lifted_cut_2(pf, s2)]
    return [c for c in cuts if c.violation(xbar, pibar) > VIOLATION_TOL]
