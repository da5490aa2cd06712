"""Truncated families of undecomposable scale sets, and what is built on them.

Everything here is relative to an explicit mesh bound B and a finite window of
integer scales.  A scale set sigma is *undecomposable* when X admits no
decomposition into |sigma| classes, the class for scale r having all its
scale-r-components of diameter at most B.  The undecomposable sets form an
inclusive family over the window; its Ord is the truncated trasdim.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from numbers import Real
from typing import Iterable, Optional, Sequence

from .metric import MetricSpace
from .setfamily import SetFamily, derive, is_inclusive, ord_of, subsets
from .solver import DEFAULT_BUDGET, DecomposeResult, Decomposer, Status
from .strategy import APDProfile, StrategyError, TableRule

__all__ = [
    "ScaleSlots",
    "ApproxParams",
    "APDProfile",
    "SolverUnknown",
    "FamilyScan",
    "scan_family",
    "family_M",
    "family_A",
    "partition_decomposable",
    "TrasdimReport",
    "trasdim_ord",
    "FTable",
    "derive_profile_f",
    "f_table_from_family",
    "padded_scales",
    "in_window_tuples",
    "TupleResult",
    "ProfileReport",
    "profile_check",
    "ord_bound_violations",
]


class SolverUnknown(RuntimeError):
    """The solver ran out of budget on a slot list the caller needed decided."""

    def __init__(self, slots, nodes: int):
        super().__init__(f"solver budget exhausted on slots {list(slots)} after {nodes} nodes")
        self.slots = tuple(slots)
        self.nodes = nodes


@dataclass(frozen=True)
class ScaleSlots:
    slots: tuple

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        if any(not r > 0 for r in self.slots):
            raise ValueError("slot scales must be positive")

    def __iter__(self):
        return iter(self.slots)

    def __len__(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class ApproxParams:
    window: tuple
    bound: Real
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        window = tuple(sorted(set(int(r) for r in self.window)))
        if not window or window[0] < 1:
            raise ValueError("scale window must be a nonempty set of positive integers")
        if self.bound < 0:
            raise ValueError("B must be non-negative")
        object.__setattr__(self, "window", window)

    @classmethod
    def upto(cls, R: int, bound: Real, budget: int = DEFAULT_BUDGET) -> "ApproxParams":
        return cls(tuple(range(1, R + 1)), bound, budget)

    def to_json(self) -> dict:
        return {"scales": list(self.window), "B": self.bound, "budget": self.budget}


def _sorted(sigma) -> tuple:
    return tuple(sorted(sigma))


def _dominated_feasible(sigma: tuple, rho: tuple) -> bool:
    # sigma holds a |rho|-subset pointwise below rho: its smallest elements
    k = len(rho)
    return len(sigma) >= k and all(a <= b for a, b in zip(sigma[:k], rho))


def _dominated_infeasible(sigma: tuple, rho: tuple) -> bool:
    # sigma arises from infeasible rho by dropping scales and raising the rest
    k = len(sigma)
    return len(rho) >= k and all(b <= a for a, b in zip(sigma, rho[:k]))


@dataclass
class FamilyScan:
    """The truncated family plus how each scale set was decided."""

    family: SetFamily
    params: ApproxParams
    decided: dict = field(default_factory=dict)  # sigma tuple -> (status, "solver" | "inferred")
    solver_calls: int = 0
    nodes: int = 0

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "members": self.family.sorted_members(),
            "solver_calls": self.solver_calls,
            "inferred": sum(1 for _, how in self.decided.values() if how == "inferred"),
            "nodes": self.nodes,
        }


def scan_family(X: MetricSpace, params: ApproxParams, decomposer: Optional[Decomposer] = None,
                infer: bool = True) -> FamilyScan:
    """Decide every scale set in the window, smallest first.

    With ``infer`` on, a set is settled without the solver when a decided set
    dominates it: feasibility passes to supersets and to pointwise smaller
    scales, infeasibility to subsets and to pointwise larger scales.
    """
    dec = decomposer or Decomposer(X, params.bound, params.budget)
    if dec.bound != params.bound:
        raise ValueError("decomposer bound differs from params.bound")
    feasible: list[tuple] = []
    infeasible: list[tuple] = []
    decided: dict = {}
    calls = nodes = 0
    for s in subsets(params.window):
        sigma = _sorted(s)
        if infer and any(_dominated_feasible(sigma, rho) for rho in feasible):
            decided[sigma] = (Status.FEASIBLE, "inferred")
            continue
        if infer and any(_dominated_infeasible(sigma, rho) for rho in infeasible):
            decided[sigma] = (Status.INFEASIBLE, "inferred")
            infeasible.append(sigma)
            continue
        res = dec.solve(sigma, params.budget)
        calls += 1
        nodes += res.nodes
        if res.status is Status.UNKNOWN:
            raise SolverUnknown(sigma, res.nodes)
        decided[sigma] = (res.status, "solver")
        (feasible if res.feasible else infeasible).append(sigma)
    members = [sigma for sigma, (st, _) in decided.items() if st is Status.INFEASIBLE]
    family = SetFamily.explicit(params.window, members)
    if not is_inclusive(family):
        raise RuntimeError("undecomposable scale sets failed to form an inclusive family")
    return FamilyScan(family, params, decided, calls, nodes)


def family_M(X: MetricSpace, scales: Iterable[int], B: Real, budget: int = DEFAULT_BUDGET) -> SetFamily:
    """Scale sets sigma in the window for which X has no bounded scale-dimension-0 decomposition."""
    return scan_family(X, ApproxParams(tuple(scales), B, budget)).family


def partition_decomposable(X: MetricSpace, slots: Sequence[Real], B: Real, max_points: int = 14) -> bool:
    """Brute force: can X be split into classes X_j, each a union of an r_j-disjoint family of mesh <= B?

    Independent of the component-based solver.  Blocks are searched literally
    (a block sits at distance >= r from the rest of its class), and classes by
    submask enumeration, so this is only for small spaces.
    """
    n = len(X)
    if n > max_points:
        raise ValueError(f"{n} points exceed the brute-force limit {max_points}")
    D = X.dist
    full = (1 << n) - 1

    def members(mask: int) -> list[int]:
        return [i for i in range(n) if mask >> i & 1]

    @lru_cache(maxsize=None)
    def diam_ok(mask: int) -> bool:
        pts = members(mask)
        return all(D[a][b] <= B for a, b in itertools.combinations(pts, 2))

    @lru_cache(maxsize=None)
    def splits(mask: int, r) -> bool:
        # mask is a disjoint union of blocks with diameter <= B, pairwise at distance >= r
        if mask == 0:
            return True
        low = mask & -mask
        rest = mask ^ low
        sub = rest
        while True:
            block = sub | low
            other = mask ^ block
            if diam_ok(block) and all(D[a][b] >= r for a in members(block) for b in members(other)):
                if splits(other, r):
                    return True
            if sub == 0:
                return False
            sub = (sub - 1) & rest

    order = tuple(slots)

    @lru_cache(maxsize=None)
    def cover(j: int, rest: int) -> bool:
        if rest == 0:
            return True
        if j == len(order):
            return False
        sub = rest
        while True:
            if splits(sub, order[j]) and cover(j + 1, rest ^ sub):
                return True
            if sub == 0:
                return False
            sub = (sub - 1) & rest

    return cover(0, full)


def family_A(X: MetricSpace, scales: Iterable[int], B: Real, max_points: int = 14) -> SetFamily:
    """Scale sets admitting no split into unions of r-disjoint families of mesh <= B (brute force)."""
    window = sorted(set(int(r) for r in scales))
    members = [s for s in subsets(window) if not partition_decomposable(X, _sorted(s), B, max_points)]
    return SetFamily.explicit(window, members)


@dataclass
class TrasdimReport:
    ord: int
    scan: FamilyScan

    @property
    def family(self) -> SetFamily:
        return self.scan.family

    def to_json(self) -> dict:
        doc = {"ord": self.ord}
        doc.update(self.scan.to_json())
        doc["caveat"] = "Ord of the family truncated to the scale window at mesh bound B"
        return doc


def trasdim_ord(X: MetricSpace, params: ApproxParams, decomposer: Optional[Decomposer] = None) -> TrasdimReport:
    """Ord of the truncated family.  Covers read as r-disjoint unions or as scale-r-dimension 0 agree here."""
    scan = scan_family(X, params, decomposer)
    return TrasdimReport(int(ord_of(scan.family)), scan)


@dataclass
class FTable:
    """f(k) = Ord M^{k..k+n} + 1 for each k with {k..k+n} inside the window."""

    n: int
    values: dict
    family: SetFamily
    violations: list  # pairs (k, k') with k < k' and f(k) > f(k')

    @property
    def monotone(self) -> bool:
        return not self.violations

    def rule(self, hold: bool = True) -> TableRule:
        return TableRule.of(self.values, hold=hold)

    def profile(self, hold: bool = True) -> APDProfile:
        return APDProfile(self.n + 1, (self.rule(hold),))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "f": {str(k): v for k, v in sorted(self.values.items())},
            "monotone": self.monotone,
            "violations": [list(v) for v in self.violations],
        }


def f_table_from_family(family: SetFamily, n: int) -> FTable:
    window = sorted(family.ground)
    values = {}
    for k in window:
        block = set(range(k, k + n + 1))
        if block <= family.ground:
            values[k] = int(ord_of(derive(family, block))) + 1
    if not values:
        raise ValueError(f"the window holds no {n + 1} consecutive scales")
    keys = sorted(values)
    violations = [(a, b) for a, b in itertools.combinations(keys, 2) if values[a] > values[b]]
    return FTable(n, values, family, violations)


def derive_profile_f(X: MetricSpace, n: int, params: ApproxParams,
                     decomposer: Optional[Decomposer] = None) -> FTable:
    """Tabulate f from the truncated family; decreases are reported, not repaired."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return f_table_from_family(scan_family(X, params, decomposer).family, n)


def padded_scales(n: int, fk: int, r0: int, r1: int) -> list[int]:
    """Distinct scales {r0..r0+n} and {m..m+fk-1} with m = max(r1, r0+n+1)."""
    m = max(r1, r0 + n + 1)
    return list(range(r0, r0 + n + 1)) + list(range(m, m + fk))


def in_window_tuples(table: FTable) -> list[tuple[int, int]]:
    """Non-decreasing (r0, r1) whose padded scale set lies inside the window.

    These are the tuples where the truncated family alone decides the padded
    set, so the constructive argument applies without leaving the window.
    """
    window = table.family.ground
    out = []
    for r0 in sorted(table.values):
        for r1 in sorted(window):
            if r1 >= r0 and set(padded_scales(table.n, table.values[r0], r0, r1)) <= window:
                out.append((r0, r1))
    return out


@dataclass(frozen=True)
class TupleResult:
    scales: tuple
    slots: tuple
    result: DecomposeResult

    @property
    def passed(self) -> bool:
        return self.result.feasible

    def to_json(self, X: Optional[MetricSpace] = None) -> dict:
        return {"tuple": list(self.scales), "slots": list(self.slots), "passed": self.passed,
                "decomposition": self.result.to_json(X)}


@dataclass
class ProfileReport:
    profile: APDProfile
    bound: Real
    results: list

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.results)

    @property
    def failures(self) -> list:
        return [t.scales for t in self.results if not t.passed]

    def to_json(self, X: Optional[MetricSpace] = None) -> dict:
        return {
            "profile": self.profile.to_json(),
            "B": self.bound,
            "passed": self.passed,
            "tuples_checked": len(self.results),
            "failures": [list(t) for t in self.failures],
            "results": [t.to_json(X) for t in self.results],
            "caveat": "sampled check over the supplied tuples, not a proof",
        }


def profile_check(X: MetricSpace, profile: APDProfile, tuples: Iterable[Sequence[int]], B: Real,
                  budget: int = DEFAULT_BUDGET, decomposer: Optional[Decomposer] = None) -> ProfileReport:
    """For each non-decreasing (r0..rm): alpha0 slots at r0, alpha_i(r_(i-1)) slots at r_i, then decompose."""
    dec = decomposer or Decomposer(X, B, budget)
    results = []
    for t in tuples:
        t = tuple(int(r) for r in t)
        if any(a > b for a, b in zip(t, t[1:])):
            raise ValueError(f"tuple {list(t)} is not non-decreasing")
        counts = profile.slot_counts(t)
        slots = tuple(r for r, c in zip(t, counts) for _ in range(c))
        res = dec.solve(slots, budget)
        if res.status is Status.UNKNOWN:
            raise SolverUnknown(slots, res.nodes)
        results.append(TupleResult(t, slots, res))
    return ProfileReport(profile, B, results)


def ord_bound_violations(family: SetFamily, n: int, f) -> list[tuple]:
    """Sets sigma of size n+1 where Ord of the derived family reaches f(max sigma).

    ``f`` is any callable; sets where f is undefined are skipped.
    """
    out = []
    for sigma in subsets(family.ground, n + 1, n + 1):
        try:
            bound = f(max(sigma))
        except (StrategyError, KeyError):
            continue
        if int(ord_of(derive(family, sigma))) >= bound:
            out.append(_sorted(sigma))
    return out
