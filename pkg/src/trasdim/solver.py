"""Exact search for decompositions of a finite space into bounded scale classes.

A decomposition assigns every point to one of a list of slots, each slot
carrying a scale r.  It is valid when, for every slot, each scale-r-component
of the points assigned to it has diameter at most B.  Empty slots are allowed.

The search is a depth-first backtracking over points with

* one rollback union-find per slot, whose roots carry bitmasks of the
  component's members, of the points farther than B from some member, and of
  the points within the slot scale of some member;
* forward checking: a point loses a slot from its domain as soon as joining
  that slot would create a component of diameter above B (components only
  grow, so the loss is permanent on the branch);
* a fixed low-bandwidth point order and a memo of failed frontier states;
* symmetry breaking between slots of equal scale.

Infeasible is only reported when the search space was exhausted; running out
of the node budget gives UNKNOWN.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from enum import Enum
from numbers import Real
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .metric import MetricSpace, is_zero_dim

__all__ = ["Status", "DecomposeResult", "Decomposer", "decompose", "verify_witness"]

DEFAULT_BUDGET = 2_000_000


class Status(str, Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class DecomposeResult:
    status: Status
    slots: tuple
    bound: Real
    witness: Optional[tuple[int, ...]] = None  # slot index of each point
    nodes: int = 0
    warm_start: bool = False

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.slots]
        if self.witness is not None:
            for p, s in enumerate(self.witness):
                out[s].append(p)
        return out

    def to_json(self, X: Optional[MetricSpace] = None) -> dict:
        doc = {
            "status": self.status.value,
            "slots": list(self.slots),
            "bound": self.bound,
            "nodes": self.nodes,
            "warm_start": self.warm_start,
        }
        if self.witness is not None:
            classes = self.classes()
            if X is not None:
                classes = [[_label(X.labels[p]) for p in cls] for cls in classes]
            doc["witness"] = [{"slot": j, "scale": r, "points": cls} for j, (r, cls) in enumerate(zip(self.slots, classes))]
        return doc


def _label(lab):
    return list(lab) if isinstance(lab, tuple) else lab


class _BudgetExceeded(Exception):
    pass


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def verify_witness(X: MetricSpace, slots: Sequence[Real], bound: Real, witness: Sequence[int]) -> bool:
    """Independent re-check of a witness, class by class, with the metric module."""
    if len(witness) != len(X):
        return False
    for j, r in enumerate(slots):
        cls = [p for p, s in enumerate(witness) if s == j]
        if cls and not is_zero_dim(X, cls, r, bound):
            return False
    return all(0 <= s < len(slots) for s in witness)


class Decomposer:
    """Precomputed threshold masks for one space and one bound B.

    Reuse one instance for many slot lists; results are cached per slot tuple.
    """

    def __init__(self, X: MetricSpace, bound: Real, budget: int = DEFAULT_BUDGET, warm_start: bool = True,
                 memo: bool = True):
        if bound < 0:
            raise ValueError("bound must be non-negative")
        self.X = X
        self.bound = bound
        self.budget = budget
        self.use_warm_start = warm_start
        self.memo = memo
        self._balls: Optional[list[int]] = None
        self._coords: Optional[list] = None
        n = len(X)
        self.n = n
        self.far = [sum(1 << j for j in range(n) if X.dist[i][j] > bound) for i in range(n)]
        self._adj: dict = {}
        self._cache: dict = {}
        self._orders: dict = {}
        self.total_nodes = 0
        self.calls = 0

    def adjacency(self, r: Real) -> list[int]:
        adj = self._adj.get(r)
        if adj is None:
            X, n = self.X, self.n
            adj = [sum(1 << j for j in range(n) if j != i and X.dist[i][j] < r) for i in range(n)]
            self._adj[r] = adj
        return adj

    def search_order(self, slots: Sequence[Real]) -> list[int]:
        """Point order for the search: index order or reverse Cuthill-McKee, whichever
        has the smaller bandwidth in the d < (largest scale) graph; ties go to index order.

        A narrow band keeps the search frontier, and so the failure memo, small.
        """
        r = max(slots)
        order = self._orders.get(r)
        if order is not None:
            return order
        adj = self.adjacency(r)
        n = self.n
        rows, cols = [], []
        for i in range(n):
            for j in _bits(adj[i]):
                rows.append(i)
                cols.append(j)
        graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
        candidates = [list(range(n)), [int(x) for x in reverse_cuthill_mckee(graph, symmetric_mode=True)]]

        def bandwidth(order):
            pos = {p: k for k, p in enumerate(order)}
            return max((abs(pos[i] - pos[j]) for i, j in zip(rows, cols)), default=0)

        order = min(candidates, key=bandwidth)
        self._orders[r] = order
        return order

    def solve(self, slots: Sequence[Real], budget: Optional[int] = None) -> DecomposeResult:
        slots = tuple(slots)
        if any(not r > 0 for r in slots):
            raise ValueError("slot scales must be positive")
        key = (slots, budget if budget is not None else self.budget)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        result = self._solve(slots, budget if budget is not None else self.budget)
        self.calls += 1
        self.total_nodes += result.nodes
        if result.witness is not None and not verify_witness(self.X, slots, self.bound, result.witness):
            raise AssertionError(f"solver produced an invalid witness for slots {slots}")
        self._cache[key] = result
        return result

    def _solve(self, slots: tuple, budget: int) -> DecomposeResult:
        n = self.n
        if n == 0:
            return DecomposeResult(Status.FEASIBLE, slots, self.bound, (), 0)
        if not slots:
            return DecomposeResult(Status.INFEASIBLE, slots, self.bound, None, 0)
        if self.use_warm_start:
            w = self._warm_start(slots)
            if w is not None:
                return DecomposeResult(Status.FEASIBLE, slots, self.bound, w, 0, warm_start=True)
        nodes = 0
        # a decomposition restricts to every subspace, so refuting a ball refutes X
        for ball in self.refutation_balls():
            sub = _Search(self, slots, max(1, budget // 8), points=ball, memo=self.memo)
            try:
                found = sub.run()
            except _BudgetExceeded:
                nodes += sub.nodes
                break
            nodes += sub.nodes
            if found is None:
                return DecomposeResult(Status.INFEASIBLE, slots, self.bound, None, nodes)
        search = _Search(self, slots, max(1, budget - nodes), memo=self.memo)
        try:
            found = search.run()
        except _BudgetExceeded:
            return DecomposeResult(Status.UNKNOWN, slots, self.bound, None, nodes + search.nodes)
        nodes += search.nodes
        if found is None:
            return DecomposeResult(Status.INFEASIBLE, slots, self.bound, None, nodes)
        return DecomposeResult(Status.FEASIBLE, slots, self.bound, found, nodes)

    def refutation_balls(self) -> list[int]:
        """Closed balls around a central point, of roughly doubling size, smaller than X."""
        if self._balls is not None:
            return self._balls
        X, n = self.X, self.n
        balls: list[int] = []
        if n >= 32:
            center = min(range(n), key=lambda i: (max(X.dist[i]), i))
            radii = sorted(set(X.dist[center]))
            last = 0
            for rho in radii:
                members = [j for j in range(n) if X.dist[center][j] <= rho]
                if len(members) >= n // 2 + 1:
                    break
                if len(members) >= max(16, last + 1):
                    balls.append(sum(1 << j for j in members))
                    last = len(members)
        self._balls = balls
        return balls

    def class_ok(self, members: int, r: Real) -> bool:
        """Bitmask test: every d<r component of ``members`` has diameter <= B."""
        adj = self.adjacency(r)
        far = self.far
        rest = members
        while rest:
            low = rest & -rest
            comp = low
            frontier = low
            while frontier:
                grow = 0
                for x in _bits(frontier):
                    grow |= adj[x]
                grow &= members & ~comp
                comp |= grow
                frontier = grow
            fu = 0
            for x in _bits(comp):
                fu |= far[x]
            if fu & comp:
                return False
            rest &= ~comp
        return True

    def _warm_start(self, slots: tuple) -> Optional[tuple[int, ...]]:
        """Periodic brick colourings of grid spaces, matched to the slots.

        A pattern cuts the grid into bands of height H, shifts band I by
        I*shift, cuts it into bricks of width W and colours brick J of band I
        with (J + a*I) mod c.  Colour classes are matched to slots by scale.
        Returns None when no pattern gives a valid decomposition.
        """
        coords = self._grid_coords()
        if coords is None or self.bound == float("inf"):
            return None
        k = len(slots)
        top = int(min(self.bound, 16)) + 1
        scales = sorted(set(slots))
        ok_cache: dict = {}

        def ok(members: int, r) -> bool:
            key = (members, r)
            hit = ok_cache.get(key)
            if hit is None:
                hit = ok_cache[key] = self.class_ok(members, r)
            return hit

        for pattern in self._brick_patterns(coords, top, k):
            classes = [m for m in pattern if m]
            if len(classes) > k:
                continue
            # the class that is fine at the largest scale goes to the largest slot, and so on
            fits = [[r for r in scales if ok(m, r)] for m in classes]
            if any(not f for f in fits):
                continue
            assignment = self._match(classes, fits, slots)
            if assignment is not None:
                return assignment
        return None

    def _grid_coords(self):
        if self._coords is not None:
            return self._coords or None
        labels = self.X.labels
        coords: list = []
        if self.X.kind == "grid" and labels:
            if all(isinstance(l, int) for l in labels):
                coords = [(l, 0) for l in labels]
            elif all(isinstance(l, tuple) and len(l) == 2 for l in labels):
                coords = list(labels)
        self._coords = coords
        return coords or None

    def _brick_patterns(self, coords, top: int, k: int):
        one_dim = all(c[1] == 0 for c in coords)
        seen = set()
        for c in range(1, k + 1):
            for H in ([1] if one_dim else range(1, top + 1)):
                for W in range(1, top + 1):
                    for shift in ([0] if one_dim else range(W)):
                        for a in ([0] if one_dim else range(c)):
                            masks = [0] * c
                            for p, (i, j) in enumerate(coords):
                                if one_dim:
                                    i, j = 0, i
                                band = i // H
                                masks[((j + shift * band) // W + a * band) % c] |= 1 << p
                            key = tuple(sorted(masks))
                            if key not in seen:
                                seen.add(key)
                                yield masks

    def _match(self, classes, fits, slots) -> Optional[tuple[int, ...]]:
        order = sorted(range(len(classes)), key=lambda c: max(fits[c]), reverse=True)
        free = sorted(range(len(slots)), key=lambda j: slots[j], reverse=True)
        colour_slot = {}
        for c in order:
            best = None
            for j in free:
                if slots[j] in fits[c] and (best is None or slots[j] > slots[best]):
                    best = j
            if best is None:
                return None
            colour_slot[c] = best
            free.remove(best)
        out = [0] * self.n
        for c, m in enumerate(classes):
            for p in _bits(m):
                out[p] = colour_slot[c]
        return tuple(out)


class _Search:
    """One backtracking run.

    The next point is a forced one (a single slot left in its domain) when
    there is any, else the first unplaced point of the fixed search order.

    Failed subtrees are remembered by a signature of the search frontier: the
    unplaced points and, for every slot, its open components (those with an
    unplaced point within the slot scale), each given by its members near the
    unplaced region and the unplaced points farther than B from it, plus the
    pairs of open components that can never merge.  Whether the remaining
    points can be placed depends on nothing else, so a repeated signature is a
    repeated failure.
    """

    def __init__(self, dec: Decomposer, slots: tuple, budget: int, points: Optional[int] = None,
                 memo: bool = True, memo_limit: int = 1_000_000):
        self.dec = dec
        self.slots = slots
        self.budget = budget
        self.memo = memo
        self.memo_limit = memo_limit
        self.failed: set = set()
        self.nodes = 0
        n = dec.n
        self.n = n
        k = len(slots)
        self.adj = [dec.adjacency(r) for r in slots]
        self.far = dec.far
        self.points = (1 << n) - 1 if points is None else points
        self.order = [p for p in dec.search_order(slots) if self.points >> p & 1]
        m = len(self.order)
        self.m = m
        self.rank = [0] * n
        for pos, p in enumerate(self.order):
            self.rank[p] = pos
        # points near the suffix of the order starting at position i, per slot;
        # a superset of the true frontier, which keeps the signature sound
        suffix = [0] * (m + 1)
        for i in range(m - 1, -1, -1):
            suffix[i] = suffix[i + 1] | (1 << self.order[i])
        self.border = []
        for j in range(k):
            adj = self.adj[j]
            near = [0] * (m + 1)
            for i in range(m - 1, -1, -1):
                p = self.order[i]
                near[i] = near[i + 1] | adj[p]
            self.border.append(near)
        # slots of equal scale are interchangeable: only the first unused one is tried
        self.prev_same = []
        for j, r in enumerate(slots):
            prev = [t for t in range(j) if slots[t] == r]
            self.prev_same.append(prev[-1] if prev else -1)
        self.parent = [list(range(n)) for _ in range(k)]
        self.size = [[1] * n for _ in range(k)]
        self.cmask = [[1 << i for i in range(n)] for _ in range(k)]
        self.cfar = [list(dec.far) for _ in range(k)]
        self.cnbr = [list(self.adj[j]) for j in range(k)]
        self.assigned = [0] * k
        self.used = [False] * k
        self.domain = [(1 << k) - 1] * n
        self.unassigned = self.points
        self.urank = (1 << m) - 1
        self.forced = 0
        self.assignment = [-1] * n
        self.trail: list = []

    def find(self, s: int, x: int) -> int:
        parent = self.parent[s]
        while parent[x] != x:
            x = parent[x]
        return x

    def _touch(self, s: int, p: int):
        """Roots of slot-s components adjacent to p, and the merged masks."""
        nb = self.adj[s][p] & self.assigned[s]
        roots = []
        mask = 1 << p
        farm = self.far[p]
        cmask, cfar, parent = self.cmask[s], self.cfar[s], self.parent[s]
        while nb:
            x = (nb & -nb).bit_length() - 1
            while parent[x] != x:
                x = parent[x]
            roots.append(x)
            cm = cmask[x]
            mask |= cm
            farm |= cfar[x]
            nb &= ~cm
        return roots, mask, farm

    def assign(self, s: int, p: int) -> bool:
        """Put p into slot s; returns False (state still to be rolled back) on a dead end."""
        roots, mask, farm = self._touch(s, p)
        if mask & farm:
            return False
        trail = self.trail
        parent, size = self.parent[s], self.size[s]
        cmask, cfar, cnbr = self.cmask[s], self.cfar[s], self.cnbr[s]
        nbr = cnbr[p]
        new_root = p
        total = 1
        for root in roots:
            nbr |= cnbr[root]
            total += size[root]
            if size[root] > size[new_root]:
                new_root = root
        trail.append(("root", s, new_root, size[new_root], cmask[new_root], cfar[new_root], cnbr[new_root]))
        for x in roots:
            if x != new_root:
                trail.append(("parent", s, x))
                parent[x] = new_root
        if p != new_root:
            trail.append(("parent", s, p))
            parent[p] = new_root
        size[new_root] = total
        cmask[new_root], cfar[new_root], cnbr[new_root] = mask, farm, nbr
        trail.append(("slot", s, p, self.assigned[s], self.used[s], self.forced))
        self.assigned[s] |= 1 << p
        self.used[s] = True
        self.unassigned &= ~(1 << p)
        self.urank &= ~(1 << self.rank[p])
        self.assignment[p] = s
        # forward check the unplaced points near the grown component
        bit = 1 << s
        cand = nbr & self.unassigned
        domain = self.domain
        while cand:
            low = cand & -cand
            q = low.bit_length() - 1
            cand ^= low
            if domain[q] & bit:
                _, qmask, qfar = self._touch(s, q)
                if qmask & qfar:
                    trail.append(("dom", q, domain[q]))
                    dq = domain[q] & ~bit
                    domain[q] = dq
                    if not dq:
                        return False
                    if not dq & (dq - 1):
                        self.forced |= low
        return True

    def undo(self, mark: int):
        trail = self.trail
        while len(trail) > mark:
            entry = trail.pop()
            tag = entry[0]
            if tag == "dom":
                self.domain[entry[1]] = entry[2]
            elif tag == "parent":
                self.parent[entry[1]][entry[2]] = entry[2]
            elif tag == "root":
                _, s, root, sz, cm, cf, cn = entry
                self.size[s][root] = sz
                self.cmask[s][root], self.cfar[s][root], self.cnbr[s][root] = cm, cf, cn
            else:
                _, s, p, assigned, used, forced = entry
                self.assigned[s] = assigned
                self.used[s] = used
                self.forced = forced
                self.unassigned |= 1 << p
                self.urank |= 1 << self.rank[p]
                self.assignment[p] = -1

    def signature(self, i: int):
        U = self.unassigned
        key = [U]
        for s in range(len(self.slots)):
            border = self.border[s][i]
            active = self.assigned[s] & border
            cmask, cfar, parent = self.cmask[s], self.cfar[s], self.parent[s]
            comps = []
            while active:
                x = (active & -active).bit_length() - 1
                while parent[x] != x:
                    x = parent[x]
                edge = cmask[x] & border
                comps.append((edge, x))
                active &= ~edge
            if not comps:
                key.append(self.used[s])
                continue
            comps.sort()
            items = tuple((edge, cfar[x] & U) for edge, x in comps)
            clashes = tuple(
                (e1, e2)
                for a, (e1, x1) in enumerate(comps)
                for e2, x2 in comps[a + 1 :]
                if cfar[x1] & cmask[x2]
            )
            key.append((self.used[s], items, clashes))
        return tuple(key)

    def run(self) -> Optional[tuple[int, ...]]:
        limit = sys.getrecursionlimit()
        if limit < self.n + 500:
            sys.setrecursionlimit(self.n + 500)
        if not self._dfs():
            return None
        return tuple(self.assignment)

    def _dfs(self) -> bool:
        if not self.urank:
            return True
        i = (self.urank & -self.urank).bit_length() - 1
        key = self.signature(i) if self.memo else None
        if key is not None and key in self.failed:
            return False
        forced = self.forced & self.unassigned
        p = (forced & -forced).bit_length() - 1 if forced else self.order[i]
        dom = self.domain[p]
        for s in range(len(self.slots)):
            if not dom >> s & 1:
                continue
            prev = self.prev_same[s]
            if prev >= 0 and not self.used[prev]:
                continue
            self.nodes += 1
            if self.nodes > self.budget:
                raise _BudgetExceeded
            mark = len(self.trail)
            if self.assign(s, p) and self._dfs():
                return True
            self.undo(mark)
        if key is not None and len(self.failed) < self.memo_limit:
            self.failed.add(key)
        return False


def decompose(X: MetricSpace, slots: Sequence[Real], bound: Real, budget: int = DEFAULT_BUDGET) -> DecomposeResult:
    """Find points -> slots with every slot class of scale-r-dimension 0 at bound B."""
    return Decomposer(X, bound, budget).solve(slots)
