"""Families of finite nonempty subsets of a finite ground set and Borst's Ord.

Members are ``frozenset[int]``; the empty set is never a member.  A family is
either explicit (a frozenset of members) or backed by a named oracle predicate
that is only ever evaluated on subsets of the declared ground set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

from .ordinal import Ordinal, OrdinalError

FinSet = frozenset

__all__ = [
    "FinSet",
    "SetFamily",
    "FamilyError",
    "Verdict",
    "LessThanResult",
    "ORACLES",
    "derive",
    "ord_of",
    "max_cardinality",
    "inclusive_closure",
    "is_inclusive",
    "chain_witness",
    "map_family",
    "ord_less_than",
    "subsets",
]


class FamilyError(ValueError):
    pass


class Verdict(str, Enum):
    VERIFIED = "Verified"
    REFUTED = "Refuted"
    UNKNOWN = "Unknown"


def _card_le_min(sigma: frozenset, params: Mapping) -> bool:
    return len(sigma) <= min(sigma)


def _card_le_const(sigma: frozenset, params: Mapping) -> bool:
    return len(sigma) <= int(params["k"])


ORACLES: dict[str, Callable[[frozenset, Mapping], bool]] = {
    "card_le_min": _card_le_min,
    "card_le_const_k": _card_le_const,
}


def subsets(labels: Iterable[int], min_size: int = 1, max_size: Optional[int] = None) -> Iterator[frozenset]:
    """Subsets of ``labels`` by increasing size, lexicographic within a size."""
    labels = sorted(labels)
    top = len(labels) if max_size is None else min(max_size, len(labels))
    for k in range(min_size, top + 1):
        for combo in itertools.combinations(labels, k):
            yield frozenset(combo)


@dataclass(frozen=True)
class SetFamily:
    ground: frozenset
    members: Optional[frozenset] = None
    oracle: Optional[str] = None
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        ground = frozenset(int(a) for a in self.ground)
        object.__setattr__(self, "ground", ground)
        if not ground:
            raise FamilyError("ground set must be nonempty")
        if (self.members is None) == (self.oracle is None):
            raise FamilyError("a family is either explicit or oracle-backed")
        if self.members is not None:
            members = frozenset(frozenset(m) for m in self.members)
            for m in members:
                if not m:
                    raise FamilyError("the empty set is never a member")
                if not m <= ground:
                    raise FamilyError(f"member {sorted(m)} is not inside the ground set")
            object.__setattr__(self, "members", members)
        elif self.oracle not in ORACLES:
            raise FamilyError(f"unknown oracle {self.oracle!r}; known: {sorted(ORACLES)}")

    @classmethod
    def explicit(cls, ground: Union[int, Iterable[int]], members: Iterable[Iterable[int]]) -> "SetFamily":
        """Explicit family; an integer ground T means {1..T}."""
        if isinstance(ground, int):
            ground = range(1, ground + 1)
        return cls(frozenset(ground), frozenset(frozenset(m) for m in members))

    @classmethod
    def from_oracle(cls, name: str, truncation: int, **params) -> "SetFamily":
        return cls(frozenset(range(1, truncation + 1)), oracle=name, params=dict(params))

    @classmethod
    def all_up_to(cls, ground: Union[int, Iterable[int]], k: int) -> "SetFamily":
        """All nonempty subsets of the ground set of size at most k."""
        if isinstance(ground, int):
            ground = range(1, ground + 1)
        return cls.explicit(ground, subsets(ground, 1, k))

    @property
    def is_explicit(self) -> bool:
        return self.members is not None

    @property
    def truncation(self) -> int:
        return max(self.ground)

    def __contains__(self, sigma) -> bool:
        sigma = frozenset(sigma)
        if not sigma or not sigma <= self.ground:
            return False
        if self.members is not None:
            return sigma in self.members
        return bool(ORACLES[self.oracle](sigma, self.params))

    def __len__(self) -> int:
        return len(self.materialize().members)

    def __iter__(self):
        return iter(sorted(self.materialize().members, key=_set_key))

    def materialize(self) -> "SetFamily":
        """Explicit copy; oracle families are evaluated on every subset of the ground."""
        if self.members is not None:
            return self
        pred = ORACLES[self.oracle]
        members = frozenset(s for s in subsets(self.ground) if pred(s, self.params))
        return SetFamily(self.ground, members)

    def sorted_members(self) -> list[list[int]]:
        return [sorted(m) for m in sorted(self.materialize().members, key=_set_key)]

    def to_json(self) -> dict:
        if self.members is None:
            return {"ground": sorted(self.ground), "oracle": self.oracle, "params": dict(self.params)}
        return {"ground": sorted(self.ground), "members": self.sorted_members()}


def _set_key(s) -> tuple:
    return (len(s), sorted(s))


def _check_inside(F: SetFamily, sigma: frozenset):
    if not sigma <= F.ground:
        raise FamilyError(f"{sorted(sigma)} is not inside the ground set {sorted(F.ground)}")


def derive(F: SetFamily, sigma: Iterable[int] = ()) -> SetFamily:
    """The derived family F^sigma = {tau nonempty : tau | sigma in F, tau & sigma empty}."""
    sigma = frozenset(sigma)
    _check_inside(F, sigma)
    if not sigma:
        return F
    members = F.materialize().members
    # tau = m - sigma must be nonempty, hence m != sigma
    return SetFamily(F.ground, frozenset(m - sigma for m in members if sigma < m))


def max_cardinality(F: SetFamily) -> int:
    return max((len(m) for m in F.materialize().members), default=0)


def _ord_members(members: frozenset, memo: dict) -> int:
    if not members:
        return 0
    cached = memo.get(members)
    if cached is not None:
        return cached
    support = frozenset().union(*members)
    best = 0
    for a in sorted(support):
        derived = frozenset(m - {a} for m in members if a in m and len(m) > 1)
        best = max(best, _ord_members(derived, memo))
    memo[members] = best + 1
    return best + 1


def ord_of(F: SetFamily) -> Ordinal:
    """Borst's Ord of an explicit finite family, by recursion on the derived families F^a.

    For a nonempty finite family Ord F is the least ordinal exceeding every
    Ord F^a, i.e. 1 + max_a Ord F^a.  Ground elements outside every member give
    F^a empty and are skipped.
    """
    if not F.is_explicit:
        raise FamilyError("ord_of needs an explicit family; use ord_less_than for oracle families")
    return Ordinal.of(_ord_members(F.members, {}))


def inclusive_closure(F: SetFamily) -> SetFamily:
    members = F.materialize().members
    closed = set()
    for m in members:
        if m in closed:
            continue
        for k in range(1, len(m) + 1):
            closed.update(frozenset(c) for c in itertools.combinations(sorted(m), k))
    return SetFamily(F.ground, frozenset(closed))


def is_inclusive(F: SetFamily) -> bool:
    members = F.materialize().members
    return all(m - {a} in members for m in members if len(m) > 1 for a in m)


def chain_witness(F: SetFamily, k: int) -> Optional[tuple[int, ...]]:
    """Distinct a_1..a_k with every prefix {a_1..a_j} in F, or None.

    Searched depth-first in increasing label order, so the lexicographically
    least chain is returned.
    """
    if not is_inclusive(F):
        raise FamilyError("chain_witness needs an inclusive family")
    members = F.materialize().members
    labels = sorted(F.ground)

    def extend(prefix: tuple, current: frozenset):
        if len(prefix) == k:
            return prefix
        for a in labels:
            if a in current:
                continue
            nxt = current | {a}
            if nxt in members:
                found = extend(prefix + (a,), nxt)
                if found is not None:
                    return found
        return None

    if k < 0:
        raise FamilyError("chain length must be a natural number")
    return extend((), frozenset())


def map_family(F: SetFamily, phi: Union[Mapping[int, int], Callable[[int], int]]) -> SetFamily:
    """Image family {phi(sigma)} over the image ground set; phi must be injective on the ground."""
    f = phi.__getitem__ if isinstance(phi, Mapping) else phi
    image = {a: int(f(a)) for a in sorted(F.ground)}
    if len(set(image.values())) != len(image):
        raise FamilyError("map is not injective on the ground set")
    members = F.materialize().members
    return SetFamily(
        frozenset(image.values()),
        frozenset(frozenset(image[a] for a in m) for m in members),
    )


@dataclass(frozen=True)
class LessThanResult:
    verdict: Verdict
    truncation: int
    lower_bound: int  # Ord of the family restricted to the truncation

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "truncation": self.truncation,
            "truncated_ord": self.lower_bound,
        }


def ord_less_than(F: SetFamily, alpha: Union[Ordinal, int], p: int) -> LessThanResult:
    """Decide Ord F < alpha + p by checking Ord F^sigma < alpha for every |sigma| = p.

    Explicit families are decided outright.  For an oracle family only the
    truncation to its ground set is visible: a refutation there is final
    (a subfamily has no larger Ord), a confirmation is reported as UNKNOWN.
    """
    alpha = Ordinal.of(alpha)
    if alpha == 0:
        raise OrdinalError("alpha must be positive")
    if p < 0:
        raise FamilyError("p must be a natural number")
    explicit = F.materialize()
    memo: dict = {}
    holds = True
    for sigma in itertools.combinations(sorted(explicit.ground), p):
        value = _ord_members(derive(explicit, sigma).members, memo)
        if not Ordinal.of(value) < alpha:
            holds = False
            break
    lower = _ord_members(explicit.members, memo)
    if not holds:
        verdict = Verdict.REFUTED
    elif F.is_explicit:
        verdict = Verdict.VERIFIED
    else:
        verdict = Verdict.UNKNOWN
    return LessThanResult(verdict, F.truncation, lower)
