"""m-strategies, certificate checking, and the two ways of building strategies.

A play of an m-strategy is a tuple (s_0, ..., s_m) of pairwise disjoint
finite sets with |s_0| = start and |s_(k+1)| fixed by the strategy from the
prefix (s_0, ..., s_k).  Any set of the prescribed size is an admissible
move, so a strategy is just the rule for the next size.  It certifies
Ord F <= w*m + n (with start = n + 1) for an inclusive family F when no play
has its union in F.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence, Union

from .setfamily import SetFamily, derive, ord_of

__all__ = [
    "StrategyError",
    "AffineRule",
    "TableRule",
    "APDProfile",
    "Strategy",
    "CertificateStatus",
    "CertificateReport",
    "check_certificate",
    "verify_play",
    "strategy_from_profile",
    "strategy_from_family",
    "rule_from_json",
    "strategy_from_json",
]

MAX_TRUNCATION = 16
MAX_ROUNDS = 3


class StrategyError(ValueError):
    pass


@dataclass(frozen=True)
class AffineRule:
    """x -> a*x + b."""

    a: int
    b: int

    def __post_init__(self):
        if self.a < 0:
            raise StrategyError(f"affine rule {self.a}*x + {self.b} is decreasing")
        if self.a + self.b < 1:
            raise StrategyError(f"affine rule {self.a}*x + {self.b} is not positive on the positive integers")

    def __call__(self, x: int) -> int:
        return self.a * x + self.b

    def to_json(self) -> dict:
        return {"type": "affine", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class TableRule:
    """Lookup table on positive integers.

    With ``hold`` set, an argument beyond the table takes the value at the
    largest tabulated argument below it (the least non-decreasing extension).
    """

    values: tuple[tuple[int, int], ...]
    hold: bool = False

    def __post_init__(self):
        items = tuple(sorted((int(k), int(v)) for k, v in dict(self.values).items()))
        if not items:
            raise StrategyError("empty rule table")
        object.__setattr__(self, "values", items)
        for (k1, v1), (k2, v2) in zip(items, items[1:]):
            if v2 < v1:
                raise StrategyError(f"rule table decreases between {k1} and {k2}")
        if items[0][1] < 1:
            raise StrategyError("rule values must be positive")

    @classmethod
    def of(cls, mapping: Mapping[int, int], hold: bool = False) -> "TableRule":
        return cls(tuple(mapping.items()), hold)

    @property
    def domain(self) -> list[int]:
        return [k for k, _ in self.values]

    def __call__(self, x: int) -> int:
        table = dict(self.values)
        if x in table:
            return table[x]
        if self.hold and x > self.values[0][0]:
            return max((k, v) for k, v in self.values if k <= x)[1]
        raise StrategyError(f"rule table has no value at {x}")

    def to_json(self) -> dict:
        return {"type": "table", "values": {str(k): v for k, v in self.values}, "hold": self.hold}


Rule = Union[AffineRule, TableRule]


def rule_from_json(doc) -> Rule:
    if isinstance(doc, int):
        return AffineRule(0, doc)
    kind = doc.get("type")
    if kind == "affine":
        return AffineRule(int(doc["a"]), int(doc.get("b", 0)))
    if kind == "constant":
        return AffineRule(0, int(doc["value"]))
    if kind == "table":
        return TableRule.of({int(k): int(v) for k, v in doc["values"].items()}, bool(doc.get("hold", False)))
    raise StrategyError(f"unknown rule type {kind!r}")


@dataclass(frozen=True)
class APDProfile:
    """An integral APD profile (alpha_0, alpha_1, ..., alpha_m); alpha_0 is a constant."""

    alpha0: int
    rules: tuple = ()

    def __post_init__(self):
        if self.alpha0 < 1:
            raise StrategyError("alpha_0 must be at least 1")
        object.__setattr__(self, "rules", tuple(self.rules))

    @property
    def m(self) -> int:
        return len(self.rules)

    def slot_counts(self, scales: Sequence[int]) -> list[int]:
        """Slot multiplicities for a scale tuple (r_0, ..., r_m): alpha_0, then alpha_i(r_(i-1))."""
        if len(scales) != self.m + 1:
            raise StrategyError(f"profile of length {self.m + 1} needs {self.m + 1} scales")
        return [self.alpha0] + [rule(scales[i]) for i, rule in enumerate(self.rules)]

    def to_json(self) -> dict:
        return {"alpha0": self.alpha0, "rules": [r.to_json() for r in self.rules]}

    @classmethod
    def from_json(cls, doc) -> "APDProfile":
        return cls(int(doc["alpha0"]), tuple(rule_from_json(r) for r in doc.get("rules", [])))


Prefix = tuple  # tuple of frozensets


@dataclass(frozen=True)
class Strategy:
    """Either uniform rules (size of s_(k+1) from max of s_0 | ... | s_k) or a decision table."""

    m: int
    start: int
    rules: Optional[tuple] = None
    table: Optional[Mapping] = field(default=None, compare=False)

    def __post_init__(self):
        if self.m < 0 or self.start < 1:
            raise StrategyError("need m >= 0 and start >= 1")
        if self.m == 0 and not self.rules and not self.table:
            object.__setattr__(self, "rules", None)
            object.__setattr__(self, "table", None)
        if self.rules is not None and self.table is not None:
            raise StrategyError("a strategy has one representation")
        if self.rules is not None:
            object.__setattr__(self, "rules", tuple(self.rules))
            if len(self.rules) != self.m:
                raise StrategyError(f"{self.m}-strategy needs {self.m} rules, got {len(self.rules)}")
        elif self.table is None and self.m > 0:
            raise StrategyError("a strategy with m > 0 needs rules or a table")

    def next_size(self, prefix: Prefix) -> int:
        if not prefix:
            return self.start
        k = len(prefix)
        if k > self.m:
            raise StrategyError("play is already complete")
        if self.rules is not None:
            return self.rules[k - 1](max(max(s) for s in prefix))
        try:
            return self.table[tuple(frozenset(s) for s in prefix)]
        except KeyError:
            raise StrategyError(f"decision table has no entry for {[sorted(s) for s in prefix]}") from None

    def to_json(self) -> dict:
        doc = {"m": self.m, "start": self.start}
        if self.rules is not None:
            doc["rules"] = [r.to_json() for r in self.rules]
        elif self.table is not None:
            doc["type"] = "table"
            doc["entries"] = [
                {"prefix": [sorted(s) for s in prefix], "size": size}
                for prefix, size in sorted(self.table.items(), key=lambda kv: _prefix_key(kv[0]))
            ]
        return doc


def _prefix_key(prefix) -> tuple:
    return tuple((len(s), sorted(s)) for s in prefix)


def strategy_from_json(doc) -> Strategy:
    m, start = int(doc["m"]), int(doc["start"])
    if doc.get("type") == "table":
        table = {
            tuple(frozenset(s) for s in e["prefix"]): int(e["size"])
            for e in doc.get("entries", [])
        }
        return Strategy(m, start, table=table)
    rules = doc.get("rules")
    return Strategy(m, start, rules=tuple(rule_from_json(r) for r in rules) if rules is not None else None)


class CertificateStatus(str, Enum):
    NO_COUNTEREXAMPLE = "NoCounterexampleAtTruncation"
    COUNTEREXAMPLE = "Counterexample"
    VACUOUS = "Vacuous"


@dataclass(frozen=True)
class CertificateReport:
    status: CertificateStatus
    plays_examined: int
    vacuous_plays: int
    truncation: tuple
    play: Optional[tuple] = None

    def to_json(self) -> dict:
        doc = {
            "status": self.status.value,
            "plays_examined": self.plays_examined,
            "vacuous_plays": self.vacuous_plays,
            "truncation": list(self.truncation),
        }
        if self.play is not None:
            doc["counterexample"] = [sorted(s) for s in self.play]
        return doc


def verify_play(S: Strategy, F: SetFamily, play: Sequence) -> bool:
    """A counterexample play: disjoint, sized by S, with union in F."""
    play = [frozenset(s) for s in play]
    if len(play) != S.m + 1:
        return False
    for a, b in itertools.combinations(play, 2):
        if a & b:
            return False
    for k in range(S.m + 1):
        if len(play[k]) != S.next_size(tuple(play[:k])):
            return False
    return frozenset().union(*play) in F


def check_certificate(S: Strategy, F: SetFamily, T: Optional[int] = None, *,
                      max_truncation: int = MAX_TRUNCATION, max_rounds: int = MAX_ROUNDS) -> CertificateReport:
    """Play every sequence following S over the truncated ground and look for a union in F.

    The ground is {1..T} when T is given, else F's own ground set.  Plays are
    enumerated lexicographically and the first counterexample is returned.  A
    prefix that demands more elements than remain counts as one vacuous play.
    The enumeration is exponential in T*m, so T and m are capped (raise the
    caps deliberately).
    """
    labels = list(range(1, T + 1)) if T is not None else sorted(F.ground)
    if len(labels) > max_truncation:
        raise StrategyError(f"truncation of {len(labels)} labels exceeds the cap {max_truncation}")
    if S.m > max_rounds:
        raise StrategyError(f"{S.m} rounds exceed the cap {max_rounds}")
    examined = 0
    vacuous = 0

    def play(prefix: tuple, remaining: tuple, union: frozenset):
        nonlocal examined, vacuous
        size = S.next_size(prefix)
        if size > len(remaining):
            vacuous += 1
            return None
        for combo in itertools.combinations(remaining, size):
            chosen = frozenset(combo)
            nxt = prefix + (chosen,)
            total = union | chosen
            if len(nxt) == S.m + 1:
                examined += 1
                if total in F:
                    return nxt
                continue
            rest = tuple(x for x in remaining if x not in chosen)
            found = play(nxt, rest, total)
            if found is not None:
                return found
        return None

    found = play((), tuple(labels), frozenset())
    if found is not None:
        status = CertificateStatus.COUNTEREXAMPLE
    elif examined == 0:
        status = CertificateStatus.VACUOUS
    else:
        status = CertificateStatus.NO_COUNTEREXAMPLE
    return CertificateReport(status, examined, vacuous, tuple(labels), found)


def strategy_from_profile(profile: APDProfile) -> Strategy:
    """Start at alpha_0; round k answers with alpha_k(max of everything played so far)."""
    return Strategy(profile.m, profile.alpha0, rules=profile.rules)


def strategy_from_family(F: SetFamily, m: int, n: int) -> Optional[Strategy]:
    """Decision-table m-strategy starting at n+1 whose plays all avoid F, or None.

    Each first move s_0 gets the least n_1 with Ord F^(s_0) <= w*(m-1) + n_1
    and the rest of the table comes recursively from F^(s_0).  For a finite
    family this fails only at m = 0, where it needs Ord F <= n.
    """
    if not F.is_explicit:
        F = F.materialize()
    if m == 0:
        return Strategy(0, n + 1) if int(ord_of(F)) <= n else None
    table: dict = {}
    _fill_table(F, m, n, (), frozenset(F.ground), table)
    return Strategy(m, n + 1, table=table)


def _fill_table(F: SetFamily, m: int, n: int, prefix: tuple, available: frozenset, table: dict):
    # F is already derived by every set in prefix; plays continue inside `available`
    for combo in itertools.combinations(sorted(available), n + 1):
        first = frozenset(combo)
        sub = derive(F, first)
        n1 = int(ord_of(sub)) if m == 1 else 0
        key = prefix + (first,)
        table[key] = n1 + 1
        if m > 1:
            _fill_table(sub, m - 1, n1, key, available - first, table)
