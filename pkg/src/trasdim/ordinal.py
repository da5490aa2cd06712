"""Ordinals below w^w in Cantor normal form, plus an infinity marker.

An ordinal ``w^k*c_k + ... + w*c_1 + c_0`` is stored as the coefficient
tuple ``(c_0, c_1, ..., c_k)`` with ``c_k != 0`` (the empty tuple is 0).
Every bound of the form ``w*m + n`` has coefficients ``(n, m)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Union

__all__ = [
    "Ordinal",
    "INFINITY",
    "ZERO",
    "OMEGA",
    "OrdinalError",
    "make",
    "compare",
    "add",
    "omega_times",
    "parse",
]


class OrdinalError(ArithmeticError):
    pass


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    coefficients: tuple[int, ...] = ()
    infinite: bool = False

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        if any(c < 0 for c in coeffs):
            raise OrdinalError(f"negative coefficient in {coeffs}")
        while coeffs and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if self.infinite:
            coeffs = ()
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def of(cls, value: Union["Ordinal", int]) -> "Ordinal":
        if isinstance(value, Ordinal):
            return value
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"cannot make an ordinal from {value!r}")
        return cls((value,))

    @property
    def is_finite(self) -> bool:
        """True for natural numbers (not for INFINITY)."""
        return not self.infinite and len(self.coefficients) <= 1

    @property
    def degree(self) -> int:
        """Exponent of the leading w-power; -1 for zero."""
        return len(self.coefficients) - 1

    def coefficient(self, k: int) -> int:
        return self.coefficients[k] if k < len(self.coefficients) else 0

    def __int__(self) -> int:
        if not self.is_finite:
            raise OrdinalError(f"{self} is not a natural number")
        return self.coefficient(0)

    def _key(self):
        if self.infinite:
            return (1, ())
        return (0, len(self.coefficients), tuple(reversed(self.coefficients)))

    def __eq__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.infinite == other.infinite and self.coefficients == other.coefficients

    def __hash__(self):
        return hash((self.infinite, self.coefficients))

    def __lt__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self._key() < other._key()

    def __add__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return add(self, other)

    def __radd__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return add(Ordinal.of(other), self)
        return NotImplemented

    def __str__(self) -> str:
        if self.infinite:
            return "INF"
        if not self.coefficients:
            return "0"
        terms = []
        for k in range(len(self.coefficients) - 1, -1, -1):
            c = self.coefficients[k]
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append(f"w*{c}")
            else:
                terms.append(f"w^{k}*{c}")
        return " + ".join(terms)

    def __repr__(self) -> str:
        return f"Ordinal({self})"


INFINITY = Ordinal(infinite=True)
ZERO = Ordinal()
OMEGA = Ordinal((0, 1))


def make(coefficients: Iterable[int]) -> Ordinal:
    return Ordinal(tuple(coefficients))


def omega_times(m: int, n: int = 0) -> Ordinal:
    """The ordinal w*m + n."""
    return Ordinal((n, m))


def compare(a: Ordinal, b: Ordinal) -> int:
    """-1, 0 or 1 as a is less than, equal to or greater than b."""
    a, b = Ordinal.of(a), Ordinal.of(b)
    if a == b:
        return 0
    return -1 if a < b else 1


def add(a: Ordinal, b: Ordinal) -> Ordinal:
    """Ordinal sum a + b; terms of a below the leading power of b are absorbed."""
    a, b = Ordinal.of(a), Ordinal.of(b)
    if a.infinite or b.infinite:
        raise OrdinalError("addition is undefined for INF")
    if not b.coefficients:
        return a
    k = b.degree
    out = list(b.coefficients) + [0] * max(0, len(a.coefficients) - len(b.coefficients))
    for i in range(k, len(a.coefficients)):
        out[i] += a.coefficients[i]
    return Ordinal(tuple(out))


_TERM = re.compile(r"^(?:w(?:\^(\d+))?(?:\*(\d+))?|(\d+))$")


def parse(text: str) -> Ordinal:
    """Inverse of ``str``: accepts e.g. ``"w^2*1 + w*3 + 4"``, ``"w"``, ``"INF"``."""
    text = text.strip()
    if text.upper() == "INF":
        return INFINITY
    # terms are read as a sum, so lower terms before a higher one are absorbed
    result = ZERO
    for raw in text.split("+"):
        term = raw.replace(" ", "")
        m = _TERM.match(term)
        if not m:
            raise ValueError(f"bad ordinal term {raw!r} in {text!r}")
        exp_s, coef_s, nat_s = m.groups()
        if nat_s is not None:
            piece = Ordinal((int(nat_s),))
        else:
            k = int(exp_s) if exp_s is not None else 1
            c = int(coef_s) if coef_s is not None else 1
            piece = Ordinal((0,) * k + (c,))
        result = add(result, piece)
    return result
