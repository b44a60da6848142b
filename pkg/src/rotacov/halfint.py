"""Exact half-integer labels for total-spin and magnetic quantum numbers.

Values are stored as ``twice`` (an int equal to 2j or 2m), which keeps
parity information exact and avoids the float ambiguities of 0.5-steps.
"""

from __future__ import annotations

import operator
from functools import total_ordering


@total_ordering
class HalfInt:
    """An exact half-integer, stored as twice its value."""

    __slots__ = ("twice",)

    def __init__(self, twice: int):
        object.__setattr__(self, "twice", operator.index(twice))

    def __setattr__(self, name, value):
        raise AttributeError("HalfInt is immutable")

    @staticmethod
    def of(value) -> "HalfInt":
        """Coerce an int, exact-half float, 'a/2' string, or HalfInt."""
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, float):
            tw = round(2 * value)
            if tw != 2 * value:
                raise ValueError(f"{value!r} is not an exact half-integer")
            return HalfInt(tw)
        if isinstance(value, str):
            s = value.strip()
            if "/" in s:
                num, _, den = s.partition("/")
                if den.strip() != "2":
                    raise ValueError(f"half-integer strings use 'p/2', got {value!r}")
                return HalfInt(int(num))
            return HalfInt(2 * int(s))
        try:
            return HalfInt(2 * operator.index(value))
        except TypeError:
            raise TypeError(f"cannot interpret {value!r} as a half-integer") from None

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.twice / 2

    def __int__(self) -> int:
        if self.twice % 2 != 0:
            raise ValueError(f"{self} is not an integer")
        return self.twice // 2

    def __add__(self, other):
        other = HalfInt.of(other)
        return HalfInt(self.twice + other.twice)

    __radd__ = __add__

    def __sub__(self, other):
        other = HalfInt.of(other)
        return HalfInt(self.twice - other.twice)

    def __rsub__(self, other):
        return HalfInt.of(other) - self

    def __neg__(self):
        return HalfInt(-self.twice)

    def __abs__(self):
        return HalfInt(abs(self.twice))

    def __eq__(self, other):
        if isinstance(other, (HalfInt, int)):
            return self.twice == HalfInt.of(other).twice
        return NotImplemented

    def __lt__(self, other):
        return self.twice < HalfInt.of(other).twice

    def __hash__(self):
        return hash(self.twice)

    def __str__(self) -> str:
        if self.twice % 2 == 0:
            return str(self.twice // 2)
        return f"{self.twice}/2"

    def __repr__(self) -> str:
        return f"HalfInt.of('{self}')"

    def same_parity(self, other) -> bool:
        return (self.twice - HalfInt.of(other).twice) % 2 == 0


ZERO = HalfInt(0)
HALF = HalfInt(1)
ONE = HalfInt(2)


def hrange(start, stop, step=HALF):
    """Half-integers from start to stop inclusive, by the given step."""
    start, stop, step = HalfInt.of(start), HalfInt.of(stop), HalfInt.of(step)
    out = []
    tw = start.twice
    while tw <= stop.twice:
        out.append(HalfInt(tw))
        tw += step.twice
    return out


def magnetic_range(j) -> list:
    """All m with |m| <= j and matching parity, ordered m = j down to -j."""
    j = HalfInt.of(j)
    return [HalfInt(tm) for tm in range(j.twice, -j.twice - 1, -2)]
