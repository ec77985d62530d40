"""n-bit strings over {0,1}^n.

Strings are stored as integers. The display convention is most significant
bit first, so bit 1 is the leftmost character: ``BitString(8, 0b00111001)``
prints as ``00111001``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

__all__ = [
    "BitString",
    "cardinality",
    "is_disjoint",
    "enumerate_fixed_weight",
    "binomial",
    "isqrt_exact",
]

MAX_BINOMIAL_N = 62


@dataclass(frozen=True, order=True)
class BitString:
    n: int
    value: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"negative length {self.n}")
        if not 0 <= self.value < (1 << self.n) and not (self.n == 0 and self.value == 0):
            raise ValueError(f"value {self.value} does not fit in {self.n} bits")

    @classmethod
    def parse(cls, text: str) -> "BitString":
        if text and set(text) - {"0", "1"}:
            raise ValueError(f"not a binary string: {text!r}")
        return cls(len(text), int(text, 2) if text else 0)

    def bit(self, i: int) -> int:
        """Bit ``i`` counted from 1 at the leftmost position."""
        if not 1 <= i <= self.n:
            raise IndexError(i)
        return (self.value >> (self.n - i)) & 1

    def __str__(self) -> str:
        return format(self.value, f"0{self.n}b") if self.n else ""

    def __int__(self) -> int:
        return self.value


def _value(x) -> int:
    return x.value if isinstance(x, BitString) else int(x)


def cardinality(x) -> int:
    """Number of ones in ``x``."""
    return _value(x).bit_count()


def is_disjoint(x, y) -> bool:
    """True iff no position holds a one in both strings."""
    if isinstance(x, BitString) and isinstance(y, BitString) and x.n != y.n:
        raise ValueError(f"length mismatch: {x.n} vs {y.n}")
    return _value(x) & _value(y) == 0


def enumerate_fixed_weight(n: int, w: int) -> list[BitString]:
    """All weight-``w`` strings of length ``n`` in ascending numeric order."""
    if n < 0 or not 0 <= w <= n:
        raise ValueError(f"weight {w} outside [0, {n}]")
    values = sorted(sum(1 << i for i in combo) for combo in itertools.combinations(range(n), w))
    return [BitString(n, v) for v in values]


def binomial(n: int, k: int) -> int:
    if not 0 <= k <= n <= MAX_BINOMIAL_N:
        raise ValueError(f"binomial({n}, {k}) requires 0 <= k <= n <= {MAX_BINOMIAL_N}")
    return math.comb(n, k)


def isqrt_exact(n: int) -> int:
    """Integer square root of a perfect square; anything else is rejected."""
    if n < 1:
        raise ValueError(f"n must be a positive perfect square, got {n}")
    r = math.isqrt(n)
    if r * r != n:
        raise ValueError(f"n must be a perfect square (1, 4, 9, 16, ...), got {n}")
    return r
