"""Bit patterns over {0,1}^p and the binary entropy function.

Patterns index per-Bob flag and error strings: bit 1 belongs to Bob_1 and
is the most significant (leftmost) bit of the string form, so the string
rendering matches labels like "B_1 B_2" read left to right.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log2

import numpy as np

MAX_WIDTH = 16

_DOMAIN_SLACK = 1e-12


def binary_entropy(x: float) -> float:
    """Binary Shannon entropy h(x) in bits, with h(0) = h(1) = 0.

    Inputs within 1e-12 outside [0, 1] are clamped (float drift from
    upstream arithmetic); larger violations raise ValueError.

    >>> binary_entropy(0.5)
    1.0
    >>> binary_entropy(0.0)
    0.0
    """
    if x < 0.0:
        if x < -_DOMAIN_SLACK:
            raise ValueError(f"entropy argument {x!r} outside [0, 1]")
        x = 0.0
    elif x > 1.0:
        if x > 1.0 + _DOMAIN_SLACK:
            raise ValueError(f"entropy argument {x!r} outside [0, 1]")
        x = 1.0
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * log2(x) - (1.0 - x) * log2(1.0 - x)


def binary_entropy_arr(x: np.ndarray) -> np.ndarray:
    """Elementwise h over an array whose entries are already in [0, 1]."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inner = (x > 0.0) & (x < 1.0)
    xi = x[inner]
    out[inner] = -xi * np.log2(xi) - (1.0 - xi) * np.log2(1.0 - xi)
    return out


@dataclass(frozen=True)
class BitPattern:
    """A ``width``-bit string; bit i is Bob_i's flag (1-indexed, Bob_1 leftmost)."""

    value: int
    width: int

    def __post_init__(self) -> None:
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"pattern width {self.width} outside [1, {MAX_WIDTH}]")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def from_string(cls, bits: str) -> "BitPattern":
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bit string: {bits!r}")
        return cls(int(bits, 2), len(bits))

    def bit(self, i: int) -> int:
        """Bob_i's bit, i in 1..width."""
        if not 1 <= i <= self.width:
            raise IndexError(f"bit index {i} outside 1..{self.width}")
        return (self.value >> (self.width - i)) & 1

    def popcount(self) -> int:
        return self.value.bit_count()

    def complement(self) -> "BitPattern":
        return BitPattern(self.value ^ ((1 << self.width) - 1), self.width)

    def _check_width(self, other: "BitPattern") -> None:
        if self.width != other.width:
            raise ValueError(f"width mismatch: {self.width} vs {other.width}")

    def __xor__(self, other: "BitPattern") -> "BitPattern":
        self._check_width(other)
        return BitPattern(self.value ^ other.value, self.width)

    def __and__(self, other: "BitPattern") -> "BitPattern":
        self._check_width(other)
        return BitPattern(self.value & other.value, self.width)

    def __str__(self) -> str:
        return format(self.value, f"0{self.width}b")


def enumerate_patterns(p: int) -> list[BitPattern]:
    """All 2^p patterns of width p in ascending numeric order."""
    if not 1 <= p <= MAX_WIDTH:
        raise ValueError(f"party count {p} outside [1, {MAX_WIDTH}]")
    return [BitPattern(v, p) for v in range(1 << p)]
