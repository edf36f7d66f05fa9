"""Star-network noise scenarios and the induced bit-error-pattern distribution.

A scenario gives each Alice-to-Bob link an independent flip probability;
the induced distribution assigns every error pattern over the Bobs its
probability.  Correlated noise enters only through ``direct_distribution``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .bits import MAX_WIDTH, BitPattern

_SUM_TOL = 1e-10
_DIRECT_SUM_TOL = 1e-9
_NEG_SLACK = 1e-12


@dataclass(frozen=True)
class NoiseScenario:
    """Per-link flip probabilities (each in [0, 0.5)) and phase error rate."""

    link_noise: tuple[float, ...]
    qx: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "link_noise", tuple(float(q) for q in self.link_noise))
        p = len(self.link_noise)
        if not 2 <= p <= MAX_WIDTH:
            raise ValueError(f"party count {p} outside [2, {MAX_WIDTH}]")
        for i, q in enumerate(self.link_noise, start=1):
            if not 0.0 <= q < 0.5:
                raise ValueError(f"link noise for Bob_{i} is {q}, outside [0, 0.5)")
        if not 0.0 <= self.qx <= 0.5:
            raise ValueError(f"phase error rate {self.qx} outside [0, 0.5]")

    @property
    def p(self) -> int:
        return len(self.link_noise)


@dataclass(frozen=True, eq=False)
class ErrorDistribution:
    """Dense probability of every error pattern, plus the phase error rate.

    ``probs[v]`` is the probability of the pattern with numeric value v
    (Bob_1 in the most significant bit).
    """

    p: int
    probs: np.ndarray
    qx: float

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (1 << self.p,):
            raise ValueError(f"expected {1 << self.p} pattern probabilities, got shape {probs.shape}")
        if float(probs.min(initial=0.0)) < -_NEG_SLACK:
            raise ValueError("negative pattern probability")
        probs = np.maximum(probs, 0.0)
        total = float(probs.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"pattern probabilities sum to {total}, not 1")
        if not -_NEG_SLACK <= self.qx <= 1.0 + _NEG_SLACK:
            raise ValueError(f"phase error rate {self.qx} outside [0, 1]")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "qx", float(min(max(self.qx, 0.0), 1.0)))

    def prob(self, pattern: Union[BitPattern, int]) -> float:
        v = pattern.value if isinstance(pattern, BitPattern) else int(pattern)
        return float(self.probs[v])

    def as_dict(self) -> dict[BitPattern, float]:
        return {BitPattern(v, self.p): float(q) for v, q in enumerate(self.probs)}


def distribution_from_scenario(s: NoiseScenario) -> ErrorDistribution:
    """Pattern distribution under independent links: a product over Bobs."""
    probs = np.ones(1)
    for q in s.link_noise:
        probs = np.kron(probs, np.array([1.0 - q, q]))
    return ErrorDistribution(p=s.p, probs=probs, qx=s.qx)


def direct_distribution(
    probs: Mapping[Union[BitPattern, str], float], qx: float, p: int | None = None
) -> ErrorDistribution:
    """Distribution from explicit per-pattern probabilities.

    Accepts patterns as ``BitPattern`` or bit strings; omitted patterns get
    probability zero.  The input must sum to 1 within 1e-9 and is then
    renormalized exactly.  This is the entry point for correlated noise
    that no product over links can express.
    """
    widths = set()
    entries: list[tuple[int, float]] = []
    for key, value in probs.items():
        pat = key if isinstance(key, BitPattern) else BitPattern.from_string(key)
        widths.add(pat.width)
        entries.append((pat.value, float(value)))
    if p is None:
        if len(widths) != 1:
            raise ValueError(f"ambiguous pattern width: {sorted(widths)}")
        p = widths.pop()
    elif widths and widths != {p}:
        raise ValueError(f"pattern widths {sorted(widths)} do not match p={p}")
    dense = np.zeros(1 << p)
    for value, q in entries:
        if q < -_NEG_SLACK:
            raise ValueError(f"negative probability {q} for pattern {value:0{p}b}")
        dense[value] += max(q, 0.0)
    total = float(dense.sum())
    if abs(total - 1.0) > _DIRECT_SUM_TOL:
        raise ValueError(f"pattern probabilities sum to {total}, not 1")
    return ErrorDistribution(p=p, probs=dense / total, qx=qx)


def marginal_link_error(d: ErrorDistribution, j: int) -> float:
    """Bit error rate between Alice and Bob_j: total mass of patterns with bit j set."""
    if not 1 <= j <= d.p:
        raise IndexError(f"Bob index {j} outside 1..{d.p}")
    idx = np.arange(1 << d.p)
    bit = (idx >> (d.p - j)) & 1
    return float(d.probs[bit == 1].sum())
