"""Seeded Monte Carlo runs of the classical distillation procedure.

Only error patterns relative to Alice are sampled: the accept rule and
all estimated statistics depend on nothing else.  Phase errors have no
classical analogue here and stay an analytic input; the quantum oracle
module covers them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bits import BitPattern
from .keyrate import CadMask
from .noise import NoiseScenario

RNG_ALGORITHM = "numpy Philox4x64 (counter-based), keyed by SimConfig.seed"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


@dataclass(frozen=True)
class SimConfig:
    scenario: NoiseScenario
    mask: CadMask
    rounds: int
    seed: int

    def __post_init__(self) -> None:
        if self.rounds < 2 or self.rounds % 2:
            raise ValueError(f"rounds must be even and >= 2, got {self.rounds}")
        if self.mask.width != self.scenario.p:
            raise ValueError(
                f"mask width {self.mask.width} does not match party count {self.scenario.p}"
            )


@dataclass(frozen=True)
class SimResult:
    """Empirical acceptance and post-distillation error statistics.

    ``post_error_hat[j-1]`` estimates the error accounting the rate formula
    charges Bob_j with: for a Bob running CAD that is the both-rounds-flipped
    block count over the accepted count (converging to Q_AB^2 / p_a), and for
    a Bob with CAD off the plain disagreement rate on kept Left bits.
    Entries are NaN when no block was accepted.
    """

    blocks_total: int
    blocks_accepted: int
    p_accept_hat: float
    post_error_hat: tuple[float, ...]
    stderr_p_accept: float
    rng_algorithm: str = field(default=RNG_ALGORITHM)


def sample_round(s: NoiseScenario, rng: np.random.Generator) -> BitPattern:
    """One error pattern: bit i set with probability Q_AB_i, independently."""
    value = 0
    for q in s.link_noise:
        value = (value << 1) | int(rng.random() < q)
    return BitPattern(value, s.p)


def run_sim(c: SimConfig) -> SimResult:
    """Simulate N rounds and the pairwise parity checks on them.

    Rounds are shuffled once and paired consecutively into (Left, Right)
    blocks.  A block is accepted when every CAD-enabled Bob's error bits
    agree across the pair, i.e. his announced parity matches Alice's.
    Deterministic for a fixed config, including the seed.
    """
    rng = _rng(c.seed)
    n = c.rounds
    p = c.scenario.p
    noise = np.asarray(c.scenario.link_noise)
    errors = rng.random((n, p)) < noise[None, :]
    perm = rng.permutation(n)
    shuffled = errors[perm]
    left = shuffled[0::2]
    right = shuffled[1::2]

    on = np.array([c.mask.is_on(j) for j in range(1, p + 1)])
    accept = ~((left ^ right) & on[None, :]).any(axis=1)
    blocks = n // 2
    accepted = int(accept.sum())
    p_hat = accepted / blocks
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / blocks)

    post: list[float] = []
    for j in range(p):
        if accepted == 0:
            post.append(math.nan)
        elif on[j]:
            post.append(int((left[:, j] & right[:, j]).sum()) / accepted)
        else:
            post.append(int(left[accept, j].sum()) / accepted)
    return SimResult(
        blocks_total=blocks,
        blocks_accepted=accepted,
        p_accept_hat=p_hat,
        post_error_hat=tuple(post),
        stderr_p_accept=stderr,
    )
