"""Analysis toolkit for GHZ conference key agreement with selective CAD."""

from .bits import BitPattern, binary_entropy, enumerate_patterns
from .keyrate import (
    CadMask,
    DegenerateAcceptanceError,
    KeyRateReport,
    NuVector,
    acceptance_set,
    best_mask,
    entropy_bound,
    entropy_objective,
    key_rate,
    leak_ec,
    no_cad_rate,
    p_accept,
    post_cad_error,
    tau,
)
from .noise import (
    ErrorDistribution,
    NoiseScenario,
    direct_distribution,
    distribution_from_scenario,
    marginal_link_error,
)
from .oracle import AttackState, DensityState, PureState
from .simulate import SimConfig, SimResult, run_sim, sample_round

__all__ = [
    "AttackState",
    "DensityState",
    "PureState",
    "SimConfig",
    "SimResult",
    "run_sim",
    "sample_round",
    "BitPattern",
    "CadMask",
    "DegenerateAcceptanceError",
    "ErrorDistribution",
    "KeyRateReport",
    "NoiseScenario",
    "NuVector",
    "acceptance_set",
    "best_mask",
    "binary_entropy",
    "direct_distribution",
    "distribution_from_scenario",
    "entropy_bound",
    "entropy_objective",
    "enumerate_patterns",
    "key_rate",
    "leak_ec",
    "marginal_link_error",
    "no_cad_rate",
    "p_accept",
    "post_cad_error",
    "tau",
]
