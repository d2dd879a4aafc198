"""Rotor walks, stack walks and transfinite walks on countable Markov chains.

The package pairs a deterministic walk engine with exact rational Markov
chain solvers so that the classical discrepancy bounds (hitting frequencies,
hitting times, occupation frequencies) can be machine-checked with no
floating-point slack, plus the square-lattice specialization with its
potential-kernel hitting probabilities.
"""

from ._speed import KERNEL_IMPL
from .chains import (
    ChainFamily,
    MarkovChain,
    PotentialVector,
    build_chain,
    chain_to_json,
    escape_prob,
    expected_visits,
    laplacian,
    load_chain_json,
    redirect_to,
    solve_hitting_prob,
    solve_hitting_time,
    solve_stationary,
    split_and_truncate,
)
from .engine import (
    PotentialTracker,
    RotorConfig,
    RotorMechanism,
    WalkState,
    check_key_identity,
    derive_mechanism,
    detect_period,
    next_emission_config,
    run_until,
    step,
)
from .bounds import (
    BoundConstant,
    DiscrepancyReport,
    TheoremSetup,
    apply_setup,
    compute_constant,
    time_dependent_constant,
    verify_theorem,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_IMPL",
    "ChainFamily",
    "MarkovChain",
    "PotentialVector",
    "build_chain",
    "chain_to_json",
    "escape_prob",
    "expected_visits",
    "laplacian",
    "load_chain_json",
    "redirect_to",
    "solve_hitting_prob",
    "solve_hitting_time",
    "solve_stationary",
    "split_and_truncate",
    "PotentialTracker",
    "RotorConfig",
    "RotorMechanism",
    "WalkState",
    "check_key_identity",
    "derive_mechanism",
    "detect_period",
    "next_emission_config",
    "run_until",
    "step",
    "BoundConstant",
    "DiscrepancyReport",
    "TheoremSetup",
    "apply_setup",
    "compute_constant",
    "time_dependent_constant",
    "verify_theorem",
    "__version__",
]
