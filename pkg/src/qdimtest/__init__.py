"""Certify the quantum dimension of a device from a basis-guessing test.

Bounds, an honest-device noise model, a seeded simulator and brute-force
verification of the entropic inequalities the bounds rest on.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    Family,
    ProtocolParams,
    Variant,
    asymptotic_table,
    bound_corollary,
    bound_exact,
    bound_mub_extractor,
    bound_stirling,
    optimize_threshold,
)
from .entropy import binary_entropy, binomial_cdf, binomial_tail
from .noisemodel import NoiseParams, figure3_sweep, honest_pass_prob, scale_noise
from .simulator import Strategy, confidence_lower, run_trials, strategy_store_k

__all__ = [
    "BoundReport",
    "Family",
    "NoiseParams",
    "ProtocolParams",
    "Strategy",
    "Variant",
    "asymptotic_table",
    "binary_entropy",
    "binomial_cdf",
    "binomial_tail",
    "bound_corollary",
    "bound_exact",
    "bound_mub_extractor",
    "bound_stirling",
    "confidence_lower",
    "figure3_sweep",
    "honest_pass_prob",
    "optimize_threshold",
    "run_trials",
    "scale_noise",
    "strategy_store_k",
]
