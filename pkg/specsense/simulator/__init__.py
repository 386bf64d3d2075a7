"""Monte Carlo estimation of sensing performance."""

from specsense.simulator.engine import (
    EstimateWithCI,
    InsufficientTrials,
    MonteCarloEngine,
    PfaCurve,
    RocCurve,
    RocPoint,
    approximation_error_study,
    empirical_threshold,
    estimate_pd_mc,
    estimate_pfa_mc,
    pfa_curve,
    resolve_sigma,
    roc,
    simulate_t_john_h0,
)

__all__ = [
    "EstimateWithCI",
    "InsufficientTrials",
    "MonteCarloEngine",
    "PfaCurve",
    "RocCurve",
    "RocPoint",
    "approximation_error_study",
    "empirical_threshold",
    "estimate_pd_mc",
    "estimate_pfa_mc",
    "pfa_curve",
    "resolve_sigma",
    "roc",
    "simulate_t_john_h0",
]
