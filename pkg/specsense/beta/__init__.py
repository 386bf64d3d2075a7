"""Generalized Beta approximation for John's detector."""

from specsense.beta.approx import (
    BetaFit,
    DegenerateMoments,
    DomainError,
    NoConvergence,
    beta_fit_for,
    beta_pdf,
    cdf_tj_approx,
    fit_generalized_beta,
    generalized_beta_moment,
    incomplete_beta_lower,
    pfa,
    threshold_for_pfa,
)

__all__ = [
    "BetaFit",
    "DegenerateMoments",
    "DomainError",
    "NoConvergence",
    "beta_fit_for",
    "beta_pdf",
    "cdf_tj_approx",
    "fit_generalized_beta",
    "generalized_beta_moment",
    "incomplete_beta_lower",
    "pfa",
    "threshold_for_pfa",
]
