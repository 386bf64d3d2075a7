"""Exact moment theory of John's statistic under H0."""

from specsense.moments.exact import (
    Composition,
    InvalidDims,
    TooLarge,
    compositions,
    gamma_determinant_identity,
    moment_sum_lambda_sq,
    moment_table,
    moment_tj,
    moment_trace_power,
    monomial_moment_by_permutations,
)

__all__ = [
    "Composition",
    "InvalidDims",
    "TooLarge",
    "compositions",
    "gamma_determinant_identity",
    "moment_sum_lambda_sq",
    "moment_table",
    "moment_tj",
    "moment_trace_power",
    "monomial_moment_by_permutations",
]
