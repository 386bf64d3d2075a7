"""Complex Wishart sampling and covariance primitives."""

from specsense.wishart.core import (
    ComplexMatrix,
    Hypothesis,
    NotHermitian,
    NotPositiveDefinite,
    NumericalError,
    RngStream,
    ZeroChannel,
    build_sigma_h1,
    cholesky_lower,
    hermitian_eigenvalues,
    sample_covariance,
    sample_data_matrix,
    sample_standard_complex_gaussian,
    sigma_from_spectrum,
)

__all__ = [
    "ComplexMatrix",
    "Hypothesis",
    "NotHermitian",
    "NotPositiveDefinite",
    "NumericalError",
    "RngStream",
    "ZeroChannel",
    "build_sigma_h1",
    "cholesky_lower",
    "hermitian_eigenvalues",
    "sample_covariance",
    "sample_data_matrix",
    "sample_standard_complex_gaussian",
    "sigma_from_spectrum",
]
