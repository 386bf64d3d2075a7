"""Eigenvalue and trace based test statistics with thresholded decisions."""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np
import numpy.typing as npt

from specsense.wishart.core import (
    ComplexMatrix,
    Hypothesis,
    NumericalError,
    hermitian_eigenvalues,
    sample_covariance,
)

# Eigenvalues below this fraction of the largest are treated as zero
RANK_RTOL = 1e-12
# Tolerated negative rounding in eigenvalues of PSD matrices
NEGATIVE_EIG_RTOL = 1e-10

EigenvalueInput = Union[Sequence[float], npt.NDArray[np.float64]]


class DegenerateInput(NumericalError):
    """Raised when data cannot produce a finite statistic (zero trace, rank loss)."""
    pass


class Orientation(str, Enum):
    """Side of the threshold on which H1 is declared."""
    H1_ABOVE = "h1_above"
    H1_BELOW = "h1_below"


class DetectorKind(str, Enum):
    """Supported detectors."""
    JOHN = "john"
    SPHERICAL_TEST = "st"
    SCALED_LARGEST_EIGENVALUE = "sle"
    EIGENVALUE_RATIO = "er"
    LARGEST_EIGENVALUE = "le"

    @property
    def orientation(self) -> Orientation:
        """H1 lies below the threshold only for the spherical test."""
        if self is DetectorKind.SPHERICAL_TEST:
            return Orientation.H1_BELOW
        return Orientation.H1_ABOVE

    @property
    def needs_eigenvalues(self) -> bool:
        return self is not DetectorKind.JOHN

    @property
    def scale_invariant(self) -> bool:
        return self is not DetectorKind.LARGEST_EIGENVALUE


@dataclass(frozen=True)
class Statistic:
    """A detector output value."""
    value: float
    kind: DetectorKind


def _as_eigenvalues(eigs: EigenvalueInput) -> npt.NDArray[np.float64]:
    values = np.asarray(eigs, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise ValueError("Eigenvalue list is empty")
    if not np.all(np.isfinite(values)):
        raise DegenerateInput("Eigenvalues must be finite")
    total = float(np.sum(np.abs(values)))
    if float(values.min()) < -NEGATIVE_EIG_RTOL * total:
        raise ValueError(f"Eigenvalues must be non-negative, got {values.tolist()}")
    return np.clip(values, 0.0, None)


def t_john(R: ComplexMatrix) -> Statistic:
    """John's statistic tr(R^2) / tr(R)^2, computed from traces only.

    Raises:
        DegenerateInput: If tr(R) is zero
    """
    R = np.asarray(R, dtype=np.complex128)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {R.shape}")
    K = R.shape[0]
    trace = float(np.trace(R).real)
    if trace <= 0.0:
        raise DegenerateInput("Sample covariance has zero trace")
    # For Hermitian R, tr(R^2) equals the squared Frobenius norm
    trace_sq = float(np.vdot(R, R).real)
    value = float(np.clip(trace_sq / trace ** 2, 1.0 / K, 1.0))
    return Statistic(value, DetectorKind.JOHN)


def t_st(eigs: EigenvalueInput) -> Statistic:
    """Spherical test: geometric over arithmetic mean of eigenvalues, to the K-th power."""
    values = _as_eigenvalues(eigs)
    mean = float(values.mean())
    if mean <= 0.0:
        raise DegenerateInput("Eigenvalues sum to zero")
    value = float(np.prod(values / mean))
    return Statistic(min(value, 1.0), DetectorKind.SPHERICAL_TEST)


def t_sle(eigs: EigenvalueInput) -> Statistic:
    """Scaled largest eigenvalue lambda_1 / sum(lambda)."""
    values = _as_eigenvalues(eigs)
    total = float(values.sum())
    if total <= 0.0:
        raise DegenerateInput("Eigenvalues sum to zero")
    return Statistic(float(values.max()) / total, DetectorKind.SCALED_LARGEST_EIGENVALUE)


def t_er(eigs: EigenvalueInput) -> Statistic:
    """Eigenvalue ratio lambda_1 / lambda_K.

    Raises:
        DegenerateInput: If the smallest eigenvalue is zero (N < K)
    """
    values = _as_eigenvalues(eigs)
    largest = float(values.max())
    smallest = float(values.min())
    if largest <= 0.0 or smallest <= RANK_RTOL * largest:
        raise DegenerateInput("Smallest eigenvalue is zero; eigenvalue ratio needs N >= K")
    return Statistic(largest / smallest, DetectorKind.EIGENVALUE_RATIO)


def t_le(eigs: EigenvalueInput, noise_power: float = 1.0) -> Statistic:
    """Largest eigenvalue referenced to the known noise power."""
    if noise_power <= 0:
        raise ValueError(f"Noise power must be positive, got {noise_power}")
    values = _as_eigenvalues(eigs)
    return Statistic(float(values.max()) / noise_power, DetectorKind.LARGEST_EIGENVALUE)


def decide(stat: Statistic, threshold: float) -> Hypothesis:
    """Threshold decision; a tie goes to H0."""
    if not np.isfinite(threshold):
        raise ValueError(f"Threshold must be finite, got {threshold}")
    if stat.kind.orientation is Orientation.H1_ABOVE:
        return Hypothesis.H1 if stat.value > threshold else Hypothesis.H0
    return Hypothesis.H1 if stat.value < threshold else Hypothesis.H0


def statistic_from_covariance(kind: DetectorKind, R: ComplexMatrix, noise_power: float = 1.0) -> Statistic:
    """Evaluate any detector on a single sample covariance matrix."""
    if kind is DetectorKind.JOHN:
        return t_john(R)
    eigs = hermitian_eigenvalues(R)
    if kind is DetectorKind.SPHERICAL_TEST:
        return t_st(eigs)
    if kind is DetectorKind.SCALED_LARGEST_EIGENVALUE:
        return t_sle(eigs)
    if kind is DetectorKind.EIGENVALUE_RATIO:
        return t_er(eigs)
    return t_le(eigs, noise_power)


def compute_statistics(
    kind: DetectorKind,
    X: ComplexMatrix,
    noise_power: float = 1.0
) -> npt.NDArray[np.float64]:
    """Evaluate a detector over a (trials, K, N) batch of data matrices.

    Agrees with the scalar functions above; John's statistic is taken from
    traces, every other detector from batched Hermitian eigenvalues.

    Raises:
        DegenerateInput: On zero-trace data, or N < K for the eigenvalue ratio
    """
    X = np.asarray(X)
    if X.ndim != 3:
        raise ValueError(f"Expected a (trials, K, N) batch, got shape {X.shape}")
    _, K, N = X.shape
    if kind is DetectorKind.EIGENVALUE_RATIO and N < K:
        raise DegenerateInput(f"Eigenvalue ratio needs N >= K, got N={N}, K={K}")
    if kind is DetectorKind.LARGEST_EIGENVALUE and noise_power <= 0:
        raise ValueError(f"Noise power must be positive, got {noise_power}")

    R = sample_covariance(X)
    traces = np.einsum("tkk->t", R).real
    if np.any(traces <= 0.0):
        raise DegenerateInput("Sample covariance has zero trace")

    if kind is DetectorKind.JOHN:
        trace_sq = np.sum(R.real ** 2 + R.imag ** 2, axis=(1, 2))
        return np.clip(trace_sq / traces ** 2, 1.0 / K, 1.0)

    eigs = np.clip(np.linalg.eigvalsh(R), 0.0, None)
    largest = eigs[:, -1]
    if kind is DetectorKind.SPHERICAL_TEST:
        means = traces / K
        return np.minimum(np.prod(eigs / means[:, None], axis=1), 1.0)
    if kind is DetectorKind.SCALED_LARGEST_EIGENVALUE:
        return largest / traces
    if kind is DetectorKind.EIGENVALUE_RATIO:
        smallest = eigs[:, 0]
        if np.any(smallest <= RANK_RTOL * largest):
            raise DegenerateInput("Smallest eigenvalue is zero; eigenvalue ratio needs N >= K")
        return largest / smallest
    return largest / noise_power


def decide_batch(
    kind: DetectorKind,
    values: npt.NDArray[np.float64],
    threshold: float
) -> npt.NDArray[np.bool_]:
    """Vectorized ``decide``: True where H1 is declared."""
    if not np.isfinite(threshold):
        raise ValueError(f"Threshold must be finite, got {threshold}")
    if kind.orientation is Orientation.H1_ABOVE:
        return values > threshold
    return values < threshold
