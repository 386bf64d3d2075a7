"""Complex Wishart primitives: seeded sampling, factorizations and covariances."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

from specsense.utils.logging import get_logger

logger = get_logger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
RealVector = npt.NDArray[np.float64]

HERMITIAN_RTOL = 1e-12
_UINT64_LIMIT = 2 ** 64
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class NumericalError(Exception):
    """Base class for numeric failures surfaced to callers."""
    pass


class NotPositiveDefinite(NumericalError):
    """Raised when a covariance matrix is not Hermitian positive definite."""
    pass


class NotHermitian(NumericalError):
    """Raised when a matrix fails the Hermitian tolerance check."""
    pass


class ZeroChannel(NumericalError):
    """Raised when a primary user channel vector has zero norm."""
    pass


class Hypothesis(str, Enum):
    """Sensing hypotheses."""
    H0 = "H0"
    H1 = "H1"


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream keyed by (seed, stream_id).

    Generators are built from numpy's ``SeedSequence`` so that a given key
    always yields the same draws, and trial chunks get their own
    independent sub-streams via ``chunk``.
    """
    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= value < _UINT64_LIMIT:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        """Generator for the stream as a whole."""
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,)))
        )

    def chunk(self, index: int) -> np.random.Generator:
        """Generator for trial chunk ``index`` of this stream."""
        if index < 0:
            raise ValueError(f"Chunk index must be non-negative, got {index}")
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, index)))
        )

    def child(self, label: int) -> "RngStream":
        """Derive a distinct stream of the same seed for a labelled purpose."""
        mixed = (self.stream_id * _GOLDEN_GAMMA + label + 1) % _UINT64_LIMIT
        return RngStream(self.seed, mixed)


RandomSource = Union[RngStream, np.random.Generator]


def as_generator(rng: RandomSource) -> np.random.Generator:
    """Normalize an ``RngStream`` or numpy ``Generator`` to a ``Generator``."""
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def complex_normal(gen: np.random.Generator, shape: Sequence[int]) -> ComplexMatrix:
    """Circularly-symmetric complex Gaussian array with unit variance."""
    draws = gen.standard_normal((*shape, 2))
    out = np.empty(tuple(shape), dtype=np.complex128)
    out.real = draws[..., 0]
    out.imag = draws[..., 1]
    out *= np.sqrt(0.5)
    return out


def sample_standard_complex_gaussian(rows: int, cols: int, rng: RandomSource) -> ComplexMatrix:
    """Draw a rows x cols matrix of i.i.d. standard complex Gaussians.

    Args:
        rows: Number of rows (>= 1)
        cols: Number of columns (>= 1)
        rng: Stream or generator to draw from

    Returns:
        Complex matrix whose entries have real and imaginary parts of variance 1/2
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"Matrix dimensions must be positive, got {rows}x{cols}")
    return complex_normal(as_generator(rng), (rows, cols))


def ensure_hermitian(A: ComplexMatrix) -> None:
    """Check that ``A`` is square and Hermitian within tolerance.

    Raises:
        NotHermitian: If the matrix is not square or not Hermitian
    """
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotHermitian(f"Expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NotHermitian("Matrix has non-finite entries")
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    deviation = float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0
    if deviation > HERMITIAN_RTOL * scale:
        raise NotHermitian(f"Matrix is not Hermitian: max |A - A^H| = {deviation:.3e}")


def cholesky_lower(sigma: ComplexMatrix) -> ComplexMatrix:
    """Lower-triangular Cholesky factor L with L L^H = sigma.

    Raises:
        NotHermitian: If sigma is not Hermitian
        NotPositiveDefinite: If sigma is not positive definite
    """
    sigma = np.asarray(sigma, dtype=np.complex128)
    ensure_hermitian(sigma)
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"Covariance is not positive definite: {e}") from e


def sample_data_matrix(sigma: ComplexMatrix, N: int, rng: RandomSource) -> ComplexMatrix:
    """Draw a K x N data matrix X = L G with E[X X^H] = N sigma."""
    if N < 1:
        raise ValueError(f"Sample size N must be positive, got {N}")
    L = cholesky_lower(sigma)
    G = sample_standard_complex_gaussian(L.shape[0], N, rng)
    return L @ G


def sample_data_batch(
    factor: Optional[ComplexMatrix],
    K: int,
    N: int,
    trials: int,
    gen: np.random.Generator
) -> ComplexMatrix:
    """Draw a (trials, K, N) batch of data matrices.

    Args:
        factor: Cholesky factor of the population covariance, or None for
            the white case (identity covariance)
        K: Number of sensors
        N: Number of samples per sensor
        trials: Number of independent matrices
        gen: Generator to draw from

    Returns:
        Complex array of shape (trials, K, N)
    """
    G = complex_normal(gen, (trials, K, N))
    if factor is None:
        return G
    return np.matmul(factor, G)


def sample_covariance(X: ComplexMatrix) -> ComplexMatrix:
    """Sample covariance R = X X^H (batched over leading axes)."""
    X = np.asarray(X)
    return np.matmul(X, np.conj(np.swapaxes(X, -1, -2)))


def hermitian_eigenvalues(A: ComplexMatrix) -> RealVector:
    """Eigenvalues of a Hermitian matrix in descending order.

    Raises:
        NotHermitian: If the Hermitian check fails
    """
    A = np.asarray(A, dtype=np.complex128)
    ensure_hermitian(A)
    return np.linalg.eigvalsh(A)[::-1].copy()


def _unit_vector(h: npt.ArrayLike, K: int) -> npt.NDArray[np.complex128]:
    vec = np.asarray(h, dtype=np.complex128).reshape(-1)
    if vec.shape[0] != K:
        raise ValueError(f"Channel vector has length {vec.shape[0]}, expected {K}")
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ZeroChannel("Channel vector has zero norm")
    return vec / norm


def build_sigma_h1(
    snrs: Sequence[float],
    channels: Sequence[npt.ArrayLike],
    noise_power: float,
    K: Optional[int] = None
) -> ComplexMatrix:
    """Population covariance sigma^2 (I + sum_i SNR_i u_i u_i^H).

    Args:
        snrs: Linear per-user SNRs (>= 0)
        channels: One length-K channel vector per primary user
        noise_power: Noise power sigma^2 (> 0)
        K: Number of sensors; required only when there are no channels

    Returns:
        Hermitian positive definite K x K covariance

    Raises:
        ZeroChannel: If any channel vector is zero
    """
    if len(snrs) != len(channels):
        raise ValueError(f"Got {len(snrs)} SNRs but {len(channels)} channels")
    if noise_power <= 0:
        raise ValueError(f"Noise power must be positive, got {noise_power}")
    if K is None:
        if not channels:
            raise ValueError("K is required when no channels are given")
        K = int(np.asarray(channels[0]).size)

    sigma = np.eye(K, dtype=np.complex128)
    for snr, h in zip(snrs, channels):
        if snr < 0:
            raise ValueError(f"SNR must be non-negative, got {snr}")
        u = _unit_vector(h, K)
        sigma += snr * np.outer(u, u.conj())
    sigma = noise_power * sigma
    return 0.5 * (sigma + sigma.conj().T)


def draw_channels(K: int, P: int, rng: RandomSource) -> ComplexMatrix:
    """Draw a K x P channel matrix with standard complex Gaussian entries."""
    if P == 0:
        return np.empty((K, 0), dtype=np.complex128)
    return sample_standard_complex_gaussian(K, P, rng)


def random_unitary(K: int, rng: RandomSource) -> ComplexMatrix:
    """Haar-distributed K x K unitary matrix."""
    Z = sample_standard_complex_gaussian(K, K, rng)
    Q, R = np.linalg.qr(Z)
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases


def sigma_from_spectrum(spectrum: Sequence[float], rng: Optional[RandomSource] = None) -> ComplexMatrix:
    """Covariance with a prescribed spectrum, U diag(spectrum) U^H.

    Detector statistics depend on the covariance only through its
    eigenvalues, so any unitary U reproduces the same sensing performance.
    U is the identity unless an ``rng`` is supplied.
    """
    values = np.asarray(spectrum, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("Spectrum must be a non-empty list of eigenvalues")
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise NotPositiveDefinite(f"Spectrum must be finite and positive, got {values.tolist()}")
    if rng is None:
        return np.diag(values).astype(np.complex128)
    U = random_unitary(values.size, rng)
    sigma = (U * values) @ U.conj().T
    return 0.5 * (sigma + sigma.conj().T)
