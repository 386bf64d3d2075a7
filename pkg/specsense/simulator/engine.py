"""Monte Carlo engine for false alarm, detection and ROC estimation."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence

import numpy as np
import numpy.typing as npt

from specsense.beta.approx import BetaFit, beta_fit_for, pfa, threshold_for_pfa
from specsense.config import Scenario, SimulationSettings, validate_pfa_grid
from specsense.detectors.statistics import DetectorKind, Orientation, compute_statistics, decide_batch
from specsense.utils.logging import get_logger, log_elapsed
from specsense.wishart.core import (
    ComplexMatrix,
    NumericalError,
    RngStream,
    build_sigma_h1,
    cholesky_lower,
    draw_channels,
    sample_data_batch,
    sigma_from_spectrum,
)

logger = get_logger(__name__)

DEFAULT_CHUNK_SIZE = 2048
MIN_TAIL_SAMPLES = 100

# Labels of derived streams used by a ROC run
STREAM_CALIBRATION = 1
STREAM_PFA = 2
STREAM_PD = 3
CHANNEL_STREAM_ID = 0


class InsufficientTrials(NumericalError):
    """Raised when a Monte Carlo budget cannot resolve the requested tail."""
    pass


@dataclass(frozen=True)
class EstimateWithCI:
    """Monte Carlo probability estimate with its binomial standard error."""
    value: float
    stderr: float
    trials: int

    @classmethod
    def from_counts(cls, hits: int, trials: int) -> "EstimateWithCI":
        """Build from a hit count out of ``trials``."""
        if trials < 1:
            raise ValueError(f"Trials must be positive, got {trials}")
        value = hits / trials
        return cls(value=value, stderr=math.sqrt(value * (1.0 - value) / trials), trials=trials)


@dataclass(frozen=True)
class RocPoint:
    """One ROC operating point."""
    pfa_target: float
    threshold: float
    pfa: EstimateWithCI
    pd: EstimateWithCI


@dataclass(frozen=True)
class RocCurve:
    """Operating points of one detector, in order of increasing target P_fa."""
    detector: DetectorKind
    points: List[RocPoint]


@dataclass(frozen=True)
class PfaCurve:
    """Analytic and simulated false alarm probability of John's detector on a threshold grid."""
    zeta: npt.NDArray[np.float64]
    analytic: npt.NDArray[np.float64]
    empirical: npt.NDArray[np.float64]
    stderr: npt.NDArray[np.float64]
    trials: int

    @property
    def average_error(self) -> float:
        """Mean absolute deviation between analytic and simulated values."""
        return float(np.mean(np.abs(self.analytic - self.empirical)))


@dataclass(frozen=True)
class ResolvedScenario:
    """Population covariance of a scenario and the channels that built it."""
    sigma: ComplexMatrix
    channels: Optional[ComplexMatrix] = None


class MonteCarloEngine:
    """Runs chunked trials on a thread pool.

    Chunk ``i`` always draws from ``rng.chunk(i)`` and results are gathered
    in chunk order, so outputs depend only on the seed, stream and chunk
    size, never on the number of threads.
    """

    def __init__(
        self,
        threads: int = 1,
        chunk_size: int = DEFAULT_CHUNK_SIZE,
        min_tail_samples: int = MIN_TAIL_SAMPLES
    ):
        """Initialize the engine.

        Args:
            threads: Worker threads for chunk evaluation
            chunk_size: Trials per chunk
            min_tail_samples: Expected tail samples required at the smallest
                calibrated false alarm probability
        """
        if threads < 1:
            raise ValueError(f"Threads must be positive, got {threads}")
        if chunk_size < 1:
            raise ValueError(f"Chunk size must be positive, got {chunk_size}")
        self.threads = threads
        self.chunk_size = chunk_size
        self.min_tail_samples = min_tail_samples
        self.executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    @classmethod
    def from_settings(cls, settings: SimulationSettings) -> "MonteCarloEngine":
        """Create an engine from run settings."""
        return cls(
            threads=settings.threads,
            chunk_size=settings.chunk_size,
            min_tail_samples=settings.min_tail_samples
        )

    def close(self) -> None:
        """Shut down the worker pool."""
        if self.executor is not None:
            self.executor.shutdown(wait=True)
            self.executor = None

    def __enter__(self) -> "MonteCarloEngine":
        return self

    def __exit__(self, *exc_info: Any) -> None:
        self.close()

    def simulate_statistics(
        self,
        kind: DetectorKind,
        K: int,
        N: int,
        trials: int,
        rng: RngStream,
        factor: Optional[ComplexMatrix] = None,
        noise_power: float = 1.0
    ) -> npt.NDArray[np.float64]:
        """Detector statistics over ``trials`` data matrices X = factor G.

        Args:
            kind: Detector to evaluate
            K: Number of sensors
            N: Number of samples
            trials: Number of trials
            rng: Stream whose chunks feed the trials
            factor: Cholesky factor of the population covariance; None means identity
            noise_power: Noise power the largest-eigenvalue detector is referenced to

        Returns:
            Statistic values in trial order
        """
        if trials < 1:
            raise ValueError(f"Trials must be positive, got {trials}")
        if K < 1 or N < 1:
            raise ValueError(f"K and N must be positive, got K={K}, N={N}")

        n_chunks = math.ceil(trials / self.chunk_size)

        def run_chunk(index: int) -> npt.NDArray[np.float64]:
            size = min(self.chunk_size, trials - index * self.chunk_size)
            X = sample_data_batch(factor, K, N, size, rng.chunk(index))
            return compute_statistics(kind, X, noise_power)

        with log_elapsed(logger, "Trials simulated", detector=kind.value, K=K, N=N,
                         trials=trials, chunks=n_chunks, threads=self.threads):
            if self.executor is None:
                parts = [run_chunk(index) for index in range(n_chunks)]
            else:
                parts = list(self.executor.map(run_chunk, range(n_chunks)))
        return np.concatenate(parts)


def _engine_or_default(engine: Optional[MonteCarloEngine]) -> MonteCarloEngine:
    return engine if engine is not None else MonteCarloEngine()


def _white_factor(K: int, noise_power: float) -> Optional[ComplexMatrix]:
    if noise_power == 1.0:
        return None
    return math.sqrt(noise_power) * np.eye(K, dtype=np.complex128)


def _estimate(kind: DetectorKind, values: npt.NDArray[np.float64], threshold: float) -> EstimateWithCI:
    hits = int(np.count_nonzero(decide_batch(kind, values, threshold)))
    return EstimateWithCI.from_counts(hits, values.size)


def simulate_h0(
    kind: DetectorKind,
    K: int,
    N: int,
    trials: int,
    rng: RngStream,
    noise_power: float = 1.0,
    engine: Optional[MonteCarloEngine] = None
) -> npt.NDArray[np.float64]:
    """Detector statistics under H0, Sigma = noise_power I."""
    return _engine_or_default(engine).simulate_statistics(
        kind, K, N, trials, rng, _white_factor(K, noise_power), noise_power
    )


def simulate_t_john_h0(
    K: int,
    N: int,
    trials: int,
    rng: RngStream,
    engine: Optional[MonteCarloEngine] = None
) -> npt.NDArray[np.float64]:
    """John's statistic under H0 with unit noise power."""
    return simulate_h0(DetectorKind.JOHN, K, N, trials, rng, engine=engine)


def estimate_pfa_mc(
    kind: DetectorKind,
    threshold: float,
    K: int,
    N: int,
    trials: int,
    rng: RngStream,
    noise_power: float = 1.0,
    engine: Optional[MonteCarloEngine] = None
) -> EstimateWithCI:
    """Fraction of H0 trials on which ``kind`` declares H1."""
    values = simulate_h0(kind, K, N, trials, rng, noise_power, engine)
    return _estimate(kind, values, threshold)


def estimate_pd_mc(
    kind: DetectorKind,
    threshold: float,
    sigma: ComplexMatrix,
    N: int,
    trials: int,
    rng: RngStream,
    noise_power: float = 1.0,
    engine: Optional[MonteCarloEngine] = None
) -> EstimateWithCI:
    """Fraction of H1 trials (population covariance ``sigma``) declared H1."""
    factor = cholesky_lower(sigma)
    values = _engine_or_default(engine).simulate_statistics(
        kind, factor.shape[0], N, trials, rng, factor, noise_power
    )
    return _estimate(kind, values, threshold)


def quantile_threshold(kind: DetectorKind, values: npt.NDArray[np.float64], target_pfa: float) -> float:
    """Orientation-aware empirical quantile achieving ``target_pfa`` on ``values``."""
    if kind.orientation is Orientation.H1_ABOVE:
        return float(np.quantile(values, 1.0 - target_pfa))
    return float(np.quantile(values, target_pfa))


def empirical_threshold(
    kind: DetectorKind,
    K: int,
    N: int,
    target_pfa: float,
    trials: int,
    rng: RngStream,
    noise_power: float = 1.0,
    engine: Optional[MonteCarloEngine] = None
) -> float:
    """Calibrate a threshold from the H0 distribution of the statistic.

    Raises:
        InsufficientTrials: If trials < 100 / target_pfa
    """
    if not 0.0 < target_pfa < 1.0:
        raise ValueError(f"Target false alarm probability must lie in (0, 1), got {target_pfa}")
    required = math.ceil(MIN_TAIL_SAMPLES / target_pfa)
    if trials < required:
        raise InsufficientTrials(f"Need at least {required} trials for P_fa={target_pfa}, got {trials}")
    values = simulate_h0(kind, K, N, trials, rng, noise_power, engine)
    return quantile_threshold(kind, values, target_pfa)


def resolve_sigma(scenario: Scenario) -> ResolvedScenario:
    """Population covariance of a scenario.

    A given spectrum is used directly; otherwise channels are drawn from the
    scenario's channel seed and combined with the SNRs.
    """
    if scenario.sigma_spectrum is not None:
        return ResolvedScenario(sigma=sigma_from_spectrum(scenario.sigma_spectrum))

    P = len(scenario.snrs_db)
    channels = draw_channels(scenario.K, P, RngStream(scenario.effective_channel_seed, CHANNEL_STREAM_ID))
    sigma = build_sigma_h1(
        scenario.snrs_linear,
        [channels[:, i] for i in range(P)],
        scenario.noise_power,
        K=scenario.K
    )
    return ResolvedScenario(sigma=sigma, channels=channels)


def calibration_trials_for(scenario: Scenario, pfa_grid: Sequence[float], min_tail_samples: int) -> int:
    """Calibration budget resolving the smallest grid probability."""
    if scenario.calibration_trials is not None:
        return scenario.calibration_trials
    return max(scenario.trials, math.ceil(min_tail_samples / min(pfa_grid)))


def roc(
    kind: DetectorKind,
    scenario: Scenario,
    pfa_grid: Sequence[float],
    rng: RngStream,
    engine: Optional[MonteCarloEngine] = None,
    sigma: Optional[ComplexMatrix] = None
) -> RocCurve:
    """ROC curve of one detector over a grid of target false alarm probabilities.

    John's thresholds come from the analytic approximation, every other
    detector is calibrated on a dedicated H0 stream. Empirical P_fa and P_d
    use fresh H0 and H1 streams shared by all grid points and detectors.
    """
    grid = validate_pfa_grid(list(pfa_grid))
    engine = _engine_or_default(engine)
    if sigma is None:
        sigma = resolve_sigma(scenario).sigma
    K, N, noise_power = scenario.K, scenario.N, scenario.noise_power

    if kind is DetectorKind.JOHN:
        fit = beta_fit_for(K, N)
        thresholds = [threshold_for_pfa(p, fit) for p in grid]
    else:
        calibration = calibration_trials_for(scenario, grid, engine.min_tail_samples)
        required = math.ceil(MIN_TAIL_SAMPLES / grid[0])
        if calibration < required:
            raise InsufficientTrials(f"Need at least {required} calibration trials, got {calibration}")
        null_values = simulate_h0(kind, K, N, calibration, rng.child(STREAM_CALIBRATION), noise_power, engine)
        thresholds = [quantile_threshold(kind, null_values, p) for p in grid]

    h0_values = simulate_h0(kind, K, N, scenario.trials, rng.child(STREAM_PFA), noise_power, engine)
    h1_values = engine.simulate_statistics(
        kind, K, N, scenario.trials, rng.child(STREAM_PD), cholesky_lower(sigma), noise_power
    )

    points = [
        RocPoint(
            pfa_target=p,
            threshold=threshold,
            pfa=_estimate(kind, h0_values, threshold),
            pd=_estimate(kind, h1_values, threshold)
        )
        for p, threshold in zip(grid, thresholds)
    ]
    logger.info("ROC computed", extra={
        "detector": kind.value,
        "K": K,
        "N": N,
        "trials": scenario.trials,
        "points": len(points)
    })
    return RocCurve(detector=kind, points=points)


def pfa_curve(
    K: int,
    N: int,
    zetas: Sequence[float],
    trials: int,
    rng: RngStream,
    fit: Optional[BetaFit] = None,
    engine: Optional[MonteCarloEngine] = None
) -> PfaCurve:
    """Analytic versus simulated P_fa of John's detector on one shared pool of H0 draws."""
    zeta = np.asarray(zetas, dtype=np.float64)
    fit = fit if fit is not None else beta_fit_for(K, N)
    analytic = np.array([pfa(float(z), fit) for z in zeta])

    values = np.sort(simulate_t_john_h0(K, N, trials, rng, engine))
    exceed = trials - np.searchsorted(values, zeta, side="right")
    empirical = exceed / trials
    stderr = np.sqrt(empirical * (1.0 - empirical) / trials)
    return PfaCurve(zeta=zeta, analytic=analytic, empirical=empirical, stderr=stderr, trials=trials)


def approximation_error_study(
    K: int,
    N: int,
    zeta_lo: float,
    zeta_hi: float,
    grid_points: int,
    trials: int,
    rng: RngStream,
    engine: Optional[MonteCarloEngine] = None
) -> float:
    """Average |analytic - simulated| P_fa over a uniform threshold grid."""
    if not 1.0 / K <= zeta_lo < zeta_hi <= 1.0:
        raise ValueError(f"Need 1/K <= zeta_lo < zeta_hi <= 1, got [{zeta_lo}, {zeta_hi}] for K={K}")
    if grid_points < 2:
        raise ValueError(f"Need at least 2 grid points, got {grid_points}")
    curve = pfa_curve(K, N, np.linspace(zeta_lo, zeta_hi, grid_points), trials, rng, engine=engine)
    error = curve.average_error
    logger.info("Approximation error study", extra={"K": K, "N": N, "trials": trials, "average_error": error})
    return error
