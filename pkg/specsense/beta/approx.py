"""Two-moment generalized Beta approximation to the H0 law of John's statistic.

The statistic lives on [1/K, 1]; a Beta(alpha, beta) variable z mapped by
x = ((K - 1) z + 1) / K is matched to the exact first two moments. False
alarm probabilities and thresholds follow from the incomplete Beta function.
"""

from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from scipy import optimize, special, stats

from specsense.moments.exact import DEFAULT_MAX_ORDER, moment_tj
from specsense.utils.logging import get_logger
from specsense.wishart.core import NumericalError

logger = get_logger(__name__)

BISECTION_MAX_ITER = 200
THRESHOLD_TOL = 1e-10

Moment = Union[float, Fraction]


class DegenerateMoments(NumericalError):
    """Raised when moments cannot come from a non-degenerate law on (1/K, 1)."""
    pass


class DomainError(NumericalError):
    """Raised when an argument lies outside the function's domain."""
    pass


class NoConvergence(NumericalError):
    """Raised when threshold inversion fails to converge."""
    pass


class BetaFit(BaseModel):
    """Fitted generalized Beta parameters with the moments they reproduce."""

    model_config = ConfigDict(frozen=True)

    alpha: float
    beta: float
    K: int
    M1: float
    M2: float

    @field_validator("alpha", "beta")
    def validate_shape(cls, v: float) -> float:
        """Shape parameters must be positive and finite."""
        if not (np.isfinite(v) and v > 0):
            raise ValueError(f"Shape parameter must be positive, got {v}")
        return v

    @field_validator("K")
    def validate_k(cls, v: int) -> int:
        """Support [1/K, 1] needs at least two sensors."""
        if v < 2:
            raise ValueError(f"K must be at least 2, got {v}")
        return v

    @property
    def lower(self) -> float:
        """Lower support end 1/K."""
        return 1.0 / self.K


def fit_generalized_beta(M1: Moment, M2: Moment, K: int) -> BetaFit:
    """Match alpha and beta to the first two moments.

    Exact ``Fraction`` moments are carried through the closed forms before
    conversion to float.

    Raises:
        DegenerateMoments: If M1 is outside (1/K, 1) or the variance is not positive
    """
    if K < 2:
        raise DegenerateMoments(f"A fit needs K >= 2, got K={K}")
    if not 1 / Fraction(K) < M1 < 1:
        raise DegenerateMoments(f"M1 must lie in (1/{K}, 1), got {float(M1)}")
    if M2 <= M1 * M1:
        raise DegenerateMoments(f"Variance must be positive, got M2 - M1^2 = {float(M2 - M1 * M1):.3e}")
    if M2 >= M1:
        raise DegenerateMoments(f"M2 must be below M1, got M1={float(M1)}, M2={float(M2)}")

    shared = K * M1 - K * M2 + M1 - 1
    alpha = (K * M1 - 1) * shared / ((K - 1) * K * (M2 - M1 * M1))
    beta = (M1 - 1) * shared / ((K - 1) * (M1 * M1 - M2))
    if alpha <= 0 or beta <= 0:
        raise DegenerateMoments(f"Moments give non-positive shapes alpha={float(alpha)}, beta={float(beta)}")

    return BetaFit(alpha=float(alpha), beta=float(beta), K=K, M1=float(M1), M2=float(M2))


@lru_cache(maxsize=256)
def beta_fit_for(K: int, N: int, max_order: int = DEFAULT_MAX_ORDER) -> BetaFit:
    """Fit from the exact first two H0 moments for K sensors and N samples."""
    fit = fit_generalized_beta(moment_tj(1, K, N, max_order), moment_tj(2, K, N, max_order), K)
    logger.info("Fitted generalized Beta", extra={"K": K, "N": N, "alpha": fit.alpha, "beta": fit.beta})
    return fit


def generalized_beta_moment(fit: BetaFit, m: int) -> float:
    """m-th moment of the fitted law, by binomial expansion of the linear map."""
    if m < 0:
        raise ValueError(f"Moment order must be non-negative, got {m}")
    K = fit.K
    total = 0.0
    for i in range(m + 1):
        ratio = special.poch(fit.alpha, i) / special.poch(fit.alpha + fit.beta, i)
        total += special.comb(m, i, exact=True) * (K - 1) ** i * ratio
    return float(total / K ** m)


def incomplete_beta_lower(x: float, a: float, b: float) -> float:
    """Unregularized lower incomplete Beta function B(x; a, b).

    Raises:
        DomainError: If x is outside [0, 1] or a shape is not positive
    """
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if a <= 0 or b <= 0:
        raise DomainError(f"Shapes must be positive, got a={a}, b={b}")
    regularized = float(special.betainc(a, b, x))
    if regularized == 0.0:
        return 0.0
    return float(np.exp(np.log(regularized) + special.betaln(a, b)))


def _upper_tail(zeta: float, fit: BetaFit) -> float:
    z = min(max(fit.K * (1.0 - zeta) / (fit.K - 1), 0.0), 1.0)
    return float(special.betainc(fit.beta, fit.alpha, z))


def cdf_tj_approx(y: float, fit: BetaFit) -> float:
    """Approximate H0 CDF of John's statistic.

    Raises:
        DomainError: If y < 1/K
    """
    if y < fit.lower:
        raise DomainError(f"y must be at least 1/K = {fit.lower}, got {y}")
    if y == fit.lower:
        return 0.0
    if y >= 1.0:
        return 1.0
    return 1.0 - _upper_tail(y, fit)


def pfa(zeta: float, fit: BetaFit) -> float:
    """Approximate false alarm probability of John's detector at threshold zeta.

    Raises:
        DomainError: If zeta is outside [1/K, 1]
    """
    if not fit.lower <= zeta <= 1.0:
        raise DomainError(f"Threshold must lie in [1/K, 1] = [{fit.lower}, 1], got {zeta}")
    if zeta == fit.lower:
        return 1.0
    if zeta == 1.0:
        return 0.0
    return _upper_tail(zeta, fit)


def beta_pdf(x: float, fit: BetaFit) -> float:
    """Density of the fitted generalized Beta law on [1/K, 1]."""
    return float(stats.beta.pdf(x, fit.alpha, fit.beta, loc=fit.lower, scale=1.0 - fit.lower))


def threshold_for_pfa(target: float, fit: BetaFit) -> float:
    """Invert the false alarm approximation by bisection on [1/K, 1].

    Raises:
        DomainError: If target is not in (0, 1)
        NoConvergence: If bisection fails within 200 iterations
    """
    if not 0.0 < target < 1.0:
        raise DomainError(f"Target false alarm probability must lie in (0, 1), got {target}")

    def residual(zeta: float) -> float:
        return pfa(zeta, fit) - target

    zeta, result = optimize.bisect(
        residual,
        fit.lower,
        1.0,
        xtol=1e-15,
        maxiter=BISECTION_MAX_ITER,
        full_output=True,
        disp=False
    )
    if not result.converged:
        raise NoConvergence(f"Bisection did not converge after {result.iterations} iterations")
    error = abs(residual(zeta))
    if error > THRESHOLD_TOL:
        raise NoConvergence(f"Threshold residual {error:.3e} exceeds {THRESHOLD_TOL}")

    logger.debug("Threshold inverted", extra={"target": target, "zeta": zeta, "iterations": result.iterations})
    return float(zeta)
