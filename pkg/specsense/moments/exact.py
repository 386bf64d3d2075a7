"""Exact H0 moments of John's statistic in rational arithmetic.

All gamma functions here have positive integer arguments, so every quantity
is an exact ``Fraction`` built from factorials. The signed product in the
composition sum cancels heavily, which rules out floating point for large N.
"""

from fractions import Fraction
from itertools import permutations
from math import factorial, prod
from typing import Iterator, List, Sequence, Tuple

from specsense.utils.logging import get_logger
from specsense.wishart.core import NumericalError

logger = get_logger(__name__)

DEFAULT_MAX_ORDER = 16
PERMUTATION_MAX_K = 6

Composition = Tuple[int, ...]


class InvalidDims(NumericalError):
    """Raised when the sensor count exceeds the sample size."""
    pass


class TooLarge(NumericalError):
    """Raised when a request exceeds the supported size."""
    pass


def _check_dims(K: int, N: int) -> None:
    if K < 1 or N < 1:
        raise ValueError(f"K and N must be positive, got K={K}, N={N}")
    if K > N:
        raise InvalidDims(f"Exact moments need N >= K, got K={K}, N={N}")


def _check_order(m: int, max_order: int) -> None:
    if m < 0:
        raise ValueError(f"Moment order must be non-negative, got {m}")
    if m > max_order:
        raise TooLarge(f"Moment order {m} exceeds the cap of {max_order}")


def gamma_int(n: int) -> int:
    """Gamma function at a positive integer, (n - 1)!."""
    if n < 1:
        raise ValueError(f"Gamma argument must be a positive integer, got {n}")
    return factorial(n - 1)


def compositions(m: int, K: int) -> Iterator[Composition]:
    """Stream all non-negative integer K-tuples summing to m.

    Ordered as nested sums over a_1, ..., a_{K-1} with a_K taking the
    remainder; yields C(m + K - 1, K - 1) tuples using O(K) state.
    """
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")

    parts = [0] * K

    def _fill(index: int, remaining: int) -> Iterator[Composition]:
        if index == K - 1:
            parts[index] = remaining
            yield tuple(parts)
            return
        for a in range(remaining + 1):
            parts[index] = a
            yield from _fill(index + 1, remaining - a)

    yield from _fill(0, m)


def multinomial(m: int, parts: Sequence[int]) -> int:
    """Multinomial coefficient m! / (a_1! ... a_K!)."""
    return factorial(m) // prod(factorial(a) for a in parts)


def _normalizer_inverse(K: int, N: int) -> int:
    """1 / C with C the inverse of prod Gamma(N - i + 1) Gamma(K - i + 1)."""
    return prod(factorial(N - i) * factorial(K - i) for i in range(1, K + 1))


def moment_sum_lambda_sq(m: int, K: int, N: int, max_order: int = DEFAULT_MAX_ORDER) -> Fraction:
    """E[(sum_i lambda_i^2)^m] under H0 with unit noise power.

    Args:
        m: Moment order
        K: Number of sensors
        N: Number of samples (N >= K)
        max_order: Largest accepted moment order

    Returns:
        Exact moment value

    Raises:
        InvalidDims: If K > N
    """
    _check_dims(K, N)
    _check_order(m, max_order)

    total = 0
    for a in compositions(m, K):
        # Vandermonde in b_i = 2 a_i + N - K + i (1-based i)
        vandermonde = 1
        for i in range(K):
            for j in range(i + 1, K):
                vandermonde *= 2 * a[j] - 2 * a[i] + j - i
                if vandermonde == 0:
                    break
            if vandermonde == 0:
                break
        if vandermonde == 0:
            continue
        gammas = prod(factorial(2 * a[i] + N - K + i) for i in range(K))
        total += multinomial(m, a) * vandermonde * gammas

    return Fraction(total, _normalizer_inverse(K, N))


def moment_trace_power(m: int, K: int, N: int) -> Fraction:
    """E[(sum_i lambda_i)^(2m)] = Gamma(2m + KN) / Gamma(KN), a rising factorial."""
    if K < 1 or N < 1:
        raise ValueError(f"K and N must be positive, got K={K}, N={N}")
    if m < 0:
        raise ValueError(f"Moment order must be non-negative, got {m}")
    dof = K * N
    return Fraction(prod(range(dof, dof + 2 * m)))


def moment_tj(m: int, K: int, N: int, max_order: int = DEFAULT_MAX_ORDER) -> Fraction:
    """m-th H0 moment of John's statistic, by independence of T_J and tr(R)."""
    value = moment_sum_lambda_sq(m, K, N, max_order) / moment_trace_power(m, K, N)
    logger.debug("Exact moment computed", extra={"m": m, "K": K, "N": N, "value": float(value)})
    return value


def moment_table(K: int, N: int, m_max: int, max_order: int = DEFAULT_MAX_ORDER) -> List[Fraction]:
    """Exact moments M_0, ..., M_{m_max}."""
    _check_order(m_max, max_order)
    return [moment_tj(m, K, N, max_order) for m in range(m_max + 1)]


def bareiss_determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination."""
    size = len(matrix)
    if size == 0:
        return 1
    work = [list(row) for row in matrix]
    if any(len(row) != size for row in work):
        raise ValueError("Determinant needs a square matrix")

    sign = 1
    previous = 1
    for k in range(size - 1):
        if work[k][k] == 0:
            pivot_row = next((r for r in range(k + 1, size) if work[r][k] != 0), None)
            if pivot_row is None:
                return 0
            work[k], work[pivot_row] = work[pivot_row], work[k]
            sign = -sign
        pivot = work[k][k]
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                work[i][j] = (work[i][j] * pivot - work[i][k] * work[k][j]) // previous
            work[i][k] = 0
        previous = pivot
    return sign * work[size - 1][size - 1]


def gamma_determinant_identity(b: Sequence[int]) -> Tuple[Fraction, Fraction]:
    """Both sides of |Gamma(b_i + j - 1)| = prod_{i<j}(b_j - b_i) prod Gamma(b_i).

    Returns:
        (determinant by exact elimination, closed-form product)
    """
    if not b:
        raise ValueError("b must be non-empty")
    if any(value < 1 for value in b):
        raise ValueError(f"All b_i must be positive integers, got {list(b)}")
    K = len(b)
    matrix = [[gamma_int(b[i] + j) for j in range(K)] for i in range(K)]
    determinant = bareiss_determinant(matrix)

    vandermonde = prod(b[j] - b[i] for i in range(K) for j in range(i + 1, K))
    closed_form = vandermonde * prod(gamma_int(value) for value in b)
    return Fraction(determinant), Fraction(closed_form)


def monomial_moment_by_permutations(a: Sequence[int], K: int, N: int) -> Fraction:
    """E[prod_i lambda_i^(2 a_i)] over unordered H0 eigenvalues.

    Evaluated as C / K! times the sum over all K! permutations of integer
    gamma determinants. Exponential in K; kept as an independent check.

    Raises:
        TooLarge: If K > 6
        InvalidDims: If K > N
    """
    if K > PERMUTATION_MAX_K:
        raise TooLarge(f"Permutation sum supports K <= {PERMUTATION_MAX_K}, got K={K}")
    _check_dims(K, N)
    if len(a) != K:
        raise ValueError(f"Composition has {len(a)} parts, expected {K}")
    if any(value < 0 for value in a):
        raise ValueError(f"Composition parts must be non-negative, got {list(a)}")

    total = 0
    for nu in permutations(range(K)):
        # 0-based i, j: Gamma(2 a_nu(i) + N - K + i + j + 1)
        matrix = [
            [factorial(2 * a[nu[i]] + N - K + i + j) for j in range(K)]
            for i in range(K)
        ]
        total += bareiss_determinant(matrix)

    return Fraction(total, _normalizer_inverse(K, N) * factorial(K))


def moment_sum_lambda_sq_by_permutations(m: int, K: int, N: int) -> Fraction:
    """E[(sum_i lambda_i^2)^m] rebuilt from multinomial expansion and permutation sums."""
    return sum(
        (multinomial(m, a) * monomial_moment_by_permutations(a, K, N) for a in compositions(m, K)),
        Fraction(0)
    )
