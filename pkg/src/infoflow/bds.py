"""BDS test for iid residuals, used as a linear-misspecification gate.

The m-embedding correlation integral C_m counts the fraction of embedded
point pairs within max-norm distance eps.  Under the iid null
C_m = C_1^m, and

    V_m = sqrt(k) * (C_m - C_1^m) / sigma_m,   k = n - m + 1,

is asymptotically standard normal, with sigma_m from the published
asymptotic variance built on C_1 and the triple-proximity moment K.  The
null is rejected at the 5% level when |V_m| > 1.96; rejection on the
residuals of a linear model signals neglected nonlinearity.

References
----------
Broock, W. A., J. A. Scheinkman, W. D. Dechert, and B. LeBaron. 1996.
"A Test for Independence Based on the Correlation Dimension."
Econometric Reviews 15 (3): 197-235.
Kanzler, L. 1999. "Very Fast and Correctly Sized Estimation of the BDS
Statistic." SSRN 151669.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateSampleError
from .granger import fit_unrestricted
from .series import AlignedSeriesPair

CRITICAL_VALUE = 1.96


@dataclass(frozen=True)
class BdsConfig:
    """Embedding dimension and eps as a multiple of the residual std."""

    m: int = 2
    eps_factor: float = 0.5

    def __post_init__(self):
        if self.m < 2:
            raise DataError(f"embedding dimension must be >= 2, got {self.m}")
        if self.eps_factor <= 0:
            raise DataError(f"eps factor must be positive, got {self.eps_factor}")


@dataclass(frozen=True)
class BdsResult:
    c1: float
    cm: float
    v_stat: float
    sigma_m: float
    reject: bool
    m: int
    eps: float


def _indicator_matrix(x: np.ndarray, eps: float) -> np.ndarray:
    """Pairwise |x_i - x_j| < eps, strict, as float for fast reductions."""
    return (np.abs(x[:, None] - x[None, :]) < eps).astype(float)


def _embedded_pair_count(indicators: np.ndarray, m: int) -> float:
    """Number of unordered embedded-point pairs within eps in max norm.

    A pair of m-histories is close iff every coordinate pair is close, so
    the embedded indicator is the elementwise product of m shifted copies
    of the 1-point indicator matrix.
    """
    n = indicators.shape[0]
    prod = indicators[m - 1:, m - 1:].copy()
    for d in range(1, m):
        prod *= indicators[m - 1 - d: n - d, m - 1 - d: n - d]
    return (prod.sum() - np.trace(prod)) / 2.0


def correlation_integral(series, m: int, eps: float) -> float:
    """Fraction of m-embedded point pairs within max-norm distance eps.

    Pairs are counted over the k = n - m + 1 embedded points with the
    2/(k(k-1)) normalization.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise DataError("correlation integral expects a 1-d series")
    if m < 1:
        raise DataError(f"embedding dimension must be >= 1, got {m}")
    if eps <= 0:
        raise DataError(f"eps must be positive, got {eps}")
    n = len(x)
    k = n - m + 1
    if k < 2:
        raise DataError(f"series of length {n} too short for embedding dimension {m}")
    count = _embedded_pair_count(_indicator_matrix(x, eps), m)
    return float(2.0 * count / (k * (k - 1)))


def _triple_proximity(indicators: np.ndarray) -> float:
    """U-statistic estimate of K = P(|x_s - x_t| < eps, |x_t - x_r| < eps).

    Counting paths through a middle vertex: sum over t of S_t * (S_t - 1)
    with S_t the number of neighbors of t, over n(n-1)(n-2) ordered triples.
    """
    n = indicators.shape[0]
    if n < 3:
        raise DataError("need at least three points for the triple moment")
    s = indicators.sum(axis=1) - 1.0  # drop the diagonal
    return float(np.sum(s * (s - 1.0)) / (n * (n - 1) * (n - 2)))


def _sigma_squared(c: float, k_moment: float, m: int) -> float:
    """Asymptotic variance of sqrt(k) * (C_m - C_1^m) under the iid null."""
    tail = sum(k_moment ** (m - j) * c ** (2 * j) for j in range(1, m))
    return 4.0 * (
        k_moment ** m
        + 2.0 * tail
        + (m - 1) ** 2 * c ** (2 * m)
        - m * m * k_moment * c ** (2 * m - 2)
    )


def bds_statistic(residuals, config: BdsConfig | None = None) -> BdsResult:
    """BDS statistic, dispersion and rejection flag for a residual series.

    eps is ``config.eps_factor`` times the residual sample standard
    deviation.  The first-order correlation integral entering the
    statistic is computed on the first n - m + 1 points so both integrals
    see the same effective sample; the variance terms use the full sample.
    """
    if config is None:
        config = BdsConfig()
    x = np.asarray(residuals, dtype=float)
    if x.ndim != 1:
        raise DataError("residuals must be a 1-d series")
    n = len(x)
    m = config.m
    if n < m + 2:
        raise DataError(f"series of length {n} too short for embedding dimension {m}")
    if not np.all(np.isfinite(x)):
        raise DataError("residuals contain non-finite values")
    std = float(np.std(x, ddof=1))
    if std <= 0.0:
        raise DegenerateSampleError("residuals have zero variance")
    eps = config.eps_factor * std

    indicators = _indicator_matrix(x, eps)
    k_embedded = n - m + 1
    cm = 2.0 * _embedded_pair_count(indicators, m) / (k_embedded * (k_embedded - 1))
    sub = indicators[:k_embedded, :k_embedded]
    c1 = (sub.sum() - k_embedded) / (k_embedded * (k_embedded - 1))

    c1_full = (indicators.sum() - n) / (n * (n - 1))
    k_moment = _triple_proximity(indicators)
    sigma2 = _sigma_squared(c1_full, k_moment, m)
    if sigma2 <= 0.0:
        raise DegenerateSampleError("BDS variance estimate is not positive")
    sigma = math.sqrt(sigma2)
    v_stat = math.sqrt(k_embedded) * (cm - c1 ** m) / sigma
    return BdsResult(
        c1=float(c1),
        cm=float(cm),
        v_stat=float(v_stat),
        sigma_m=float(sigma),
        reject=bool(abs(v_stat) > CRITICAL_VALUE),
        m=m,
        eps=float(eps),
    )


def bds_misspecification_gate(
    pair: AlignedSeriesPair, k: int, config: BdsConfig | None = None
) -> bool:
    """True when the lag-k linear model's residuals pass the BDS test.

    The gate fits the unrestricted VAR (target on its own k lags plus k
    driver lags) and runs the BDS test on its residuals; a linear Granger
    finding should only be trusted when this returns True.
    """
    pair.require_min_length()
    fit = fit_unrestricted(pair.target, pair.driver, k)
    return not bds_statistic(fit.residuals, config).reject
