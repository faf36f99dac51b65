"""Gaussian kernel density estimation and Shannon entropy in nats.

Product-Gaussian KDE with per-dimension Silverman bandwidths and the
resubstitution entropy estimator -(1/n) * sum_i log fhat(x_i).  These are
the numerical foundation of the nonparametric transfer entropy estimator.

All kernel sums are brute-force O(n^2), evaluated in fixed-size blocks so
memory stays bounded; block size never affects the result because each
query point's sum is reduced independently in a fixed order.

References
----------
Silverman, B. W. 1986. Density Estimation for Statistics and Data
Analysis. Chapman & Hall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateSampleError

_LOG_2PI = math.log(2.0 * math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Query rows per block when evaluating kernel sums; bounds peak memory at
# roughly block * n * 8 bytes without changing any result.
_BLOCK_ROWS = 256

MIN_ENTROPY_SAMPLES = 30


@dataclass(frozen=True)
class KdeConfig:
    """Bandwidth selection for the product-Gaussian kernel.

    ``rule`` is either "silverman" (h = 1.06 * sigma * n^(-1/5) per
    dimension) or "fixed" with explicit per-dimension bandwidths.
    """

    rule: str = "silverman"
    bandwidths: tuple | None = None

    def __post_init__(self):
        if self.rule not in ("silverman", "fixed"):
            raise DataError(f"unknown bandwidth rule {self.rule!r}")
        if self.rule == "fixed":
            if not self.bandwidths:
                raise DataError("fixed bandwidth rule requires explicit bandwidths")
            bw = tuple(float(h) for h in self.bandwidths)
            if any(h <= 0 for h in bw):
                raise DataError("fixed bandwidths must all be positive")
            object.__setattr__(self, "bandwidths", bw)
        elif self.bandwidths is not None:
            raise DataError("bandwidths are only accepted with the fixed rule")

    @classmethod
    def silverman(cls) -> "KdeConfig":
        return cls(rule="silverman")

    @classmethod
    def fixed(cls, *bandwidths: float) -> "KdeConfig":
        return cls(rule="fixed", bandwidths=bandwidths)


class SampleMatrix:
    """An n x d matrix of finite samples, d between 1 and 3."""

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise DataError("sample matrix must be 1- or 2-dimensional")
        n, d = values.shape
        if n < 1:
            raise DataError("sample matrix has no rows")
        if not 1 <= d <= 3:
            raise DataError(f"sample dimension must be 1..3, got {d}")
        if not np.all(np.isfinite(values)):
            raise DataError("sample matrix contains non-finite values")
        self.values = values

    @classmethod
    def from_columns(cls, *columns) -> "SampleMatrix":
        return cls(np.column_stack([np.asarray(c, dtype=float) for c in columns]))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def silverman_bandwidth(x) -> float:
    """Rule-of-thumb bandwidth h = 1.06 * sigma * n^(-1/5).

    ``sigma`` is the sample standard deviation with the n-1 denominator.
    Raises DegenerateSampleError for constant input.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DataError("silverman_bandwidth expects a 1-d sample")
    n = len(x)
    if n < 2:
        raise DataError("need at least two observations for a bandwidth")
    sigma = float(np.std(x, ddof=1))
    if sigma <= 0.0 or not math.isfinite(sigma):
        raise DegenerateSampleError("sample has zero variance; bandwidth undefined")
    return 1.06 * sigma * n ** (-0.2)


def resolve_bandwidths(points: SampleMatrix, config: KdeConfig) -> np.ndarray:
    """Per-dimension bandwidths for ``points`` under ``config``."""
    if config.rule == "fixed":
        if len(config.bandwidths) != points.d:
            raise DataError(
                f"{len(config.bandwidths)} fixed bandwidths for {points.d} dimensions"
            )
        return np.asarray(config.bandwidths, dtype=float)
    return np.array(
        [silverman_bandwidth(points.values[:, j]) for j in range(points.d)]
    )


def _log_kernel_sums(values: np.ndarray, queries: np.ndarray, h: np.ndarray) -> np.ndarray:
    """log sum_j exp(-0.5 * sum_d ((q_d - x_jd)/h_d)^2) for each query row.

    The shift by the row maximum keeps the sums finite for queries far from
    the data hull.
    """
    n = values.shape[0]
    out = np.empty(queries.shape[0])
    scaled = values / h
    for start in range(0, queries.shape[0], _BLOCK_ROWS):
        block = queries[start:start + _BLOCK_ROWS] / h
        # squared scaled distances, accumulated one dimension at a time
        dist2 = np.zeros((block.shape[0], n))
        for j in range(values.shape[1]):
            diff = block[:, j, None] - scaled[None, :, j]
            dist2 += diff * diff
        dist2 *= -0.5
        shift = dist2.max(axis=1)
        np.exp(dist2 - shift[:, None], out=dist2)
        out[start:start + _BLOCK_ROWS] = shift + np.log(dist2.sum(axis=1))
    return out


def kde_pdf(points: SampleMatrix, query, config: KdeConfig) -> float:
    """Product-Gaussian kernel density estimate at a single point.

    fhat(q) = (1/n) * sum_j prod_d (1/h_d) * phi((q_d - x_jd)/h_d)
    with phi the standard normal density.
    """
    query = np.asarray(query, dtype=float)
    if query.ndim == 0:
        query = query[None]
    if query.ndim != 1 or len(query) != points.d:
        raise DataError(f"query dimension {query.shape} does not match d={points.d}")
    if not np.all(np.isfinite(query)):
        raise DataError("query contains non-finite values")
    h = resolve_bandwidths(points, config)
    log_sum = _log_kernel_sums(points.values, query[None, :], h)[0]
    log_norm = math.log(points.n) + points.d / 2.0 * _LOG_2PI + float(np.log(h).sum())
    return float(math.exp(log_sum - log_norm))


def log_density_at_samples(points: SampleMatrix, config: KdeConfig) -> np.ndarray:
    """log fhat evaluated at every sample point (includes the self term)."""
    h = resolve_bandwidths(points, config)
    log_sum = _log_kernel_sums(points.values, points.values, h)
    log_norm = math.log(points.n) + points.d / 2.0 * _LOG_2PI + float(np.log(h).sum())
    return log_sum - log_norm


def entropy_kde(points: SampleMatrix, config: KdeConfig | None = None) -> float:
    """Resubstitution entropy estimate -(1/n) * sum_i log fhat(x_i), in nats.

    Requires at least MIN_ENTROPY_SAMPLES rows and positive variance in
    every dimension.
    """
    if config is None:
        config = KdeConfig.silverman()
    if points.n < MIN_ENTROPY_SAMPLES:
        raise DegenerateSampleError(
            f"entropy estimation needs at least {MIN_ENTROPY_SAMPLES} samples, got {points.n}"
        )
    for j in range(points.d):
        if float(np.std(points.values[:, j], ddof=1)) <= 0.0:
            raise DegenerateSampleError(f"dimension {j} has zero variance")
    return float(-np.mean(log_density_at_samples(points, config)))
