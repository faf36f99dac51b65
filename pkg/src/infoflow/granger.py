"""Linear Granger causality via nested OLS regressions and the F-test.

The restricted model regresses the target on its own k lags; the
unrestricted model adds k driver lags (and optionally k lags of a control
series).  Both are fit on the identical row set so the nested F-test is
valid.  The causality value is the log residual-variance ratio
log(var(restricted)/var(unrestricted)), which for jointly Gaussian series
equals twice the transfer entropy.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .errors import DataError, NumericalError, SingularDesignError
from .series import AlignedSeriesPair

DEFAULT_LAGS = tuple(range(1, 11))


@dataclass(frozen=True)
class VarFit:
    """One OLS fit of the lag-k autoregression.

    ``alpha`` is the intercept, ``beta`` the target-lag coefficients,
    ``gamma`` the driver-lag coefficients (empty for the restricted model)
    and ``theta`` the control-lag coefficients.
    """

    k: int
    alpha: float
    beta: np.ndarray
    gamma: np.ndarray
    theta: np.ndarray
    residuals: np.ndarray
    rss: float
    nobs: int
    n_params: int


@dataclass(frozen=True)
class GcResult:
    """Granger test outcome for a single lag order."""

    lag: int
    gc_value: float
    f_stat: float
    pvalue: float
    adjusted_pvalue: float

    def __post_init__(self):
        if not 0.0 <= self.pvalue <= 1.0:
            raise NumericalError(f"p-value {self.pvalue} outside [0, 1]")


@dataclass(frozen=True)
class MultiLagGcResult:
    """Per-lag Granger results with Bonferroni-adjusted p-values."""

    results: tuple
    significant: bool
    alpha: float


def _lagged_columns(x: np.ndarray, k: int, n_rows: int) -> np.ndarray:
    """Columns x[t-1], ..., x[t-k] for t = k .. len(x)-1."""
    return np.column_stack([x[k - j: k - j + n_rows] for j in range(1, k + 1)])


def _design(target, k, driver=None, controls=None):
    target = np.asarray(target, dtype=float)
    n = len(target)
    if n <= 2 * k + 2:
        raise DataError(f"series of length {n} too short for lag order {k}")
    n_rows = n - k
    y = target[k:]
    blocks = [np.ones((n_rows, 1)), _lagged_columns(target, k, n_rows)]
    for extra in (driver, controls):
        if extra is not None:
            extra = np.asarray(extra, dtype=float)
            if len(extra) != n:
                raise DataError("all series must share the target's length")
            blocks.append(_lagged_columns(extra, k, n_rows))
    return y, np.hstack(blocks)


def _ols(y: np.ndarray, X: np.ndarray):
    """Least squares with a tolerance for all-zero columns.

    An identically-zero regressor carries no information and is pinned to a
    zero coefficient by the minimum-norm solution; any other rank
    deficiency (duplicated or collinear columns) is a genuine design error.
    """
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    zero_cols = int(np.sum(~np.any(X != 0.0, axis=0)))
    if rank < X.shape[1] - zero_cols:
        raise SingularDesignError(
            f"design matrix rank {rank} below parameter count {X.shape[1]}"
        )
    resid = y - X @ coef
    rss = float(resid @ resid)
    return coef, resid, rss


def fit_restricted(target, k: int) -> VarFit:
    """OLS of the target on an intercept and its own k lags."""
    y, X = _design(target, k)
    coef, resid, rss = _ols(y, X)
    return VarFit(
        k=k,
        alpha=float(coef[0]),
        beta=coef[1: 1 + k].copy(),
        gamma=np.empty(0),
        theta=np.empty(0),
        residuals=resid,
        rss=rss,
        nobs=len(y),
        n_params=X.shape[1],
    )


def fit_unrestricted(target, driver, k: int, controls=None) -> VarFit:
    """OLS adding k driver lags (and optional k control lags) to the
    restricted design.  Rows are identical to the restricted fit."""
    y, X = _design(target, k, driver=driver, controls=controls)
    coef, resid, rss = _ols(y, X)
    n_theta = k if controls is not None else 0
    return VarFit(
        k=k,
        alpha=float(coef[0]),
        beta=coef[1: 1 + k].copy(),
        gamma=coef[1 + k: 1 + 2 * k].copy(),
        theta=coef[1 + 2 * k: 1 + 2 * k + n_theta].copy(),
        residuals=resid,
        rss=rss,
        nobs=len(y),
        n_params=X.shape[1],
    )


def granger_test(target, driver, k: int, controls=None) -> GcResult:
    """Nested F-test of the k driver lags.

    F = ((RSS_r - RSS_u)/k) / (RSS_u/(n - p_u)) with the p-value from the
    F(k, n - p_u) tail (regularized incomplete beta).  ``gc_value`` is
    log(RSS_r/RSS_u); with a shared row set and intercepts this equals the
    log residual-variance ratio.

    When controls are supplied they enter both models, so the test still
    isolates the driver block.
    """
    restricted_controls = controls
    fit_r = (
        fit_restricted(target, k)
        if controls is None
        else fit_unrestricted(target, restricted_controls, k)
    )
    if controls is None:
        fit_u = fit_unrestricted(target, driver, k)
    else:
        fit_u = fit_unrestricted(target, driver, k, controls=controls)
    if fit_u.nobs != fit_r.nobs:
        raise NumericalError("restricted and unrestricted fits saw different rows")
    rss_r, rss_u = fit_r.rss, fit_u.rss
    if rss_u > rss_r * (1.0 + 1e-9) + 1e-12:
        raise NumericalError("unrestricted RSS exceeds restricted RSS")
    n = fit_u.nobs
    p_u = fit_u.n_params
    df_denom = n - p_u
    if df_denom <= 0:
        raise DataError(f"not enough rows ({n}) for {p_u} parameters")
    if rss_u <= 0.0:
        raise SingularDesignError("unrestricted model fits exactly; F-test undefined")
    f_stat = ((rss_r - rss_u) / k) / (rss_u / df_denom)
    f_stat = max(f_stat, 0.0)
    pvalue = float(stats.f.sf(f_stat, k, df_denom))
    gc_value = float(np.log(rss_r / rss_u))
    gc_value = max(gc_value, 0.0)
    return GcResult(
        lag=k,
        gc_value=gc_value,
        f_stat=float(f_stat),
        pvalue=pvalue,
        adjusted_pvalue=pvalue,
    )


def _controls_from(controls, k):
    return None if controls is None else np.asarray(controls, dtype=float)


def multi_lag_granger(
    pair: AlignedSeriesPair,
    lags=DEFAULT_LAGS,
    controls=None,
    alpha: float = 0.05,
    n_hypotheses: int | None = None,
) -> MultiLagGcResult:
    """Granger test at each lag order with Bonferroni-corrected p-values.

    A fresh model is fit at every lag order; the overall flag is set when
    any adjusted p-value falls below ``alpha``.
    """
    pair.require_min_length()
    lags = tuple(int(k) for k in lags)
    if not lags:
        raise DataError("no lag orders requested")
    m = n_hypotheses if n_hypotheses is not None else len(lags)
    results = []
    for k in lags:
        res = granger_test(pair.target, pair.driver, k, controls=_controls_from(controls, k))
        results.append(replace(res, adjusted_pvalue=min(1.0, res.pvalue * m)))
    significant = any(r.adjusted_pvalue < alpha for r in results)
    return MultiLagGcResult(results=tuple(results), significant=significant, alpha=alpha)
