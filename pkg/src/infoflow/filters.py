"""GARCH(1,1) and driver-augmented ARIMA residual filters, plus the
functional-form sweep that re-tests causality under common transforms.

The sweep classifies each functional form into one of three statuses:
"misspecified" (BDS rejects the linear residuals), "adequate-insignificant"
and "adequate-significant", composing exactly the same Granger and BDS
primitives used elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal
from scipy.special import expit, logit

from .bds import BdsConfig, bds_statistic
from .errors import ConvergenceError, DataError, DegenerateSampleError
from .granger import DEFAULT_LAGS, fit_unrestricted, granger_test
from .inference import bonferroni
from .series import (
    AlignedSeriesPair,
    PriceSeries,
    abs_transform,
    difference,
    log1p_transform,
    volatility_proxy,
)

_LOG_2PI = math.log(2.0 * math.pi)

FORM_NAMES = (
    "x",
    "diff1",
    "diff2",
    "f(x,vol)",
    "log1p",
    "abs",
    "garch11",
    "arima111",
)

STATUS_MISSPECIFIED = "misspecified"
STATUS_INSIGNIFICANT = "adequate-insignificant"
STATUS_SIGNIFICANT = "adequate-significant"


@dataclass(frozen=True)
class GarchFit:
    """Gaussian quasi-maximum-likelihood GARCH(1,1) fit.

    Variance recursion sigma2_t = omega + arch * eps_{t-1}^2
    + garch * sigma2_{t-1} on mean-adjusted returns; ``std_residuals``
    are eps_t / sigma_t.
    """

    omega: float
    arch: float
    garch: float
    mean: float
    loglik: float
    loglik_init: float
    std_residuals: np.ndarray
    conditional_sigma2: np.ndarray


@dataclass(frozen=True)
class ArimaFit:
    """Conditional least squares fit of the driver-differenced MA model.

    Residual recursion eps_t = dT_t - alpha * dD_{t-1} - beta * eps_{t-1}
    with eps started at zero, where dT is the differenced target and dD the
    differenced driver.
    """

    alpha: float
    beta: float
    residuals: np.ndarray


@dataclass(frozen=True)
class FormOutcome:
    """Aggregated sweep verdict for one functional form."""

    form: str
    adequate: bool | None
    significant: bool | None
    status: str
    gate_by_lag: tuple = ()
    pvalues: tuple = ()
    adjusted_pvalues: tuple = ()
    error: str | None = None


@dataclass(frozen=True)
class FunctionalFormReport:
    outcomes: tuple

    def outcome(self, form: str) -> FormOutcome:
        for o in self.outcomes:
            if o.form == form:
                return o
        raise KeyError(form)


def _garch_sigma2(eps: np.ndarray, omega: float, arch: float, garch: float) -> np.ndarray:
    """Variance recursion, seeded with the sample variance of eps."""
    n = len(eps)
    sigma2 = np.empty(n)
    sigma2[0] = float(np.mean(eps * eps))
    if n > 1:
        drive = omega + arch * eps[:-1] ** 2
        # sigma2_t = drive_t + garch * sigma2_{t-1} as a linear recursion
        sigma2[1:] = signal.lfilter([1.0], [1.0, -garch], drive, zi=[garch * sigma2[0]])[0]
    return sigma2


def _garch_negloglik(eps: np.ndarray, omega: float, arch: float, garch: float) -> float:
    sigma2 = _garch_sigma2(eps, omega, arch, garch)
    if np.any(sigma2 <= 0.0) or not np.all(np.isfinite(sigma2)):
        return np.inf
    return 0.5 * float(np.sum(_LOG_2PI + np.log(sigma2) + eps * eps / sigma2))


def _unpack_garch_params(u: np.ndarray) -> tuple:
    """Map unconstrained R^3 to omega > 0, arch, garch >= 0, arch+garch < 1."""
    omega = math.exp(u[0])
    persistence = expit(u[1])
    split = expit(u[2])
    return omega, persistence * split, persistence * (1.0 - split)


def garch_fit(returns) -> GarchFit:
    """Fit GARCH(1,1) by Nelder-Mead on a logistic/log reparameterization.

    Starts from omega = 0.1 * var, arch = 0.05, garch = 0.85; the
    stationarity constraint arch + garch < 1 holds by construction.
    """
    x = np.asarray(returns, dtype=float)
    if x.ndim != 1:
        raise DataError("returns must be a 1-d series")
    if len(x) < 100:
        raise DataError(f"need at least 100 observations for GARCH, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise DataError("returns contain non-finite values")
    mean = float(np.mean(x))
    eps = x - mean
    var = float(np.var(eps))
    if var <= 0.0:
        raise DegenerateSampleError("returns have zero variance")

    arch0, garch0 = 0.05, 0.85
    persistence0 = arch0 + garch0
    u0 = np.array([
        math.log(0.1 * var),
        logit(persistence0),
        logit(arch0 / persistence0),
    ])
    loglik_init = -_garch_negloglik(eps, *_unpack_garch_params(u0))

    result = optimize.minimize(
        lambda u: _garch_negloglik(eps, *_unpack_garch_params(u)),
        u0,
        method="Nelder-Mead",
        options={"maxiter": 2000, "xatol": 1e-7, "fatol": 1e-9},
    )
    if not result.success:
        raise ConvergenceError(f"GARCH optimizer did not converge: {result.message}")
    omega, arch, garch = _unpack_garch_params(result.x)
    sigma2 = _garch_sigma2(eps, omega, arch, garch)
    loglik = -float(result.fun)
    if loglik < loglik_init - 1e-9:
        raise ConvergenceError("GARCH optimum fell below the initialization point")
    return GarchFit(
        omega=omega,
        arch=arch,
        garch=garch,
        mean=mean,
        loglik=loglik,
        loglik_init=loglik_init,
        std_residuals=eps / np.sqrt(sigma2),
        conditional_sigma2=sigma2,
    )


def garch_filter(returns) -> np.ndarray:
    """Standardized GARCH(1,1) residuals eps_t / sigma_t."""
    return garch_fit(returns).std_residuals


def _arima_residuals(dtarget: np.ndarray, ddriver_lag: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    z = dtarget - alpha * ddriver_lag
    # eps_t = z_t - beta * eps_{t-1}, eps_0 = 0
    return signal.lfilter([1.0], [1.0, beta], z)


def arima_fit(returns, driver) -> ArimaFit:
    """Conditional least squares for the driver-differenced MA(1) filter.

    The model explains the target's first difference by the lagged first
    difference of the driver plus an MA(1) error.  For fixed beta the
    optimal alpha is closed form, so only beta is searched (bounded inside
    the invertible region); a beta estimate pinned at the boundary is
    flagged as non-convergence.
    """
    r = np.asarray(returns, dtype=float)
    d = np.asarray(driver, dtype=float)
    if r.shape != d.shape or r.ndim != 1:
        raise DataError("returns and driver must be 1-d series of equal length")
    if len(r) < 100:
        raise DataError(f"need at least 100 observations for ARIMA, got {len(r)}")
    # rows t = 2..n-1: target diff at t, driver diff at t-1
    dtarget = r[2:] - r[1:-1]
    ddriver_lag = d[1:-1] - d[:-2]
    if float(np.max(np.abs(ddriver_lag))) == 0.0:
        raise DegenerateSampleError(
            "driver has no variation; MA regression coefficient unidentified"
        )

    def alpha_for(beta: float) -> float:
        fd = signal.lfilter([1.0], [1.0, beta], ddriver_lag)
        ft = signal.lfilter([1.0], [1.0, beta], dtarget)
        denom = float(fd @ fd)
        if denom <= 0.0:
            raise DegenerateSampleError("filtered driver difference is degenerate")
        return float(ft @ fd) / denom

    def sse(beta: float) -> float:
        eps = _arima_residuals(dtarget, ddriver_lag, alpha_for(beta), beta)
        return float(eps @ eps)

    bound = 0.9999
    result = optimize.minimize_scalar(sse, bounds=(-bound, bound), method="bounded",
                                      options={"xatol": 1e-8})
    if not result.success:
        raise ConvergenceError(f"ARIMA optimizer did not converge: {result.message}")
    beta = float(result.x)
    if abs(beta) >= bound - 1e-4:
        raise ConvergenceError(
            f"MA coefficient {beta:.4f} sits at the invertibility boundary"
        )
    alpha = alpha_for(beta)
    return ArimaFit(
        alpha=alpha,
        beta=beta,
        residuals=_arima_residuals(dtarget, ddriver_lag, alpha, beta),
    )


def arima_filter(returns, driver) -> np.ndarray:
    """Residual series of the driver-differenced MA filter (length n - 2)."""
    return arima_fit(returns, driver).residuals


def _form_inputs(form, pair, volatility):
    """(driver, target, controls) for one functional form."""
    d, t = pair.driver, pair.target
    if form == "x":
        return d, t, None
    if form == "diff1":
        return difference(d, 1), difference(t, 1), None
    if form == "diff2":
        return difference(d, 2), difference(t, 2), None
    if form == "f(x,vol)":
        if volatility is None:
            raise DataError("volatility control series required for f(x,vol)")
        vol = np.asarray(volatility, dtype=float)
        if len(vol) != len(t):
            raise DataError("volatility series must align with the pair")
        return d, t, vol
    if form == "log1p":
        return log1p_transform(d), log1p_transform(t), None
    if form == "abs":
        return d, abs_transform(t), None
    if form == "garch11":
        return d, garch_filter(t), None
    if form == "arima111":
        res = arima_filter(t, d)
        return d[len(d) - len(res):], res, None
    raise DataError(f"unknown functional form {form!r}")


def _evaluate_form(driver, target, controls, lags, alpha, bds_config):
    """Per-lag Granger p-values and BDS gates, then the aggregate verdict.

    The form is adequate when the BDS test fails to reject on a majority
    of the per-lag model residuals; significance requires some lag with an
    adjusted p-value below alpha whose own residuals pass the gate.
    """
    pvalues, gates = [], []
    for k in lags:
        res = granger_test(target, driver, k, controls=controls)
        pvalues.append(res.pvalue)
        fit = fit_unrestricted(target, driver, k, controls=controls)
        gates.append(not bds_statistic(fit.residuals, bds_config).reject)
    adjusted = bonferroni(pvalues, len(lags))
    adequate = sum(gates) * 2 > len(gates)
    significant = any(
        p < alpha and gate for p, gate in zip(adjusted, gates)
    )
    if not adequate:
        status = STATUS_MISSPECIFIED
    elif significant:
        status = STATUS_SIGNIFICANT
    else:
        status = STATUS_INSIGNIFICANT
    return adequate, significant, status, tuple(gates), tuple(pvalues), tuple(adjusted)


def functional_form_sweep(
    pair: AlignedSeriesPair,
    prices: PriceSeries | None = None,
    lags=DEFAULT_LAGS,
    alpha: float = 0.05,
    bds_config: BdsConfig | None = None,
    volatility=None,
) -> FunctionalFormReport:
    """Causality and adequacy verdicts for every standard functional form.

    ``prices`` (or a pre-aligned ``volatility`` series) feeds the
    volatility-controlled form.  Failures of individual forms are recorded
    in their outcome and do not stop the sweep.
    """
    pair.require_min_length()
    if volatility is None and prices is not None:
        vol = volatility_proxy(prices)
        # pair targets are returns, one shorter than the price series
        if len(vol) == len(pair) + 1:
            vol = vol[1:]
        if len(vol) != len(pair):
            raise DataError("price series does not align with the pair")
        volatility = vol

    outcomes = []
    for form in FORM_NAMES:
        try:
            driver, target, controls = _form_inputs(form, pair, volatility)
            adequate, significant, status, gates, pvals, adj = _evaluate_form(
                driver, target, controls, lags, alpha, bds_config
            )
            outcomes.append(FormOutcome(
                form=form,
                adequate=adequate,
                significant=significant,
                status=status,
                gate_by_lag=gates,
                pvalues=pvals,
                adjusted_pvalues=adj,
            ))
        except Exception as exc:  # per-form isolation
            outcomes.append(FormOutcome(
                form=form,
                adequate=None,
                significant=None,
                status="error",
                error=f"{type(exc).__name__}: {exc}",
            ))
    return FunctionalFormReport(outcomes=tuple(outcomes))
