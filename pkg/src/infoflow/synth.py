"""Synthetic driver/target generators with known coupling ground truth.

Every generator is deterministic given its seed: randomness comes from
numpy's PCG64 seeded through SeedSequence with the spec'd entropy, so the
same spec reproduces bit-identical series on any machine.

Data-generating equations (eta, xi, zeta iid standard normal unless noted):

- iid_gaussian:       X_t = sx * xi_t;  Y_t = sy * eta_t (independent)
- var1_coupled:       X_t = ar_driver * X_{t-1} + xi_t
                      Y_t = ar * Y_{t-1} + coupling * X_{t-1} + noise * eta_t
- quadratic_coupled:  X_t = xi_t;  Y_t = coupling * X_{t-1}^2 + noise * eta_t
- abs_coupled:        X_t = |xi_t| (half-normal)
                      Y_t = coupling * X_{t-1} * s_t * |zeta_t|,
                      s_t = +-1 equiprobable (magnitude coupling only)
- logistic_map:       Y_{t+1} = 4 * Y_t * (1 - Y_t);  X iid standard normal
- garch11:            Y_t = sqrt(h_t) * eta_t,
                      h_t = omega + arch * Y_{t-1}^2 + garch * h_{t-1};
                      X iid standard normal
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .series import AlignedSeriesPair, weekday_calendar

KINDS = (
    "iid_gaussian",
    "var1_coupled",
    "quadratic_coupled",
    "abs_coupled",
    "logistic_map",
    "garch11",
)

_DEFAULTS = {
    "iid_gaussian": {"sigma_driver": 1.0, "sigma_target": 1.0},
    "var1_coupled": {"coupling": 0.5, "ar": 0.3, "ar_driver": 0.0, "noise": 1.0},
    "quadratic_coupled": {"coupling": 1.0, "noise": 1.0},
    "abs_coupled": {"coupling": 1.0},
    "logistic_map": {},
    "garch11": {"omega": 0.1, "arch": 0.1, "garch": 0.8},
}

_BURN_IN = 200
_START_DATE = dt.date(2012, 4, 2)  # a Monday


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int
    seed: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown generator kind {self.kind!r}")
        if self.n < 100:
            raise DataError(f"generator length must be >= 100, got {self.n}")
        merged = dict(_DEFAULTS[self.kind])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise DataError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        merged.update({k: float(v) for k, v in self.params.items()})
        _validate_params(self.kind, merged)
        object.__setattr__(self, "params", merged)


def _validate_params(kind: str, p: dict) -> None:
    if kind == "iid_gaussian":
        if p["sigma_driver"] <= 0 or p["sigma_target"] <= 0:
            raise DataError("sigmas must be positive")
    elif kind == "var1_coupled":
        if abs(p["ar"]) >= 1 or abs(p["ar_driver"]) >= 1:
            raise DataError("autoregressive coefficients must satisfy |a| < 1")
        if p["noise"] <= 0:
            raise DataError("noise scale must be positive")
    elif kind == "quadratic_coupled":
        if p["noise"] <= 0:
            raise DataError("noise scale must be positive")
    elif kind == "garch11":
        if p["omega"] <= 0 or p["arch"] < 0 or p["garch"] < 0:
            raise DataError("variance parameters must be positive/non-negative")
        if p["arch"] + p["garch"] >= 1:
            raise DataError("arch + garch must be below 1 for stationarity")


def _rng(spec: GeneratorSpec) -> np.random.Generator:
    kind_code = KINDS.index(spec.kind)
    return np.random.default_rng(
        np.random.SeedSequence(entropy=spec.seed, spawn_key=(kind_code,))
    )


def generate(spec: GeneratorSpec) -> AlignedSeriesPair:
    """Driver/target pair of length ``spec.n`` with documented coupling.

    Couplings act from X_{t-1} to Y_t, so a lag-1 causality test in the
    driver-to-target direction sees the planted signal.
    """
    rng = _rng(spec)
    n, p = spec.n, spec.params
    total = n + _BURN_IN

    if spec.kind == "iid_gaussian":
        driver = p["sigma_driver"] * rng.standard_normal(n)
        target = p["sigma_target"] * rng.standard_normal(n)
    elif spec.kind == "var1_coupled":
        xi = rng.standard_normal(total)
        eta = rng.standard_normal(total)
        x = np.empty(total)
        y = np.empty(total)
        x[0], y[0] = xi[0], eta[0]
        for t in range(1, total):
            x[t] = p["ar_driver"] * x[t - 1] + xi[t]
            y[t] = p["ar"] * y[t - 1] + p["coupling"] * x[t - 1] + p["noise"] * eta[t]
        driver, target = x[-n:], y[-n:]
    elif spec.kind == "quadratic_coupled":
        x = rng.standard_normal(n + 1)
        eta = rng.standard_normal(n + 1)
        y = p["coupling"] * np.concatenate(([0.0], x[:-1] ** 2)) + p["noise"] * eta
        driver, target = x[1:], y[1:]
    elif spec.kind == "abs_coupled":
        x = np.abs(rng.standard_normal(n + 1))
        signs = np.where(rng.random(n + 1) < 0.5, -1.0, 1.0)
        magnitude = np.abs(rng.standard_normal(n + 1))
        y = p["coupling"] * np.concatenate(([0.0], x[:-1])) * signs * magnitude
        driver, target = x[1:], y[1:]
    elif spec.kind == "logistic_map":
        y = np.empty(total)
        y[0] = rng.uniform(0.05, 0.95)
        for t in range(1, total):
            y[t] = 4.0 * y[t - 1] * (1.0 - y[t - 1])
        driver = rng.standard_normal(n)
        target = y[-n:]
    elif spec.kind == "garch11":
        eta = rng.standard_normal(total)
        h = np.empty(total)
        y = np.empty(total)
        h[0] = p["omega"] / (1.0 - p["arch"] - p["garch"])
        y[0] = np.sqrt(h[0]) * eta[0]
        for t in range(1, total):
            h[t] = p["omega"] + p["arch"] * y[t - 1] ** 2 + p["garch"] * h[t - 1]
            y[t] = np.sqrt(h[t]) * eta[t]
        driver = rng.standard_normal(n)
        target = y[-n:]
    else:  # unreachable, kinds validated in the spec
        raise DataError(spec.kind)

    dates = weekday_calendar(_START_DATE, n)
    meta = (f"synth:{spec.kind}", f"seed:{spec.seed}")
    return AlignedSeriesPair(driver=driver, target=target, dates=dates, meta=meta)
