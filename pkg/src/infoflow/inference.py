"""Surrogate-permutation significance for transfer entropy and the lag scan.

The null distribution for TE(X -> Y) comes from shuffling the whole
driver series relative to the target (destroying all of the driver's
cross- and auto-structure) and re-estimating TE per shuffle.  P-values use
the plus-one estimator p = (1 + #{TE_shuffled >= TE_observed}) / (1 + N),
so they are never exactly zero.

Every permutation draws from its own RNG stream derived from
(seed, direction, lag, permutation index) via numpy's SeedSequence spawn
keys (PCG64), so results are bit-identical for any worker count or
execution order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .density import KdeConfig
from .errors import DataError
from .granger import DEFAULT_LAGS, GcResult, granger_test
from .series import AlignedSeriesPair
from .te import (
    DIRECTIONS,
    CausalityQuery,
    TePermutationKernels,
    TeResult,
)

MODE_NONLINEAR = "nonlinear"
MODE_LINEAR = "linear"


@dataclass(frozen=True)
class SurrogateConfig:
    """Permutation count, master seed and multiple-testing setup."""

    n_permutations: int = 400
    seed: int = 0
    alpha: float = 0.05
    n_hypotheses: int = 10

    def __post_init__(self):
        if self.n_permutations < 100:
            raise DataError(
                f"need at least 100 permutations, got {self.n_permutations}"
            )
        if not 0.0 < self.alpha < 1.0:
            raise DataError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.n_hypotheses < 1:
            raise DataError("n_hypotheses must be positive")


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 generator for a (seed, *key) path."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def bonferroni(pvalues, n_hypotheses: int) -> list:
    """Multiply each p-value by the hypothesis count, clamped at 1."""
    out = []
    for p in pvalues:
        if not 0.0 <= p <= 1.0:
            raise DataError(f"p-value {p} outside [0, 1]")
        out.append(min(1.0, p * n_hypotheses))
    return out


def _surrogate_values(
    kernels: TePermutationKernels, cfg: SurrogateConfig, n_workers: int = 1
) -> np.ndarray:
    """TE of every driver shuffle, indexed by permutation number.

    Each permutation derives its own RNG stream from its index, so the
    values array is identical for any ``n_workers`` or scheduling; workers
    write disjoint index ranges with private scratch buffers.
    """
    n = len(kernels.source_full)
    dir_code = DIRECTIONS.index(kernels.query.direction)
    lag = kernels.query.lag
    values = np.empty(cfg.n_permutations)

    def run_range(start: int, stop: int) -> None:
        buf = kernels.make_buffer()
        for i in range(start, stop):
            rng = stream(cfg.seed, dir_code, lag, i)
            values[i] = kernels.shuffled_te(rng.permutation(n), buf)

    if n_workers <= 1:
        run_range(0, cfg.n_permutations)
        return values
    bounds = np.linspace(0, cfg.n_permutations, n_workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        futures = [
            pool.submit(run_range, bounds[w], bounds[w + 1]) for w in range(n_workers)
        ]
        for fut in futures:
            fut.result()
    return values


def permutation_pvalue(
    pair: AlignedSeriesPair,
    query: CausalityQuery,
    kde: KdeConfig | None = None,
    cfg: SurrogateConfig | None = None,
    n_workers: int = 1,
) -> TeResult:
    """Observed TE with its surrogate p-value at one lag and direction.

    Deterministic given ``cfg.seed``; the observed statistic and every
    surrogate reuse the same cached sink kernels, so only the shuffled
    driver column is re-evaluated per permutation.
    """
    if cfg is None:
        cfg = SurrogateConfig()
    kernels = TePermutationKernels(pair, query, kde)
    te_observed = kernels.observed_te()
    surrogates = _surrogate_values(kernels, cfg, n_workers)
    n_extreme = int(np.sum(surrogates >= te_observed))
    pvalue = (1.0 + n_extreme) / (1.0 + cfg.n_permutations)
    adjusted = bonferroni([pvalue], cfg.n_hypotheses)[0]
    return TeResult(
        te=te_observed,
        lag=query.lag,
        direction=query.direction,
        surrogate_pvalue=pvalue,
        adjusted_pvalue=adjusted,
    )


@dataclass(frozen=True)
class LagScanResult:
    """Per-lag results over the lag grid plus the family-wise verdict."""

    mode: str
    direction: str
    results: tuple
    significant: bool


def lag_scan(
    pair: AlignedSeriesPair,
    lags=DEFAULT_LAGS,
    mode: str = MODE_NONLINEAR,
    cfg: SurrogateConfig | None = None,
    kde: KdeConfig | None = None,
    direction: str = "driver_to_target",
    n_workers: int = 1,
) -> LagScanResult:
    """Causality test at every lag with Bonferroni control.

    ``mode`` selects the nonparametric TE test with surrogates or the
    linear Granger F-test.  Each lag uses its maximal usable sample; no
    common row set is imposed across lags.  Permutations inside each lag
    are the parallel work units; results are identical for any
    ``n_workers``.
    """
    if cfg is None:
        cfg = SurrogateConfig()
    pair.require_min_length()
    lags = tuple(int(k) for k in lags)

    if mode == MODE_NONLINEAR:
        def one(lag: int) -> TeResult:
            query = CausalityQuery(lag=lag, direction=direction)
            return permutation_pvalue(pair, query, kde, cfg, n_workers=n_workers)
    elif mode == MODE_LINEAR:
        scan_pair = pair if direction == "driver_to_target" else pair.swapped()

        def one(lag: int) -> GcResult:
            res = granger_test(scan_pair.target, scan_pair.driver, lag)
            adjusted = bonferroni([res.pvalue], cfg.n_hypotheses)[0]
            return GcResult(
                lag=res.lag,
                gc_value=res.gc_value,
                f_stat=res.f_stat,
                pvalue=res.pvalue,
                adjusted_pvalue=adjusted,
            )
    else:
        raise DataError(f"unknown scan mode {mode!r}")

    results = tuple(one(lag) for lag in lags)
    significant = any(r.adjusted_pvalue < cfg.alpha for r in results)
    return LagScanResult(
        mode=mode, direction=direction, results=results, significant=significant
    )
