"""Series containers and the deterministic transforms applied before inference.

Holds daily price and message-count series, the aligned driver/target pair
that every causality estimator consumes, and the elementwise transforms
(log-returns, differencing, log1p, absolute value, range-based volatility)
used by the functional-form sweep.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, EmptyOverlapError

# KDE bandwidths and F-tests are meaningless on shorter windows; enforced at
# every inference entry point, not at pair construction.
MIN_INFERENCE_LENGTH = 30


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional")
    return arr


def _check_dates_increasing(dates, name: str) -> tuple:
    dates = tuple(dates)
    for i in range(1, len(dates)):
        if not dates[i - 1] < dates[i]:
            raise DataError(f"{name} dates must be strictly increasing (index {i})")
    return dates


@dataclass(frozen=True)
class PriceSeries:
    """Daily close/high/low prices for one symbol.

    Dates are strictly increasing, prices strictly positive and low <= high.
    Whether the close prints inside the high/low range is checked at
    ingestion, not here.
    """

    dates: tuple
    close: np.ndarray
    high: np.ndarray
    low: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", _check_dates_increasing(self.dates, "price"))
        for name in ("close", "high", "low"):
            arr = _as_float_array(getattr(self, name), name)
            object.__setattr__(self, name, arr)
            if len(arr) != len(self.dates):
                raise DataError(f"{name} length {len(arr)} != dates length {len(self.dates)}")
            if not np.all(np.isfinite(arr)):
                raise DataError(f"{name} contains non-finite values")
            if np.any(arr <= 0):
                idx = int(np.argmax(arr <= 0))
                raise DataError(f"non-positive {name} at index {idx}")
        if np.any(self.low > self.high):
            idx = int(np.argmax(self.low > self.high))
            raise DataError(f"low > high at index {idx}")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class ActivitySeries:
    """Daily bullish/bearish message counts for one symbol.

    Calendar days may be missing; a missing day means a zero-count day.
    """

    dates: tuple
    bullish: np.ndarray
    bearish: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", _check_dates_increasing(self.dates, "activity"))
        for name in ("bullish", "bearish"):
            arr = np.asarray(getattr(self, name))
            if arr.ndim != 1 or len(arr) != len(self.dates):
                raise DataError(f"{name} must be 1-d with one value per date")
            if not np.issubdtype(arr.dtype, np.integer):
                if not np.all(arr == np.floor(arr)):
                    raise DataError(f"{name} counts must be integers")
                arr = arr.astype(np.int64)
            if np.any(arr < 0):
                idx = int(np.argmax(arr < 0))
                raise DataError(f"negative {name} count at index {idx}")
            object.__setattr__(self, name, arr.astype(np.int64))

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class AlignedSeriesPair:
    """Equal-length driver and target series on the target's trading calendar.

    ``meta`` records the transforms applied so far, newest last.  Inference
    entry points additionally require ``len(pair) >= MIN_INFERENCE_LENGTH``
    via :meth:`require_min_length`; construction only checks shape and
    finiteness so that small fixtures stay representable.
    """

    driver: np.ndarray
    target: np.ndarray
    dates: tuple | None = None
    meta: tuple = field(default_factory=tuple)

    def __post_init__(self):
        driver = _as_float_array(self.driver, "driver")
        target = _as_float_array(self.target, "target")
        if len(driver) != len(target):
            raise DataError(
                f"driver length {len(driver)} != target length {len(target)}"
            )
        if not np.all(np.isfinite(driver)):
            raise DataError("driver contains non-finite values")
        if not np.all(np.isfinite(target)):
            raise DataError("target contains non-finite values")
        object.__setattr__(self, "driver", driver)
        object.__setattr__(self, "target", target)
        if self.dates is not None:
            dates = _check_dates_increasing(self.dates, "pair")
            if len(dates) != len(target):
                raise DataError("dates length does not match series length")
            object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "meta", tuple(self.meta))

    def __len__(self) -> int:
        return len(self.target)

    def require_min_length(self, minimum: int = MIN_INFERENCE_LENGTH) -> None:
        if len(self) < minimum:
            raise DataError(
                f"aligned pair has {len(self)} observations; "
                f"at least {minimum} required for inference"
            )

    def swapped(self) -> "AlignedSeriesPair":
        """Pair with driver and target roles exchanged."""
        return AlignedSeriesPair(
            driver=self.target,
            target=self.driver,
            dates=self.dates,
            meta=self.meta + ("swapped",),
        )

    def with_series(self, driver=None, target=None, note: str = "") -> "AlignedSeriesPair":
        """Copy with one or both series replaced (lengths must still agree)."""
        new_driver = self.driver if driver is None else np.asarray(driver, dtype=float)
        new_target = self.target if target is None else np.asarray(target, dtype=float)
        dates = self.dates
        if dates is not None and len(new_target) != len(dates):
            dates = dates[len(dates) - len(new_target):] if len(new_target) < len(dates) else None
        meta = self.meta + ((note,) if note else ())
        return AlignedSeriesPair(driver=new_driver, target=new_target, dates=dates, meta=meta)


def log_returns(prices: PriceSeries) -> np.ndarray:
    """Daily log-returns ln(close[i+1]) - ln(close[i]); length shrinks by one."""
    if len(prices) < 2:
        raise DataError("need at least two prices to compute returns")
    # positivity already guaranteed by PriceSeries
    logp = np.log(prices.close)
    return np.diff(logp)


def align_to_trading_days(activity: ActivitySeries, calendar, field: str = "bullish") -> np.ndarray:
    """Sum daily counts onto a trading calendar.

    Each trading day receives its own count plus the counts of all
    non-trading days since the previous trading day (information accrues
    until the market can react).  Days absent from ``activity`` contribute
    zero.  Activity after the last trading day is dropped.

    Parameters
    ----------
    activity : ActivitySeries
    calendar : sequence of trading-day identifiers, sorted ascending
    field : which count column to aggregate ("bullish" or "bearish")

    Returns
    -------
    ndarray of float, one value per calendar day
    """
    calendar = tuple(calendar)
    if not calendar:
        raise DataError("trading calendar is empty")
    for i in range(1, len(calendar)):
        if not calendar[i - 1] < calendar[i]:
            raise DataError("trading calendar must be sorted ascending")
    if field not in ("bullish", "bearish"):
        raise DataError(f"unknown activity field {field!r}")
    counts = getattr(activity, field)

    in_span = [d for d in activity.dates if calendar[0] <= d <= calendar[-1]]
    if not in_span:
        raise EmptyOverlapError(
            "activity data has no dates within the trading calendar span"
        )

    out = np.zeros(len(calendar), dtype=float)
    j = 0
    for i, day in enumerate(activity.dates):
        if day > calendar[-1]:
            break
        while calendar[j] < day:
            j += 1  # cannot run off the end: day <= calendar[-1]
        out[j] += counts[i]
    return out


def difference(x, order: int = 1) -> np.ndarray:
    """First or second difference; length shrinks by ``order``."""
    if order not in (1, 2):
        raise DataError(f"difference order must be 1 or 2, got {order}")
    x = _as_float_array(x, "series")
    if len(x) <= order:
        raise DataError(f"series of length {len(x)} too short for order-{order} differencing")
    return np.diff(x, n=order)


def log1p_transform(x) -> np.ndarray:
    """Elementwise ln(1 + x); requires every value > -1."""
    x = _as_float_array(x, "series")
    bad = x <= -1.0
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise DataError(f"log1p undefined for value {x[idx]} at index {idx}")
    return np.log1p(x)


def abs_transform(x) -> np.ndarray:
    """Elementwise absolute value."""
    return np.abs(_as_float_array(x, "series"))


def volatility_proxy(prices: PriceSeries) -> np.ndarray:
    """Daily relative intraday range 2*(high - low)/(high + low).

    A scale-free volatility proxy in [0, 2) per day.
    """
    return 2.0 * (prices.high - prices.low) / (prices.high + prices.low)


def weekday_calendar(start: dt.date, n_days: int) -> tuple:
    """``n_days`` consecutive weekdays starting on or after ``start``."""
    days = []
    day = start
    while len(days) < n_days:
        if day.weekday() < 5:
            days.append(day)
        day += dt.timedelta(days=1)
    return tuple(days)
