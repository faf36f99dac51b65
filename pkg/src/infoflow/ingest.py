"""CSV ingestion for the daily sentiment and price schemas.

Sentiment files carry exactly the columns
``timestamp_utc,symbol,bull_scored_messages,bear_scored_messages`` with one
row per (day, symbol); duplicate rows for the same key are summed.  Price
files carry ``date,symbol,close,high,low``.  Malformed rows never abort a
load: they are collected as :class:`RowIssue` diagnostics with their line
numbers so callers can report them.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .series import ActivitySeries, PriceSeries

SENTIMENT_COLUMNS = (
    "timestamp_utc",
    "symbol",
    "bull_scored_messages",
    "bear_scored_messages",
)
PRICE_COLUMNS = ("date", "symbol", "close", "high", "low")


@dataclass(frozen=True)
class SentimentRecord:
    date: dt.date
    symbol: str
    bullish: int
    bearish: int


@dataclass(frozen=True)
class RowIssue:
    """One rejected CSV row and why."""

    line: int
    reason: str


def _parse_date(text: str) -> dt.date:
    # timestamps may carry a time-of-day suffix; the date prefix is enough
    return dt.date.fromisoformat(text.strip()[:10])


def _open_reader(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    return path


def _check_header(fieldnames, required, path) -> None:
    if fieldnames is None:
        raise DataError(f"{path}: file is empty")
    missing = [c for c in required if c not in fieldnames]
    if missing:
        raise DataError(f"{path}: missing required columns {missing}")


def load_sentiment_csv(path):
    """Per-symbol ActivitySeries from a sentiment CSV.

    Returns ``(series_by_symbol, issues)``.  Duplicate (date, symbol) rows
    are summed; rows with bad dates or negative/non-integer counts become
    issues.  A file without the required header or without a single valid
    row raises DataError.
    """
    path = _open_reader(path)
    issues: list[RowIssue] = []
    counts: dict[str, dict[dt.date, list[int]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames, SENTIMENT_COLUMNS, path)
        for line_no, row in enumerate(reader, start=2):
            try:
                day = _parse_date(row["timestamp_utc"])
                symbol = row["symbol"].strip()
                if not symbol:
                    raise ValueError("empty symbol")
                bull = int(row["bull_scored_messages"])
                bear = int(row["bear_scored_messages"])
                if bull < 0 or bear < 0:
                    raise ValueError(f"negative count ({bull}, {bear})")
            except (KeyError, TypeError, ValueError) as exc:
                issues.append(RowIssue(line=line_no, reason=str(exc)))
                continue
            slot = counts.setdefault(symbol, {}).setdefault(day, [0, 0])
            slot[0] += bull
            slot[1] += bear

    if not counts:
        raise DataError(f"{path}: no valid sentiment rows")
    series = {}
    for symbol, by_day in counts.items():
        days = sorted(by_day)
        series[symbol] = ActivitySeries(
            dates=tuple(days),
            bullish=np.array([by_day[d][0] for d in days], dtype=np.int64),
            bearish=np.array([by_day[d][1] for d in days], dtype=np.int64),
        )
    return series, issues


def load_prices_csv(path):
    """Per-symbol PriceSeries from a price CSV.

    Returns ``(series_by_symbol, issues)``.  Rows with non-positive
    prices, high < low, a close outside the high/low range, or a duplicate
    date for the same symbol are rejected as issues.  Rows may arrive in
    any date order; each series is returned date-sorted.
    """
    path = _open_reader(path)
    issues: list[RowIssue] = []
    rows: dict[str, dict[dt.date, tuple]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames, PRICE_COLUMNS, path)
        for line_no, row in enumerate(reader, start=2):
            try:
                day = _parse_date(row["date"])
                symbol = row["symbol"].strip()
                if not symbol:
                    raise ValueError("empty symbol")
                close = float(row["close"])
                high = float(row["high"])
                low = float(row["low"])
                if close <= 0 or high <= 0 or low <= 0:
                    raise ValueError("non-positive price")
                if high < low:
                    raise ValueError(f"high {high} below low {low}")
                if not low <= close <= high:
                    raise ValueError(f"close {close} outside [{low}, {high}]")
            except (KeyError, TypeError, ValueError) as exc:
                issues.append(RowIssue(line=line_no, reason=str(exc)))
                continue
            per_symbol = rows.setdefault(symbol, {})
            if day in per_symbol:
                issues.append(RowIssue(line=line_no, reason=f"duplicate date {day} for {symbol}"))
                continue
            per_symbol[day] = (close, high, low)

    if not rows:
        raise DataError(f"{path}: no valid price rows")
    series = {}
    for symbol, by_day in rows.items():
        days = sorted(by_day)
        series[symbol] = PriceSeries(
            dates=tuple(days),
            close=np.array([by_day[d][0] for d in days]),
            high=np.array([by_day[d][1] for d in days]),
            low=np.array([by_day[d][2] for d in days]),
        )
    return series, issues


def write_sentiment_csv(path, records) -> None:
    """Emit sentiment rows in the canonical column order."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SENTIMENT_COLUMNS)
        for rec in records:
            writer.writerow([rec.date.isoformat(), rec.symbol, rec.bullish, rec.bearish])


def write_prices_csv(path, rows) -> None:
    """Emit price rows (date, symbol, close, high, low tuples)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PRICE_COLUMNS)
        for day, symbol, close, high, low in rows:
            writer.writerow([
                day.isoformat(), symbol,
                f"{close:.6f}", f"{high:.6f}", f"{low:.6f}",
            ])
