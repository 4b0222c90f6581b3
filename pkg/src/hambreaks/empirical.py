"""Daily closing-price ingestion and before/after break-point analysis.

Input CSV schema: date (ISO-8601), ticker, close. Price differences are
first differences over consecutive trading days present in the data; a
difference is dated by its later day, and the break day's own difference
belongs to the "after" window.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .stats import (
    MomentSummary,
    jarque_bera,
    mean_difference_test,
    moments,
    variance_ratio_test,
)

__all__ = [
    "EventSpec",
    "PriceSeries",
    "load_prices",
    "load_events",
    "difference",
    "window_split",
    "empirical_report",
    "report_to_frame",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EventSpec:
    """One crisis event: a break date, a window, and the tickers to pool."""

    name: str
    bpd: dt.date
    window_days: int = 20
    tickers: tuple[str, ...] = ()
    exclusions: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.window_days < 1:
            raise ValueError("window must cover at least one day")


@dataclass
class PriceSeries:
    ticker: str
    dates: list[dt.date]
    closes: np.ndarray

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError(f"{self.ticker}: dates must be strictly increasing")
        if np.any(self.closes <= 0):
            raise ValueError(f"{self.ticker}: closes must be positive")


def load_prices(path: str | Path) -> dict[str, PriceSeries]:
    """Read (date, ticker, close) rows into one series per ticker.

    Rows with missing closes are dropped with a logged count; duplicate
    (date, ticker) pairs are an error; out-of-order dates are sorted with
    a warning.
    """
    path = Path(path)
    df = pd.read_csv(path, dtype={"ticker": str})
    missing = {"date", "ticker", "close"} - set(df.columns)
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    if df.empty:
        raise ValueError(f"{path}: no data rows")

    dates = pd.to_datetime(df["date"], format="ISO8601", errors="coerce")
    bad = dates.isna() & df["date"].notna()
    if bad.any():
        line = int(bad.idxmax()) + 2  # header + 1-based
        raise ValueError(f"{path}:{line}: unparseable date {df['date'][bad.idxmax()]!r}")
    closes = pd.to_numeric(df["close"], errors="coerce")
    bad = closes.isna() & df["close"].notna()
    if bad.any():
        line = int(bad.idxmax()) + 2
        raise ValueError(f"{path}:{line}: unparseable close {df['close'][bad.idxmax()]!r}")

    df = df.assign(date=dates.dt.date, close=closes)
    n_missing = int(df["close"].isna().sum())
    if n_missing:
        log.info("%s: dropped %d rows with missing closes", path, n_missing)
        df = df.dropna(subset=["close"])

    dup = df.duplicated(subset=["date", "ticker"])
    if dup.any():
        row = df[dup].iloc[0]
        raise ValueError(f"{path}: duplicate observation ({row['date']}, {row['ticker']})")

    out: dict[str, PriceSeries] = {}
    for ticker, grp in df.groupby("ticker", sort=True):
        if not grp["date"].is_monotonic_increasing:
            log.warning("%s: dates out of order for %s, sorting", path, ticker)
            grp = grp.sort_values("date")
        out[ticker] = PriceSeries(
            ticker=ticker,
            dates=list(grp["date"]),
            closes=grp["close"].to_numpy(dtype=float),
        )
    return out


def load_events(path: str | Path) -> list[EventSpec]:
    """Read the event-configuration JSON file."""
    with open(path) as fh:
        doc = json.load(fh)
    events = []
    for e in doc["events"]:
        events.append(
            EventSpec(
                name=e["name"],
                bpd=dt.date.fromisoformat(e["bpd"]),
                window_days=e.get("window_days", 20),
                tickers=tuple(e["tickers"]),
                exclusions=tuple((t, r) for t, r in e.get("exclusions", [])),
            )
        )
    return events


def difference(series: PriceSeries) -> tuple[list[dt.date], np.ndarray]:
    """First differences over consecutive trading days, dated by the later day."""
    if len(series.dates) < 2:
        raise ValueError(f"{series.ticker}: need at least two observations")
    return series.dates[1:], np.diff(series.closes)


def window_split(
    data: dict[str, PriceSeries], event: EventSpec
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Pool the before/after difference windows across the event's tickers.

    Per ticker: before = the window_days differences dated strictly before
    the break day, after = the window_days differences from the break day
    on. A break day absent from a ticker's dates snaps forward to the next
    trading day. Tickers with insufficient history are skipped with a log
    entry. Returns (before, after, included_tickers).
    """
    excluded = {t for t, _ in event.exclusions}
    before_parts, after_parts, included = [], [], []
    for ticker in event.tickers:
        if ticker in excluded:
            reason = dict(event.exclusions)[ticker]
            log.info("%s: %s excluded (%s)", event.name, ticker, reason)
            continue
        series = data.get(ticker)
        if series is None:
            log.info("%s: %s skipped (no data)", event.name, ticker)
            continue
        dates, diffs = difference(series)
        darr = np.array(dates)
        split = int(np.searchsorted(darr, event.bpd))
        if split < len(dates) and dates[split] != event.bpd:
            log.warning(
                "%s: %s has no trading day on %s, snapping to %s",
                event.name, ticker, event.bpd, dates[split],
            )
        w = event.window_days
        if split < w or len(dates) - split < w:
            log.info(
                "%s: %s skipped (insufficient history: %d before, %d after)",
                event.name, ticker, split, len(dates) - split,
            )
            continue
        before_parts.append(diffs[split - w : split])
        after_parts.append(diffs[split : split + w])
        included.append(ticker)
    before = np.concatenate(before_parts) if before_parts else np.empty(0)
    after = np.concatenate(after_parts) if after_parts else np.empty(0)
    return before, after, included


def _stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


def _arrow(before: float, after: float) -> str:
    if after > before:
        return "up"
    if after < before:
        return "down"
    return ""


@dataclass(frozen=True)
class EventReport:
    name: str
    n_before: int
    n_after: int
    before: MomentSummary
    after: MomentSummary
    mean_arrow: str
    mean_stars: str
    var_arrow: str
    var_stars: str
    var_delta_pct: float
    skew_arrow: str
    kurt_arrow: str
    kurt_delta_pct: float
    jb_p_before: float
    jb_p_after: float
    included: tuple[str, ...] = field(default=())


def empirical_report(
    events: Sequence[EventSpec], data: dict[str, PriceSeries]
) -> tuple[list[EventReport], dict]:
    """Per-event before/after descriptive comparison plus the summary tally.

    The tally counts, over events, how many show a mean/variance/skewness
    increase and a kurtosis decrease ("4/5"-style pattern).
    """
    rows = []
    for event in events:
        before, after, included = window_split(data, event)
        if before.size < 4 or after.size < 4:
            raise ValueError(f"{event.name}: not enough pooled observations")
        mb, ma = moments(before), moments(after)
        mdt = mean_difference_test(after, before)
        vrt = variance_ratio_test(after, before)
        rows.append(
            EventReport(
                name=event.name,
                n_before=mb.n,
                n_after=ma.n,
                before=mb,
                after=ma,
                mean_arrow=_arrow(mb.mean, ma.mean),
                mean_stars=_stars(mdt.p_value),
                var_arrow=_arrow(mb.variance, ma.variance),
                var_stars=_stars(vrt.p_value),
                var_delta_pct=100.0 * (ma.variance - mb.variance) / abs(mb.variance),
                skew_arrow=_arrow(mb.skewness, ma.skewness),
                kurt_arrow=_arrow(mb.kurtosis, ma.kurtosis),
                kurt_delta_pct=100.0 * (ma.kurtosis - mb.kurtosis) / abs(mb.kurtosis),
                jb_p_before=jarque_bera(before).p_value,
                jb_p_after=jarque_bera(after).p_value,
                included=tuple(included),
            )
        )
    n = len(rows)
    tally = {
        "n_events": n,
        "mean_up": sum(r.mean_arrow == "up" for r in rows),
        "var_up": sum(r.var_arrow == "up" for r in rows),
        "skew_up": sum(r.skew_arrow == "up" for r in rows),
        "kurt_down": sum(r.kurt_arrow == "down" for r in rows),
        "avg_var_delta_pct": float(np.mean([r.var_delta_pct for r in rows])),
        "avg_kurt_delta_pct": float(np.mean([r.kurt_delta_pct for r in rows])),
    }
    return rows, tally


def report_to_frame(rows: Sequence[EventReport]) -> pd.DataFrame:
    """Long-format frame with one row per event and side, Table-style columns."""
    records = []
    for r in rows:
        for side, m in (("B", r.before), ("A", r.after)):
            rec = {
                "event": r.name,
                "side": side,
                "n": m.n,
                "mean": m.mean,
                "variance": m.variance,
                "skewness": m.skewness,
                "kurtosis": m.kurtosis,
                "min": m.min,
                "max": m.max,
                "jb_p": r.jb_p_before if side == "B" else r.jb_p_after,
            }
            if side == "A":
                rec.update(
                    mean_arrow=r.mean_arrow,
                    mean_stars=r.mean_stars,
                    var_arrow=r.var_arrow,
                    var_stars=r.var_stars,
                    var_delta_pct=r.var_delta_pct,
                    skew_arrow=r.skew_arrow,
                    kurt_arrow=r.kurt_arrow,
                    kurt_delta_pct=r.kurt_delta_pct,
                )
            records.append(rec)
    return pd.DataFrame.from_records(records)
