"""Shared fixtures: synthetic price data for the event-study tests."""

from __future__ import annotations

import numpy as np
import pytest


def _prices_from_diffs(diffs: np.ndarray, start: float = 500.0) -> np.ndarray:
    return start + np.concatenate([[0.0], np.cumsum(diffs)])


def synthetic_event_data(tmp_path, n_events: int = 5, window: int = 20):
    """Build a CSV of daily closes for ``n_events`` single-ticker events.

    The first n_events - 1 events are constructed so that, after the break
    day, mean, variance and skewness increase while kurtosis decreases; the
    last event reverses every direction. Returns (csv_path, events_dict).
    """
    rng = np.random.default_rng(2024)
    # Weekday-only calendar long enough for every event.
    days = []
    d = np.datetime64("2015-01-01")
    while len(days) < 140:
        if np.is_busday(d):
            days.append(d)
        d += 1
    days = np.array(days)

    rows = ["date,ticker,close"]
    events = []
    for e in range(n_events):
        ticker = f"SYN{e}"
        pre = rng.normal(0.0, 1.0, 60)
        # A couple of large negative outliers: heavy left tail, high kurtosis.
        pre[10] = -9.0
        pre[40] = -7.0
        post = rng.uniform(-4.0, 6.0, 60)  # wider, right-tilted, platykurtic
        if e == n_events - 1:
            pre, post = post, pre
        diffs = np.concatenate([pre, post])
        closes = _prices_from_diffs(diffs)
        # diff k (0-based) lands on day k+1; the break day owns diff 60.
        for day, close in zip(days[: len(closes)], closes):
            rows.append(f"{day},{ticker},{close:.6f}")
        events.append(
            {
                "name": f"event-{e}",
                "bpd": str(days[61]),
                "window_days": window,
                "tickers": [ticker],
            }
        )

    csv_path = tmp_path / "prices.csv"
    csv_path.write_text("\n".join(rows) + "\n")
    return csv_path, {"events": events}


@pytest.fixture
def event_fixture(tmp_path):
    return synthetic_event_data(tmp_path)
