#!/usr/bin/env python3
"""Before/after event study on daily closing prices.

Takes a CSV of (date, ticker, close) rows and an event-configuration JSON
(defaults to the packaged index-crisis registry), prints the per-event
descriptive comparison, and reports the summary tally. Example:

    python3 scripts/run_event_study.py --data closes.csv
"""

import argparse
import sys
from importlib import resources

import pandas as pd

from hambreaks.empirical import empirical_report, load_events, load_prices, report_to_frame


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", required=True, help="CSV with date,ticker,close columns")
    parser.add_argument("--events", default=None,
                        help="event JSON (default: packaged index-crisis registry)")
    parser.add_argument("--out", default=None, help="optional CSV output path")
    args = parser.parse_args(argv)

    if args.events is None:
        ref = resources.files("hambreaks.data") / "events_djia.json"
        events = load_events(str(ref))
    else:
        events = load_events(args.events)
    data = load_prices(args.data)

    rows, tally = empirical_report(events, data)
    frame = report_to_frame(rows)
    with pd.option_context("display.width", 220, "display.max_columns", None):
        print(frame.round(3).to_string(index=False))
    n = tally["n_events"]
    print(
        f"\nsummary: mean up {tally['mean_up']}/{n}, var up {tally['var_up']}/{n}, "
        f"skew up {tally['skew_up']}/{n}, kurt down {tally['kurt_down']}/{n}"
    )
    if args.out:
        frame.to_csv(args.out, index=False)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
