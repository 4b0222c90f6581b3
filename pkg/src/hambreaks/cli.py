"""Command-line entry point: simulate, analyze, compare.

All randomness is controlled by exactly two seeds (simulation master seed
and permutation seed); identical configs and inputs produce byte-identical
report files. Exit codes: 0 success, 1 runtime failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import json
import logging
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np
import pandas as pd

from . import __version__
from .behavior import StrategyGenSpec
from .core import MarketConfig
from .empirical import empirical_report, load_events, load_prices, report_to_frame
from .montecarlo import (
    COMBINATION_SETUPS,
    PAPER13_SETUPS,
    RunConfig,
    derive_run_seed,
    run_batch,
    setup_breaks,
)
from .stats import REPORT_COLUMNS, aggregate

log = logging.getLogger(__name__)

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "perm_seed": {"type": "integer", "minimum": 0},
        "n_perm": {"type": "integer", "minimum": 99},
        "out_dir": {"type": "string"},
        "threads": {"type": "integer", "minimum": 1},
        "market": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "R": {"type": "number", "exclusiveMinimum": 1},
                "beta": {"type": "number", "minimum": 0},
                "risk_term": {"type": "number", "exclusiveMinimum": 0},
                "H": {"type": "integer", "minimum": 1},
                "noise_halfwidth": {"type": "number", "minimum": 0},
                "ybar": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "T": {"type": "integer", "minimum": 10},
                "bpd": {"type": "integer", "minimum": 2},
                "burn_frac": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
                "window": {"type": "integer", "minimum": 0},
                "n_runs": {"type": "integer", "minimum": 1},
            },
        },
        "gen": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "g_mean": {"type": "number"},
                "g_sd": {"type": "number", "exclusiveMinimum": 0},
                "b_mean": {"type": "number"},
                "b_sd": {"type": "number", "exclusiveMinimum": 0},
                "force_fundamentalist": {"type": "boolean"},
            },
        },
        "setups": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "grid": {"type": "string", "enum": ["paper13", "paper13+combos"]},
        "beta_list": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "intensity": {"type": "number"},
        "extensions": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "fundamentalist_default": {"type": "boolean"},
                "stochastic_params": {"type": "boolean"},
                "memory": {"type": "boolean"},
            },
        },
    },
}


class InputError(Exception):
    """Invalid configuration or input data (exit code 2)."""


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read config {path}: {e}") from e
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise InputError(f"config {path} invalid: {e.message} (at {list(e.absolute_path)})") from e
    return doc


def _out_dir(args, config: dict) -> Path:
    out = args.out or config.get("out_dir") or os.environ.get("HAMBREAKS_OUT") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _slug(name: str) -> str:
    return name.replace("+", "_pos_").replace("-", "_neg_").replace("&", "_and_").strip("_")


def _samples_frame(samples) -> pd.DataFrame:
    segments = {
        "B": (samples.B_runs, samples.B_periods),
        "b": (samples.b_runs, samples.B_periods[len(samples.B_periods) - samples.b_runs.shape[1] :]),
        "a": (samples.a_runs, samples.A_periods[: samples.a_runs.shape[1]]),
        "A": (samples.A_runs, samples.A_periods),
    }
    frames = []
    for seg, (runs, periods) in segments.items():
        n_runs, width = runs.shape
        frames.append(
            pd.DataFrame(
                {
                    "run_id": np.repeat(np.arange(n_runs), width),
                    "period": np.tile(periods, n_runs),
                    "segment": seg,
                    "x": runs.reshape(-1),
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(args, config)

    market_kw = dict(config.get("market", {}))
    if args.beta is not None:
        market_kw["beta"] = args.beta
    run_kw = dict(config.get("run", {}))
    ext = config.get("extensions", {})
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    perm_seed = args.perm_seed if args.perm_seed is not None else config.get("perm_seed", 0)
    n_perm = config.get("n_perm", 999)
    threads = args.threads or config.get("threads", 1)
    intensity = args.intensity if args.intensity is not None else config.get("intensity")

    if args.grid == "paper13" or config.get("grid") == "paper13":
        setups = list(PAPER13_SETUPS)
    elif args.grid == "paper13+combos" or config.get("grid") == "paper13+combos":
        setups = list(PAPER13_SETUPS) + list(COMBINATION_SETUPS)
    elif args.setup:
        setups = [args.setup]
    else:
        setups = config.get("setups", ["none"])

    try:
        market = MarketConfig(**market_kw)
        gen = StrategyGenSpec(**config.get("gen", {}))
        base = RunConfig(
            market=market,
            gen=gen,
            seed=seed,
            fundamentalist_default=ext.get("fundamentalist_default", False),
            stochastic_params=ext.get("stochastic_params", False),
            memory=ext.get("memory", False),
            **run_kw,
        )
        cells = []
        for i, name in enumerate(setups):
            cell_seed = derive_run_seed(seed, i) if len(setups) > 1 else seed
            cells.append(
                (name, dataclasses.replace(base, brk=setup_breaks(name, intensity), seed=cell_seed))
            )
    except (ValueError, TypeError) as e:
        raise InputError(str(e)) from e

    manifest = {
        "version": __version__,
        "created_at": dt.datetime.now().isoformat(),
        "master_seed": seed,
        "perm_seed": perm_seed,
        "n_perm": n_perm,
        "threads": threads,
        "config": config,
        "cells": [],
    }
    report_rows = []
    for name, cfg in cells:
        log.info("simulating setup %s (beta=%g, seed=%d)", name, cfg.market.beta, cfg.seed)
        samples = run_batch(cfg, n_jobs=threads)
        report = aggregate(samples, n_perm=n_perm, perm_seed=perm_seed)
        slug = _slug(name)
        _samples_frame(samples).to_csv(out / f"samples_{slug}.csv", index=False)
        manifest["cells"].append(
            {
                "setup": name,
                "seed": cfg.seed,
                "beta": cfg.market.beta,
                "breaks": [dataclasses.asdict(b) for b in cfg.breaks],
                "samples_file": f"samples_{slug}.csv",
            }
        )
        report_rows.append({"setup": name, "beta": cfg.market.beta, **report.to_dict()})

    pd.DataFrame(report_rows, columns=["setup", "beta", *REPORT_COLUMNS, "n_runs", "kurt_n"]).to_csv(
        out / "report.csv", index=False
    )
    with open(out / "report.json", "w") as fh:
        json.dump({"rows": report_rows}, fh, indent=2)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    print(f"wrote {len(cells)} setup row(s) to {out}")
    return 0


def cmd_analyze(args) -> int:
    out = _out_dir(args, {})
    try:
        data = load_prices(args.data)
        events = load_events(args.events)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        raise InputError(str(e)) from e
    rows, tally = empirical_report(events, data)
    report_to_frame(rows).to_csv(out / "empirical_report.csv", index=False)
    doc = {
        "events": [
            {
                "name": r.name,
                "n_before": r.n_before,
                "n_after": r.n_after,
                "before": dataclasses.asdict(r.before),
                "after": dataclasses.asdict(r.after),
                "mean_arrow": r.mean_arrow,
                "mean_stars": r.mean_stars,
                "var_arrow": r.var_arrow,
                "var_stars": r.var_stars,
                "var_delta_pct": r.var_delta_pct,
                "skew_arrow": r.skew_arrow,
                "kurt_arrow": r.kurt_arrow,
                "kurt_delta_pct": r.kurt_delta_pct,
                "jb_p_before": r.jb_p_before,
                "jb_p_after": r.jb_p_after,
                "included": list(r.included),
            }
            for r in rows
        ],
        "tally": tally,
    }
    with open(out / "empirical_report.json", "w") as fh:
        json.dump(doc, fh, indent=2)
    n = tally["n_events"]
    print(
        f"{n} events: mean up {tally['mean_up']}/{n}, var up {tally['var_up']}/{n}, "
        f"skew up {tally['skew_up']}/{n}, kurt down {tally['kurt_down']}/{n}"
    )
    return 0


def cmd_compare(args) -> int:
    out = _out_dir(args, {})
    try:
        with open(args.sim_report) as fh:
            sim = json.load(fh)
        with open(args.emp_report) as fh:
            emp = json.load(fh)
        rows = sim["rows"]
        tally = emp["tally"]
    except (OSError, KeyError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read reports: {e}") from e

    n_ev = tally["n_events"]
    target = {
        "mean_up": tally["mean_up"] > n_ev / 2,
        "var_up": tally["var_up"] > n_ev / 2,
        "skew_up": tally["skew_up"] > n_ev / 2,
        "kurt_down": tally["kurt_down"] > n_ev / 2,
    }
    results = []
    for row in rows:
        n_runs = row["n_runs"]
        directions = {
            "mean_up": row["mean_up"] > n_runs / 2,
            "var_up": row["var_up"] > n_runs / 2,
            "skew_up": row["skew_up"] > n_runs / 2,
            "kurt_down": row["kurt_down"] > max(1, row.get("kurt_n", n_runs)) / 2,
        }
        distance = abs(row["avg_delta_var_pct"] - tally["avg_var_delta_pct"]) + abs(
            row["avg_delta_kurt_pct"] - tally["avg_kurt_delta_pct"]
        )
        results.append(
            {
                "setup": row["setup"],
                "directional_match": directions == target,
                "matched_directions": sum(directions[k] == target[k] for k in target),
                "delta_distance": distance,
            }
        )
    results.sort(key=lambda r: (not r["directional_match"], r["delta_distance"]))
    for rank, r in enumerate(results, 1):
        r["rank"] = rank
        flag = "MATCH" if r["directional_match"] else "     "
        print(
            f"{rank:3d}. {flag} {r['setup']:<45s} directions {r['matched_directions']}/4 "
            f"delta-distance {r['delta_distance']:.1f}"
        )
    with open(out / "comparison.json", "w") as fh:
        json.dump({"target_pattern": target, "ranking": results}, fh, indent=2)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hambreaks",
        description="Heterogeneous agent market simulator with behavioral break injection.",
    )
    parser.add_argument("--version", action="version", version=f"hambreaks {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run seeded Monte Carlo batches and write reports")
    sim.add_argument("--config", help="experiment configuration JSON file")
    sim.add_argument("--seed", type=int, help="master simulation seed")
    sim.add_argument("--perm-seed", type=int, help="permutation-test seed")
    sim.add_argument("--setup", help="single setup name, e.g. none, herding, sentiment+bias")
    sim.add_argument(
        "--grid", choices=["paper13", "paper13+combos"], help="run a named list of setups"
    )
    sim.add_argument("--beta", type=float, help="intensity of choice override")
    sim.add_argument("--intensity", type=float, help="behavioral element intensity override")
    sim.add_argument("--threads", type=int, help="worker parallelism cap")
    sim.add_argument("--out", help="output directory (default $HAMBREAKS_OUT or ./out)")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="before/after analysis of daily closing prices")
    ana.add_argument("--data", required=True, help="CSV with date,ticker,close columns")
    ana.add_argument("--events", required=True, help="event-configuration JSON file")
    ana.add_argument("--out", help="output directory (default $HAMBREAKS_OUT or ./out)")
    ana.set_defaults(func=cmd_analyze)

    cmp_ = sub.add_parser("compare", help="match simulated setups against the empirical pattern")
    cmp_.add_argument("--sim-report", required=True, help="simulation report.json")
    cmp_.add_argument("--emp-report", required=True, help="empirical_report.json")
    cmp_.add_argument("--out", help="output directory (default $HAMBREAKS_OUT or ./out)")
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - CLI boundary
        log.exception("runtime failure")
        print(f"runtime failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
