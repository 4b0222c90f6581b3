"""Seeded Monte Carlo driver: runs, four-way sample splits, experiment grid.

Each run produces a length-T deviation series; the break pipeline is in
force from the break period onward (sentiment mean shift and overconfidence
scaling once at the break, herding re-applied every period). Splitting
discards a burn-in fraction at both ends and pools four segments across
runs: complete-before (B), short-before (b), short-after (a),
complete-after (A).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .behavior import (
    OVERCONFIDENCE_RANGE,
    SENTIMENT_BIAS_RANGE,
    SENTIMENT_TREND_RANGE,
    BreakSpec,
    StrategyGenSpec,
    apply_herding,
    apply_overconfidence,
    apply_sentiment,
    generate_strategies,
)
from .core import MarketConfig, Strategy, update_fractions

__all__ = [
    "RunConfig",
    "RunSamples",
    "PAPER_BETA_GRID",
    "PAPER13_SETUPS",
    "COMBINATION_SETUPS",
    "derive_run_seed",
    "setup_breaks",
    "memory_lengths",
    "simulate_run",
    "split_samples",
    "run_batch",
    "sweep_grid",
]

PAPER_BETA_GRID = (5, 60, 115, 170, 225, 280, 335, 390, 445, 500)

# Fixed break pipeline order: distribution-level, then parameter-level,
# then per-period effects.
_PIPELINE_ORDER = {"sentiment": 0, "overconfidence": 1, "herding": 2}

_U64 = (1 << 64) - 1


def derive_run_seed(master_seed: int, run_index: int) -> int:
    """Child seed for run ``run_index``: splitmix64 at offset run_index + 1."""
    z = (master_seed + (run_index + 1) * 0x9E3779B97F4A7C15) & _U64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64
    return (z ^ (z >> 31)) & _U64


def _normalize_breaks(brk) -> tuple[BreakSpec, ...]:
    if brk is None:
        breaks: tuple[BreakSpec, ...] = ()
    elif isinstance(brk, BreakSpec):
        breaks = (brk,)
    else:
        breaks = tuple(brk)
    breaks = tuple(b for b in breaks if b.kind != "none")
    kinds = [b.kind for b in breaks]
    if len(set(kinds)) != len(kinds):
        raise ValueError(f"duplicate break kinds in pipeline: {kinds}")
    return tuple(sorted(breaks, key=lambda b: _PIPELINE_ORDER[b.kind]))


@dataclass(frozen=True)
class RunConfig:
    """Everything one Monte Carlo batch needs, including the master seed."""

    market: MarketConfig = field(default_factory=MarketConfig)
    gen: StrategyGenSpec = field(default_factory=StrategyGenSpec)
    brk: BreakSpec | tuple[BreakSpec, ...] | None = None
    T: int = 250
    bpd: int = 126
    burn_frac: float = 0.10
    window: int = 20
    seed: int = 0
    n_runs: int = 100
    fundamentalist_default: bool = False
    stochastic_params: bool = False
    memory: bool = False
    sentiment_redraw: bool = False

    def __post_init__(self):
        object.__setattr__(self, "brk", _normalize_breaks(self.brk))
        if not 0 < self.burn_frac < 0.5:
            raise ValueError(f"burn fraction must be in (0, 0.5), got {self.burn_frac}")
        if not self.bpd < self.T:
            raise ValueError(f"break period {self.bpd} must precede series end {self.T}")
        if self.window < 0:
            raise ValueError("window must be non-negative")
        if self.window > self.bpd * (1 - self.burn_frac):
            raise ValueError(
                f"window {self.window} exceeds the pre-break retained segment"
            )
        if self.n_runs < 1:
            raise ValueError("need at least one run")
        if self.seed < 0:
            raise ValueError("seed must be an unsigned integer")

    @property
    def breaks(self) -> tuple[BreakSpec, ...]:
        return self.brk  # normalized in __post_init__

    @property
    def burn(self) -> int:
        """Observations discarded at each end."""
        return math.ceil(self.T * self.burn_frac)


@dataclass
class RunSamples:
    """Per-run four-way segments plus pooled views.

    Row i of each ``*_runs`` array is run i's segment; pooling flattens in
    run order, so results are independent of execution scheduling.
    """

    B_runs: np.ndarray
    b_runs: np.ndarray
    a_runs: np.ndarray
    A_runs: np.ndarray
    B_periods: np.ndarray
    A_periods: np.ndarray
    run_seeds: list[int]
    run_meta: list[dict]

    @property
    def n_runs(self) -> int:
        return self.B_runs.shape[0]

    @property
    def B(self) -> np.ndarray:
        return self.B_runs.reshape(-1)

    @property
    def b(self) -> np.ndarray:
        return self.b_runs.reshape(-1)

    @property
    def a(self) -> np.ndarray:
        return self.a_runs.reshape(-1)

    @property
    def A(self) -> np.ndarray:
        return self.A_runs.reshape(-1)


def memory_lengths(H: int, rng: np.random.Generator) -> np.ndarray:
    """Random memory lengths on {1, ..., 20}; zero draws map to 1."""
    m = rng.integers(0, 21, H)
    m[m == 0] = 1
    return m


def _draw_stochastic_break(brk: BreakSpec, rng: np.random.Generator) -> BreakSpec:
    """Re-draw the break intensity for one run under stochastic parameters."""
    if brk.kind == "overconfidence":
        return replace(brk, intensity_g=float(rng.uniform(*OVERCONFIDENCE_RANGE)))
    if brk.kind == "sentiment":
        ig, ib = brk.intensity_g, brk.intensity_b
        if brk.target in ("trend_only", "both", "mixed"):
            ig = float(rng.uniform(*SENTIMENT_TREND_RANGE))
        if brk.target in ("bias_only", "both", "mixed"):
            ib = float(rng.uniform(*SENTIMENT_BIAS_RANGE))
        return replace(brk, intensity_g=ig, intensity_b=ib)
    return brk


def _one_lag_fitness(gs, bs, x1, x2, x3, R, risk):
    return (x1 - R * x2) * (gs * x3 + bs - R * x2) / risk


def _simulate_run_full(cfg: RunConfig, run_seed: int) -> tuple[np.ndarray, dict]:
    rng = np.random.default_rng(run_seed)
    market = cfg.market
    beta = market.beta
    breaks = list(cfg.breaks)

    if cfg.stochastic_params:
        beta = float(rng.uniform(5.0, 500.0))
        breaks = [_draw_stochastic_break(b, rng) for b in breaks]

    mem = memory_lengths(market.H, rng) if cfg.memory else None

    gen = cfg.gen
    if cfg.fundamentalist_default and not gen.force_fundamentalist:
        gen = replace(gen, force_fundamentalist=True)
    strategies = generate_strategies(gen, market.H, rng, memory=mem)
    eps = rng.uniform(-market.noise_halfwidth, market.noise_halfwidth, cfg.T)

    sentiment = next((b for b in breaks if b.kind == "sentiment"), None)
    overconf = next((b for b in breaks if b.kind == "overconfidence"), None)
    herding = next((b for b in breaks if b.kind == "herding"), None)

    R, risk = market.R, market.risk_term
    max_m = int(max(s.m for s in strategies))
    ms = np.array([s.m for s in strategies])
    # Zero pre-history: the fundamental equilibrium; burn-in absorbs it.
    hist = [0.0] * max(3, max_m + 2)
    gs = np.array([s.g for s in strategies])
    bs = np.array([s.b for s in strategies])

    series = np.empty(cfg.T)
    herd_index = market.H - 1
    for t in range(1, cfg.T + 1):
        if t == cfg.bpd:
            if sentiment is not None:
                shifted = apply_sentiment(gen, sentiment)
                if cfg.sentiment_redraw:
                    strategies = generate_strategies(shifted, market.H, rng, memory=mem)
                else:
                    dg = shifted.g_mean - gen.g_mean
                    db = shifted.b_mean - gen.b_mean
                    strategies = [
                        s if (gen.force_fundamentalist and i == 0)
                        else replace(s, g=s.g + dg, b=s.b + db)
                        for i, s in enumerate(strategies)
                    ]
            if overconf is not None:
                strategies = [apply_overconfidence(s, overconf) for s in strategies]
            gs = np.array([s.g for s in strategies])
            bs = np.array([s.b for s in strategies])
        if herding is not None and t >= cfg.bpd:
            fit_prev = _one_lag_fitness(gs, bs, hist[-1], hist[-2], hist[-3], R, risk)
            strategies = apply_herding(strategies, fit_prev, herd_index)
            gs = np.array([s.g for s in strategies])
            bs = np.array([s.b for s in strategies])

        if cfg.memory and max_m > 1:
            tail = np.asarray(hist[-(max_m + 2):])
            x1 = tail[-1 : -1 - max_m : -1]
            x2 = tail[-2 : -2 - max_m : -1]
            x3 = tail[-3 : -3 - max_m : -1]
            terms = (x1[:, None] - R * x2[:, None]) * (
                gs[None, :] * x3[:, None] + bs[None, :] - R * x2[:, None]
            ) / risk
            csum = np.cumsum(terms, axis=0)
            fitness = csum[ms - 1, np.arange(market.H)] / ms
        else:
            fitness = _one_lag_fitness(gs, bs, hist[-1], hist[-2], hist[-3], R, risk)

        fractions = update_fractions(fitness, beta)
        x = (fractions @ (gs * hist[-1] + bs) + eps[t - 1]) / R
        series[t - 1] = x
        hist.append(x)

    meta = {
        "run_seed": run_seed,
        "beta": beta,
        "breaks": [
            {
                "kind": b.kind,
                "target": b.target,
                "intensity_g": b.intensity_g,
                "intensity_b": b.intensity_b,
                "sign": b.sign,
            }
            for b in breaks
        ],
    }
    return series, meta


def simulate_run(cfg: RunConfig, run_seed: int) -> np.ndarray:
    """One deterministic deviation series of length T for the given seed."""
    series, _ = _simulate_run_full(cfg, run_seed)
    return series


def split_samples(series: np.ndarray, cfg: RunConfig) -> dict[str, np.ndarray]:
    """Four-way split of one run after trimming the burn-in at both ends.

    With defaults (T=250, break at 126, 10% burn, window 20) this retains
    periods 26..125 before and 126..225 after, 100 points each side.
    """
    series = np.asarray(series)
    if series.shape[0] != cfg.T:
        raise ValueError(f"series length {series.shape[0]} != T={cfg.T}")
    burn = cfg.burn
    B = series[burn : cfg.bpd - 1]
    A = series[cfg.bpd - 1 : cfg.T - burn]
    if cfg.window > len(B) or cfg.window > len(A):
        raise ValueError(
            f"window {cfg.window} larger than retained segment "
            f"({len(B)} before, {len(A)} after)"
        )
    return {
        "B": B,
        "b": B[len(B) - cfg.window :],
        "a": A[: cfg.window],
        "A": A,
    }


def run_batch(cfg: RunConfig, n_jobs: int = 1) -> RunSamples:
    """Execute cfg.n_runs independent runs and pool the four segments.

    Run i uses the child seed derive_run_seed(cfg.seed, i); results are
    reduced in run order, so output does not depend on ``n_jobs``.
    """
    seeds = [derive_run_seed(cfg.seed, i) for i in range(cfg.n_runs)]

    def one(i: int):
        series, meta = _simulate_run_full(cfg, seeds[i])
        return split_samples(series, cfg), meta

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(one, range(cfg.n_runs)))
    else:
        results = [one(i) for i in range(cfg.n_runs)]

    parts = {k: np.stack([r[0][k] for r in results]) for k in ("B", "b", "a", "A")}
    burn = cfg.burn
    return RunSamples(
        B_runs=parts["B"],
        b_runs=parts["b"],
        a_runs=parts["a"],
        A_runs=parts["A"],
        B_periods=np.arange(burn + 1, cfg.bpd),
        A_periods=np.arange(cfg.bpd, cfg.T - burn + 1),
        run_seeds=seeds,
        run_meta=[r[1] for r in results],
    )


def _intensity_variants(brk: BreakSpec, n: int = 10) -> list[BreakSpec]:
    """Evenly spaced intensities over the break element's declared range."""
    if brk.kind == "overconfidence":
        return [
            replace(brk, intensity_g=float(c))
            for c in np.linspace(*OVERCONFIDENCE_RANGE, n)
        ]
    if brk.kind == "sentiment":
        gs = np.linspace(*SENTIMENT_TREND_RANGE, n)
        bs = np.linspace(*SENTIMENT_BIAS_RANGE, n)
        out = []
        for g, b in zip(gs, bs):
            ig = float(g) if brk.target in ("trend_only", "both", "mixed") else brk.intensity_g
            ib = float(b) if brk.target in ("bias_only", "both", "mixed") else brk.intensity_b
            out.append(replace(brk, intensity_g=ig, intensity_b=ib))
        return out
    return [brk]


def sweep_grid(
    base: RunConfig,
    beta_list: Sequence[float] | None = None,
    intensity_list: Sequence[BreakSpec] | None = None,
    n_jobs: int = 1,
) -> list[tuple[RunConfig, RunSamples]]:
    """Cartesian beta-by-intensity sweep; one batch per cell.

    Under stochastic parameters the grid collapses to a single cell with
    beta and intensity re-drawn per run. Cell c gets the child master seed
    derive_run_seed(base.seed, c).
    """
    if base.stochastic_params:
        cells = [base]
    else:
        betas = list(beta_list) if beta_list is not None else list(PAPER_BETA_GRID)
        if not betas:
            raise ValueError("beta list must be non-empty")
        if intensity_list is not None:
            variants = [_normalize_breaks(b) for b in intensity_list]
        elif base.breaks:
            per_break = [_intensity_variants(b) for b in base.breaks]
            # Intensities of composed breaks move together along the grid.
            variants = [tuple(col) for col in zip(*per_break)]
        else:
            variants = [()]
        cells = [
            replace(base, market=replace(base.market, beta=float(beta)), brk=brk)
            for beta in betas
            for brk in variants
        ]
    out = []
    for idx, cell in enumerate(cells):
        cell = replace(cell, seed=derive_run_seed(base.seed, idx) if len(cells) > 1 else base.seed)
        out.append((cell, run_batch(cell, n_jobs=n_jobs)))
    return out


PAPER13_SETUPS = (
    "none",
    "herding",
    "overconfidence-bias",
    "overconfidence-trend",
    "overconfidence-both",
    "sentiment+bias",
    "sentiment+trend",
    "sentiment+mix",
    "sentiment+both",
    "sentiment-bias",
    "sentiment-trend",
    "sentiment-mix",
    "sentiment-both",
)

COMBINATION_SETUPS = (
    "herding&overconfidence-bias",
    "herding&sentiment+bias",
    "overconfidence-bias&sentiment+bias",
    "herding&overconfidence-bias&sentiment+bias",
)

_TARGET_BY_SUFFIX = {
    "bias": "bias_only",
    "trend": "trend_only",
    "mix": "mixed",
    "both": "both",
}


def _single_setup(name: str, intensity: float | None) -> BreakSpec:
    if name == "none":
        return BreakSpec(kind="none")
    if name == "herding":
        return BreakSpec(kind="herding")
    if name.startswith("overconfidence-"):
        target = _TARGET_BY_SUFFIX[name.removeprefix("overconfidence-")]
        c = intensity if intensity is not None else OVERCONFIDENCE_RANGE[1]
        return BreakSpec(kind="overconfidence", target=target, intensity_g=c)
    if name.startswith("sentiment+") or name.startswith("sentiment-"):
        sign = "positive" if name[len("sentiment")] == "+" else "negative"
        suffix = name[len("sentiment") + 1 :] or "both"
        target = _TARGET_BY_SUFFIX[suffix]
        ig = intensity if intensity is not None else SENTIMENT_TREND_RANGE[1]
        # Keep the bias shift inside its own declared range (3/4 of trend's).
        ib = min(intensity, SENTIMENT_BIAS_RANGE[1]) if intensity is not None else SENTIMENT_BIAS_RANGE[1]
        return BreakSpec(
            kind="sentiment", target=target, intensity_g=ig, intensity_b=ib, sign=sign
        )
    raise ValueError(f"unknown setup name {name!r}")


def setup_breaks(name: str, intensity: float | None = None) -> tuple[BreakSpec, ...]:
    """Break pipeline for a named setup; '&' composes multiple elements."""
    return _normalize_breaks([_single_setup(p, intensity) for p in name.split("&")])
