"""Strategy population generation and behavioral break transformations.

Three break kinds are supported, all anchored at the Break Point Date (BPD)
of a simulated series:

* herding    -- one designated strategy copies, each period after the BPD,
                the previous day's most profitable strategy's parameters;
* overconfidence -- the targeted parameters of every strategy are magnified
                by a factor (1 + c) once, at the BPD;
* sentiment  -- the means of the distributions generating g and b are
                shifted at the BPD; existing strategies either receive the
                mean shift in place (default) or are re-drawn from the
                shifted distributions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import Strategy

__all__ = [
    "StrategyGenSpec",
    "BreakSpec",
    "KINDS",
    "TARGETS",
    "SIGNS",
    "OVERCONFIDENCE_RANGE",
    "SENTIMENT_TREND_RANGE",
    "SENTIMENT_BIAS_RANGE",
    "generate_strategies",
    "apply_overconfidence",
    "apply_sentiment",
    "apply_herding",
]

KINDS = ("none", "herding", "overconfidence", "sentiment")
TARGETS = ("bias_only", "trend_only", "both", "mixed")
SIGNS = ("positive", "negative")

OVERCONFIDENCE_RANGE = (0.05, 0.5)
SENTIMENT_TREND_RANGE = (0.04, 0.4)
SENTIMENT_BIAS_RANGE = (0.03, 0.3)


@dataclass(frozen=True)
class StrategyGenSpec:
    """Parameters of the normal distributions generating (g, b) pairs.

    Defaults match g ~ N(0, 0.4^2) and b ~ N(0, 0.3^2). When
    ``force_fundamentalist`` is set the first generated strategy is pinned
    to g = b = 0.
    """

    g_mean: float = 0.0
    g_sd: float = 0.4
    b_mean: float = 0.0
    b_sd: float = 0.3
    force_fundamentalist: bool = False

    def __post_init__(self):
        if not (self.g_sd > 0 and self.b_sd > 0):
            raise ValueError("generation standard deviations must be positive")


@dataclass(frozen=True)
class BreakSpec:
    """Which behavioral element is injected at the BPD and how strongly.

    For overconfidence the magnification factor c lives in ``intensity_g``
    regardless of target. For sentiment, ``intensity_g`` is the trend-mean
    shift magnitude and ``intensity_b`` the bias-mean shift magnitude;
    ``sign`` selects positive or negative sentiment, and target ``mixed``
    applies opposite signs to trend and bias.
    """

    kind: str = "none"
    target: str = "both"
    intensity_g: float = 0.0
    intensity_b: float = 0.0
    sign: str = "positive"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown break kind {self.kind!r}")
        if self.target not in TARGETS:
            raise ValueError(f"unknown break target {self.target!r}")
        if self.sign not in SIGNS:
            raise ValueError(f"unknown sentiment sign {self.sign!r}")
        if self.target == "mixed" and self.kind != "sentiment":
            raise ValueError("target 'mixed' is only valid for sentiment breaks")
        if self.kind == "overconfidence" and self.intensity_g <= 0:
            raise ValueError("overconfidence intensity must be strictly positive")


def generate_strategies(
    spec: StrategyGenSpec,
    H: int,
    rng: np.random.Generator,
    memory: Sequence[int] | None = None,
) -> list[Strategy]:
    """Draw H strategies from the spec's normal distributions.

    Deterministic given the generator state. ``memory`` optionally attaches
    per-strategy memory lengths (defaults to 1 everywhere).
    """
    if H < 1:
        raise ValueError("need at least one strategy")
    gs = rng.normal(spec.g_mean, spec.g_sd, H)
    bs = rng.normal(spec.b_mean, spec.b_sd, H)
    if spec.force_fundamentalist:
        gs[0] = 0.0
        bs[0] = 0.0
    ms = [1] * H if memory is None else list(memory)
    return [Strategy(g=float(g), b=float(b), m=m) for g, b, m in zip(gs, bs, ms)]


def apply_overconfidence(s: Strategy, spec: BreakSpec) -> Strategy:
    """Magnify the targeted parameters of one strategy by (1 + c).

    Scaling preserves sign, so |g'| >= |g| and |b'| >= |b| always.
    """
    if spec.kind != "overconfidence":
        raise ValueError(f"expected an overconfidence break, got {spec.kind!r}")
    c = spec.intensity_g
    if c <= 0:
        raise ValueError("overconfidence intensity must be strictly positive")
    g = s.g * (1.0 + c) if spec.target in ("trend_only", "both") else s.g
    b = s.b * (1.0 + c) if spec.target in ("bias_only", "both") else s.b
    return replace(s, g=g, b=b)


def apply_sentiment(spec: StrategyGenSpec, brk: BreakSpec) -> StrategyGenSpec:
    """Shift the generation means according to a sentiment break.

    Positive sign adds the shift, negative subtracts. The mixed target pairs
    a positive bias shift with a negative trend shift (and vice versa).
    """
    if brk.kind != "sentiment":
        raise ValueError(f"expected a sentiment break, got {brk.kind!r}")
    sgn = 1.0 if brk.sign == "positive" else -1.0
    g_mean, b_mean = spec.g_mean, spec.b_mean
    if brk.target in ("trend_only", "both", "mixed"):
        lo, hi = SENTIMENT_TREND_RANGE
        if not lo <= abs(brk.intensity_g) <= hi:
            raise ValueError(
                f"trend sentiment intensity {brk.intensity_g} outside [{lo}, {hi}]"
            )
        trend_sgn = -sgn if brk.target == "mixed" else sgn
        g_mean += trend_sgn * abs(brk.intensity_g)
    if brk.target in ("bias_only", "both", "mixed"):
        lo, hi = SENTIMENT_BIAS_RANGE
        if not lo <= abs(brk.intensity_b) <= hi:
            raise ValueError(
                f"bias sentiment intensity {brk.intensity_b} outside [{lo}, {hi}]"
            )
        b_mean += sgn * abs(brk.intensity_b)
    return replace(spec, g_mean=g_mean, b_mean=b_mean)


def apply_herding(
    strategies: Sequence[Strategy],
    fitness_prev: Sequence[float],
    herd_index: int,
) -> list[Strategy]:
    """Let the herder copy the previous day's most profitable strategy.

    The herder never imitates itself; ties break toward the lowest index.
    At most the ``herd_index`` slot differs from the input.
    """
    H = len(strategies)
    if H < 2:
        raise ValueError("herding needs at least two strategies")
    if not 0 <= herd_index < H:
        raise ValueError(f"herd index {herd_index} out of range for H={H}")
    if len(fitness_prev) != H:
        raise ValueError("fitness vector length must equal the number of strategies")
    best = None
    for i, u in enumerate(fitness_prev):
        if i == herd_index:
            continue
        if best is None or u > fitness_prev[best]:
            best = i
    out = list(strategies)
    target = strategies[best]
    herder = strategies[herd_index]
    if (herder.g, herder.b) != (target.g, target.b):
        out[herd_index] = replace(herder, g=target.g, b=target.b)
    return out
