"""Core market map: beliefs, fitness, discrete-choice fractions, price update.

All functions here are pure and operate on explicit state, so they are safe
to call concurrently. The price-deviation recursion is

    R x_t = sum_h n_{h,t} (g_h x_{t-1} + b_h) + eps_t

with fractions n_{h,t} given by a multinomial logit over one-period-lagged
realized fitness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Strategy",
    "MarketConfig",
    "MarketState",
    "fundamental_price",
    "forecast",
    "fitness_one_lag",
    "fitness_memory",
    "update_fractions",
    "step_deviation",
    "reconstruct_price",
]


@dataclass(frozen=True)
class Strategy:
    """A trader type's linear belief: forecast = g * x_prev + b.

    ``m`` is the memory length used when fitness is averaged over past
    periods; m=1 means plain one-period fitness. A fundamentalist is
    exactly g == 0 and b == 0.
    """

    g: float
    b: float
    m: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.g) and math.isfinite(self.b)):
            raise ValueError("strategy parameters must be finite")
        if self.m < 1:
            raise ValueError(f"memory length must be >= 1, got {self.m}")

    @property
    def is_fundamentalist(self) -> bool:
        return self.g == 0.0 and self.b == 0.0


@dataclass(frozen=True)
class MarketConfig:
    """Global market constants.

    ``risk_term`` is the product a*sigma^2 entering the fitness as a divisor;
    only the product matters, so a and sigma are not stored separately.
    """

    R: float = 1.1
    beta: float = 300.0
    risk_term: float = 1.0
    H: int = 5
    noise_halfwidth: float = 0.05
    ybar: float = 1.0

    def __post_init__(self):
        if not self.R > 1.0:
            raise ValueError(f"gross rate R must exceed 1, got {self.R}")
        if self.beta < 0:
            raise ValueError(f"intensity of choice must be >= 0, got {self.beta}")
        if not self.risk_term > 0:
            raise ValueError(f"risk term must be positive, got {self.risk_term}")
        if self.H < 1:
            raise ValueError(f"need at least one strategy, got H={self.H}")
        if self.noise_halfwidth < 0:
            raise ValueError("noise halfwidth must be >= 0")
        if not self.ybar > 0:
            raise ValueError("expected dividend must be positive")

    @property
    def r(self) -> float:
        return self.R - 1.0


@dataclass
class MarketState:
    """Plain-data snapshot of the market between steps.

    ``x_history`` keeps price deviations, most recent last. ``fitness`` and
    ``fractions`` are per-strategy vectors of length H.
    """

    x_history: list[float]
    fitness: np.ndarray
    fractions: np.ndarray


def fundamental_price(ybar: float, r: float) -> float:
    """Benchmark price of the constant-dividend asset, ybar / r."""
    if r <= 0:
        raise ValueError("undiscounted dividend stream: interest rate must be positive")
    return ybar / r


def forecast(s: Strategy, x_prev: float) -> float:
    """Linear belief about the next deviation: g * x_prev + b."""
    return s.g * x_prev + s.b


def fitness_one_lag(x1: float, x2: float, x3: float, s: Strategy, cfg: MarketConfig) -> float:
    """Realized one-period profitability of strategy ``s``.

    Arguments are the three most recent deviations, x1 = x_{t-1},
    x2 = x_{t-2}, x3 = x_{t-3}.
    """
    return (x1 - cfg.R * x2) * (s.g * x3 + s.b - cfg.R * x2) / cfg.risk_term


def fitness_memory(x_window: Sequence[float], s: Strategy, cfg: MarketConfig) -> float:
    """Fitness averaged over the strategy's memory length.

    ``x_window`` must supply the lags x_{t-1-l}, x_{t-2-l}, x_{t-3-l} for
    l = 0 .. m-1, most recent last, i.e. at least m+2 entries.
    """
    m = s.m
    if len(x_window) < m + 2:
        raise ValueError(
            f"insufficient history: memory {m} needs {m + 2} deviations, got {len(x_window)}"
        )
    w = np.asarray(x_window, dtype=float)
    x1 = w[-1 : -1 - m : -1]  # x_{t-1-l}
    x2 = w[-2 : -2 - m : -1]  # x_{t-2-l}
    x3 = w[-3 : -3 - m : -1]  # x_{t-3-l}
    terms = (x1 - cfg.R * x2) * (s.g * x3 + s.b - cfg.R * x2) / cfg.risk_term
    return float(terms.mean())


def update_fractions(fitness: Sequence[float], beta: float) -> np.ndarray:
    """Discrete-choice (multinomial logit) market fractions.

    Uses max-subtraction before exponentiation; mathematically identical to
    the raw softmax but safe for large beta * |U|.
    """
    u = np.asarray(fitness, dtype=float)
    if u.size == 0:
        raise ValueError("empty fitness vector")
    z = beta * u
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()


def step_deviation(
    fractions: Sequence[float],
    strategies: Sequence[Strategy],
    x_prev: float,
    eps: float,
    cfg: MarketConfig,
) -> float:
    """One update of the price deviation given current fractions and noise."""
    n = np.asarray(fractions, dtype=float)
    if n.size != len(strategies):
        raise ValueError(
            f"length mismatch: {n.size} fractions vs {len(strategies)} strategies"
        )
    total = sum(w * forecast(s, x_prev) for w, s in zip(n, strategies))
    return (total + eps) / cfg.R


def reconstruct_price(x: float, cfg: MarketConfig) -> float:
    """Market clearing price: deviation plus the fundamental price."""
    return x + fundamental_price(cfg.ybar, cfg.r)
