"""Heterogeneous agent market simulation with behavioral break injection."""

__version__ = "0.1.0"

from .behavior import (
    BreakSpec,
    StrategyGenSpec,
    apply_herding,
    apply_overconfidence,
    apply_sentiment,
    generate_strategies,
)
from .core import (
    MarketConfig,
    MarketState,
    Strategy,
    fitness_memory,
    fitness_one_lag,
    forecast,
    fundamental_price,
    reconstruct_price,
    step_deviation,
    update_fractions,
)
from .montecarlo import (
    PAPER13_SETUPS,
    RunConfig,
    RunSamples,
    derive_run_seed,
    memory_lengths,
    run_batch,
    setup_breaks,
    simulate_run,
    split_samples,
    sweep_grid,
)
from .stats import (
    MomentSummary,
    StatReport,
    TestResult,
    aggregate,
    cramer_von_mises_2s,
    jarque_bera,
    mean_difference_test,
    moments,
    variance_ratio_test,
)

__all__ = [name for name in dir() if not name.startswith("_")]
