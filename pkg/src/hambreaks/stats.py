"""Descriptive moments, the four hypothesis tests, and result aggregation.

Moment conventions: variance is unbiased (divisor n-1); skewness and
kurtosis are the standardized central-moment estimators m3/m2^1.5 and
m4/m2^2 with biased central moments, kurtosis reported raw (normal = 3).
The two-sample Cramer-von Mises test uses the rank-form statistic with a
seeded-permutation p-value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

__all__ = [
    "MomentSummary",
    "TestResult",
    "StatReport",
    "REPORT_COLUMNS",
    "moments",
    "jarque_bera",
    "cramer_von_mises_2s",
    "mean_difference_test",
    "variance_ratio_test",
    "aggregate",
]


@dataclass(frozen=True)
class MomentSummary:
    n: int
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    min: float
    max: float


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float

    @property
    def rejected_at_5pct(self) -> bool:
        return self.p_value < 0.05


def moments(sample: Sequence[float]) -> MomentSummary:
    """All seven descriptive fields of a sample."""
    x = np.asarray(sample, dtype=float)
    if x.size < 4:
        raise ValueError(f"insufficient sample: need at least 4 points, got {x.size}")
    mean = float(x.mean())
    d = x - mean
    m2 = float((d * d).mean())
    if m2 == 0.0:
        raise ValueError("degenerate sample: zero variance")
    m3 = float((d**3).mean())
    m4 = float((d**4).mean())
    return MomentSummary(
        n=int(x.size),
        mean=mean,
        variance=float(x.var(ddof=1)),
        skewness=m3 / m2**1.5,
        kurtosis=m4 / m2**2,
        min=float(x.min()),
        max=float(x.max()),
    )


def jarque_bera(sample: Sequence[float]) -> TestResult:
    """Normality test from sample skewness and raw kurtosis.

    JB = n/6 * (S^2 + (K - 3)^2 / 4), chi-square with 2 df under the null.
    """
    x = np.asarray(sample, dtype=float)
    if x.size < 8:
        raise ValueError(f"insufficient sample: need at least 8 points, got {x.size}")
    m = moments(x)
    jb = m.n / 6.0 * (m.skewness**2 + (m.kurtosis - 3.0) ** 2 / 4.0)
    return TestResult(statistic=jb, p_value=float(sps.chi2.sf(jb, 2)))


def _cvm_statistic(labels: np.ndarray, n: int, m: int, block_last: np.ndarray) -> np.ndarray:
    """Rank-form two-sample CvM statistic from x-membership labels.

    ``labels`` holds 1 where the pooled-sorted value came from x; the last
    axis is the pooled sample. ``block_last`` maps each pooled position to
    the last index of its tied block, so the empirical CDFs jump by the
    whole block at tied values (midrank convention).
    """
    fx = np.cumsum(labels, axis=-1)
    fy = np.cumsum(1.0 - labels, axis=-1)
    fx = np.take(fx, block_last, axis=-1) / n
    fy = np.take(fy, block_last, axis=-1) / m
    return n * m / (n + m) ** 2 * ((fx - fy) ** 2).sum(axis=-1)


def cramer_von_mises_2s(
    x: Sequence[float],
    y: Sequence[float],
    n_perm: int = 999,
    perm_seed: int | np.random.Generator = 0,
) -> TestResult:
    """Two-sample Cramer-von Mises test with a seeded permutation p-value.

    p = (1 + #{T_perm >= T_obs}) / (n_perm + 1). The statistic is exactly
    symmetric in its arguments and invariant under strictly increasing
    transformations applied to both samples.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or y.size < 2:
        raise ValueError("both samples need at least two observations")
    if n_perm < 99:
        raise ValueError(f"need at least 99 permutations, got {n_perm}")
    n, m = x.size, y.size
    pooled = np.concatenate([x, y])
    order = np.argsort(pooled, kind="stable")
    z = pooled[order]
    labels = (order < n).astype(float)
    block_last = np.searchsorted(z, z, side="right") - 1
    t_obs = float(_cvm_statistic(labels, n, m, block_last))

    rng = (
        perm_seed
        if isinstance(perm_seed, np.random.Generator)
        else np.random.default_rng(perm_seed)
    )
    exceed = 0
    chunk = max(1, int(2_000_000 // (n + m)))
    done = 0
    while done < n_perm:
        k = min(chunk, n_perm - done)
        mat = np.tile(labels, (k, 1))
        rng.permuted(mat, axis=1, out=mat)
        t_perm = _cvm_statistic(mat, n, m, block_last)
        exceed += int((t_perm >= t_obs - 1e-12).sum())
        done += k
    p = (1 + exceed) / (n_perm + 1)
    return TestResult(statistic=t_obs, p_value=p)


def mean_difference_test(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Unequal-variance two-sample t test (Welch-Satterthwaite df), two-sided."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or y.size < 2:
        raise ValueError("both samples need at least two observations")
    vx, vy = x.var(ddof=1), y.var(ddof=1)
    dm = x.mean() - y.mean()
    if vx == 0.0 and vy == 0.0:
        if dm == 0.0:
            return TestResult(statistic=0.0, p_value=1.0)
        return TestResult(statistic=float(np.sign(dm)) * np.inf, p_value=0.0)
    se2 = vx / x.size + vy / y.size
    t = dm / np.sqrt(se2)
    df = se2**2 / (
        (vx / x.size) ** 2 / (x.size - 1) + (vy / y.size) ** 2 / (y.size - 1)
    )
    return TestResult(statistic=float(t), p_value=float(2 * sps.t.sf(abs(t), df)))


def variance_ratio_test(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Two-sided F test of equal variances."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or y.size < 2:
        raise ValueError("both samples need at least two observations")
    vx, vy = x.var(ddof=1), y.var(ddof=1)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("degenerate sample: zero variance")
    f = vx / vy
    dist = sps.f(x.size - 1, y.size - 1)
    p = 2 * min(dist.cdf(f), dist.sf(f))
    return TestResult(statistic=float(f), p_value=float(min(p, 1.0)))


REPORT_COLUMNS = (
    "mean_up",
    "var_up",
    "avg_delta_var_pct",
    "skew_up",
    "kurt_down",
    "avg_delta_kurt_pct",
    "cvm_B_b",
    "cvm_b_a",
    "cvm_a_A",
    "cvm_A_B",
    "jb_B",
    "jb_b",
    "jb_a",
    "jb_A",
)

_PAIRS = (("B", "b"), ("b", "a"), ("a", "A"), ("A", "B"))
_SEGMENTS = ("B", "b", "a", "A")


@dataclass(frozen=True)
class StatReport:
    """One overview row for a batch: moment-shift counts, average percentage
    changes, and per-run test non-rejection counts (all out of n_runs).
    """

    mean_up: int
    var_up: int
    avg_delta_var_pct: float
    skew_up: int
    kurt_down: int
    avg_delta_kurt_pct: float
    cvm_B_b: int
    cvm_b_a: int
    cvm_a_A: int
    cvm_A_B: int
    jb_B: int
    jb_b: int
    jb_a: int
    jb_A: int
    n_runs: int
    kurt_n: int  # runs with well-defined kurtosis on both sides

    def row(self) -> tuple:
        return tuple(getattr(self, c) for c in REPORT_COLUMNS)

    def to_dict(self) -> dict:
        d = {c: getattr(self, c) for c in REPORT_COLUMNS}
        d["n_runs"] = self.n_runs
        d["kurt_n"] = self.kurt_n
        return d


def aggregate(samples, n_perm: int = 999, perm_seed: int = 0, pooled: bool = False) -> StatReport:
    """Build the overview row for one Monte Carlo batch.

    Shift counts compare each run's complete-before moments to its
    complete-after moments; percentage changes use 100*(after-before)/|before|
    averaged over runs. CvM and Jarque-Bera non-rejections at the 5% level
    are counted per run; ``pooled=True`` instead tests the pooled samples
    once (counts become 0 or 1).
    """
    parts_by_run = [
        {k: getattr(samples, f"{k}_runs")[i] for k in _SEGMENTS}
        for i in range(samples.n_runs)
    ]

    mean_up = var_up = skew_up = kurt_down = 0
    var_deltas: list[float] = []
    kurt_deltas: list[float] = []
    kurt_n = 0
    for parts in parts_by_run:
        try:
            before = moments(parts["B"])
            after = moments(parts["A"])
        except ValueError:
            continue
        mean_up += after.mean > before.mean
        var_up += after.variance > before.variance
        skew_up += after.skewness > before.skewness
        var_deltas.append(100.0 * (after.variance - before.variance) / abs(before.variance))
        kurt_n += 1
        kurt_down += after.kurtosis < before.kurtosis
        kurt_deltas.append(100.0 * (after.kurtosis - before.kurtosis) / abs(before.kurtosis))

    cvm_counts = dict.fromkeys(_PAIRS, 0)
    jb_counts = dict.fromkeys(_SEGMENTS, 0)
    if pooled:
        units = [{k: getattr(samples, k) for k in _SEGMENTS}]
    else:
        units = parts_by_run
    for i, parts in enumerate(units):
        for j, (u, v) in enumerate(_PAIRS):
            rng = np.random.default_rng([perm_seed, i, j])
            res = cramer_von_mises_2s(parts[u], parts[v], n_perm=n_perm, perm_seed=rng)
            cvm_counts[(u, v)] += not res.rejected_at_5pct
        for seg in _SEGMENTS:
            try:
                jb_counts[seg] += not jarque_bera(parts[seg]).rejected_at_5pct
            except ValueError:
                pass

    return StatReport(
        mean_up=mean_up,
        var_up=var_up,
        avg_delta_var_pct=float(np.mean(var_deltas)) if var_deltas else float("nan"),
        skew_up=skew_up,
        kurt_down=kurt_down,
        avg_delta_kurt_pct=float(np.mean(kurt_deltas)) if kurt_deltas else float("nan"),
        cvm_B_b=cvm_counts[("B", "b")],
        cvm_b_a=cvm_counts[("b", "a")],
        cvm_a_A=cvm_counts[("a", "A")],
        cvm_A_B=cvm_counts[("A", "B")],
        jb_B=jb_counts["B"],
        jb_b=jb_counts["b"],
        jb_a=jb_counts["a"],
        jb_A=jb_counts["A"],
        n_runs=samples.n_runs,
        kurt_n=kurt_n,
    )
