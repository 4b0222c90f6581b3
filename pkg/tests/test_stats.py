"""Unit tests for moments, the four hypothesis tests, and aggregation.

Reference values come from scipy (which implements all four classical
statistics independently), from hand computation on tiny samples, and from
exhaustive enumeration of the permutation distribution for small inputs.
"""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from hambreaks import (
    RunSamples,
    aggregate,
    cramer_von_mises_2s,
    jarque_bera,
    mean_difference_test,
    moments,
    variance_ratio_test,
)

samples_st = st.lists(
    st.floats(-100, 100, allow_nan=False, allow_infinity=False), min_size=8, max_size=40
).filter(lambda v: max(v) - min(v) > 1e-3)


def cvm_statistic_reference(x, y):
    """Independent O((n+m)^2) evaluation of the rank-form CvM statistic.

    Empirical CDFs are evaluated directly at every pooled point with the
    weak inequality, which matches the tied-block convention.
    """
    x, y = np.asarray(x, float), np.asarray(y, float)
    n, m = len(x), len(y)
    total = 0.0
    for z in np.concatenate([x, y]):
        fx = (x <= z).mean()
        fy = (y <= z).mean()
        total += (fx - fy) ** 2
    return n * m / (n + m) ** 2 * total


def cvm_exact_p(x, y):
    """Exact permutation p-value by enumerating all pooled reassignments."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    n = len(x)
    pooled = np.concatenate([x, y])
    t_obs = cvm_statistic_reference(x, y)
    count = total = 0
    for idx in itertools.combinations(range(len(pooled)), n):
        mask = np.zeros(len(pooled), dtype=bool)
        mask[list(idx)] = True
        t = cvm_statistic_reference(pooled[mask], pooled[~mask])
        count += t >= t_obs - 1e-12
        total += 1
    return count / total


class TestMoments:
    def test_hand_values(self):
        m = moments([1.0, 2.0, 3.0, 4.0])
        assert m.n == 4
        assert m.mean == pytest.approx(2.5)
        assert m.variance == pytest.approx(5.0 / 3.0)  # unbiased
        assert m.skewness == pytest.approx(0.0)
        # m4/m2^2 with biased central moments: 2.5625 / 1.5625
        assert m.kurtosis == pytest.approx(1.64)
        assert (m.min, m.max) == (1.0, 4.0)

    def test_normal_kurtosis_is_three(self):
        x = np.random.default_rng(0).normal(size=200_000)
        m = moments(x)
        assert m.kurtosis == pytest.approx(3.0, abs=0.05)
        assert m.skewness == pytest.approx(0.0, abs=0.02)

    @settings(max_examples=60)
    @given(v=samples_st)
    def test_matches_scipy_conventions(self, v):
        x = np.asarray(v)
        m = moments(x)
        assert m.variance == pytest.approx(np.var(x, ddof=1))
        assert m.skewness == pytest.approx(sps.skew(x, bias=True), abs=1e-9)
        assert m.kurtosis == pytest.approx(sps.kurtosis(x, fisher=False, bias=True), abs=1e-9)

    @given(v=samples_st)
    def test_negation_flips_odd_moments_only(self, v):
        m = moments(v)
        neg = moments([-t for t in v])
        assert neg.mean == pytest.approx(-m.mean)
        assert neg.skewness == pytest.approx(-m.skewness, abs=1e-9)
        assert neg.variance == pytest.approx(m.variance)
        assert neg.kurtosis == pytest.approx(m.kurtosis)
        assert (neg.min, neg.max) == (-m.max, -m.min)

    def test_insufficient_sample(self):
        with pytest.raises(ValueError, match="insufficient sample"):
            moments([1.0, 2.0, 3.0])

    def test_degenerate_sample(self):
        with pytest.raises(ValueError, match="degenerate sample"):
            moments([1.0, 1.0, 1.0, 1.0])


class TestJarqueBera:
    @settings(max_examples=60)
    @given(v=samples_st)
    def test_matches_scipy(self, v):
        got = jarque_bera(v)
        want = sps.jarque_bera(np.asarray(v))
        assert got.statistic == pytest.approx(want.statistic, rel=1e-9)
        assert got.p_value == pytest.approx(want.pvalue, rel=1e-9, abs=1e-12)

    def test_rejects_heavy_tailed(self):
        x = np.random.default_rng(1).standard_t(df=2, size=500)
        assert jarque_bera(x).rejected_at_5pct

    def test_minimum_size(self):
        with pytest.raises(ValueError, match="insufficient sample"):
            jarque_bera([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0])


class TestCramerVonMises:
    def test_statistic_matches_reference(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = rng.normal(size=rng.integers(2, 40))
            y = rng.normal(size=rng.integers(2, 40))
            got = cramer_von_mises_2s(x, y, n_perm=99).statistic
            assert got == pytest.approx(cvm_statistic_reference(x, y), rel=1e-12)

    def test_statistic_with_ties_matches_reference(self):
        x = np.array([1.0, 2.0, 2.0, 3.0])
        y = np.array([2.0, 2.0, 4.0, 4.0, 1.0])
        got = cramer_von_mises_2s(x, y, n_perm=99).statistic
        assert got == pytest.approx(cvm_statistic_reference(x, y), rel=1e-12)

    def test_statistic_symmetric(self):
        rng = np.random.default_rng(4)
        x, y = rng.normal(size=15), rng.normal(1.0, 2.0, size=9)
        a = cramer_von_mises_2s(x, y, n_perm=99).statistic
        b = cramer_von_mises_2s(y, x, n_perm=99).statistic
        assert a == pytest.approx(b, rel=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_invariant_under_increasing_transforms(self, seed):
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=12), rng.normal(0.5, 1.5, size=10)
        base = cramer_von_mises_2s(x, y, n_perm=99).statistic
        for f in (lambda v: 3 * v + 7, np.exp, np.arctan):
            assert cramer_von_mises_2s(f(x), f(y), n_perm=99).statistic == pytest.approx(
                base, rel=1e-12
            )

    def test_p_value_reproducible_and_in_range(self):
        rng = np.random.default_rng(5)
        x, y = rng.normal(size=30), rng.normal(size=30)
        a = cramer_von_mises_2s(x, y, n_perm=199, perm_seed=11)
        b = cramer_von_mises_2s(x, y, n_perm=199, perm_seed=11)
        assert a.p_value == b.p_value
        assert 0 < a.p_value <= 1

    def test_detects_location_shift(self):
        rng = np.random.default_rng(6)
        x, y = rng.normal(size=80), rng.normal(2.0, 1.0, size=80)
        assert cramer_von_mises_2s(x, y, n_perm=199).p_value == pytest.approx(1 / 200)

    def test_permutation_p_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=6)
        y = rng.normal(0.8, 1.0, size=5)
        p_exact = cvm_exact_p(x, y)
        p_perm = cramer_von_mises_2s(x, y, n_perm=1999, perm_seed=1).p_value
        assert abs(p_perm - p_exact) < 0.02

    def test_validation(self):
        with pytest.raises(ValueError, match="at least two"):
            cramer_von_mises_2s([1.0], [1.0, 2.0])
        with pytest.raises(ValueError, match="at least 99"):
            cramer_von_mises_2s([1.0, 2.0], [1.0, 2.0], n_perm=10)


class TestMeanDifference:
    @settings(max_examples=60)
    @given(v=samples_st, w=samples_st)
    def test_matches_scipy_welch(self, v, w):
        got = mean_difference_test(v, w)
        want = sps.ttest_ind(np.asarray(v), np.asarray(w), equal_var=False)
        assert got.statistic == pytest.approx(want.statistic, rel=1e-9)
        assert got.p_value == pytest.approx(want.pvalue, rel=1e-9, abs=1e-12)

    def test_degenerate_conventions(self):
        same = mean_difference_test([2.0, 2.0], [2.0, 2.0])
        assert same.p_value == 1.0
        apart = mean_difference_test([2.0, 2.0], [3.0, 3.0])
        assert apart.p_value == 0.0


class TestVarianceRatio:
    def test_two_sided_f(self):
        rng = np.random.default_rng(8)
        x, y = rng.normal(size=25), rng.normal(0, 1, size=30)
        got = variance_ratio_test(x, y)
        f = np.var(x, ddof=1) / np.var(y, ddof=1)
        dist = sps.f(24, 29)
        assert got.statistic == pytest.approx(f)
        assert got.p_value == pytest.approx(2 * min(dist.cdf(f), dist.sf(f)))

    def test_symmetric_p_under_swap(self):
        rng = np.random.default_rng(9)
        x, y = rng.normal(size=20), rng.normal(0, 3, size=20)
        a, b = variance_ratio_test(x, y), variance_ratio_test(y, x)
        assert a.p_value == pytest.approx(b.p_value, rel=1e-9)
        assert a.statistic == pytest.approx(1 / b.statistic, rel=1e-9)

    def test_detects_scale_shift(self):
        rng = np.random.default_rng(10)
        assert variance_ratio_test(
            rng.normal(size=100), rng.normal(0, 2, size=100)
        ).rejected_at_5pct

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            variance_ratio_test([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def _toy_samples(B_runs, A_runs, window=4):
    B_runs, A_runs = np.asarray(B_runs, float), np.asarray(A_runs, float)
    return RunSamples(
        B_runs=B_runs,
        b_runs=B_runs[:, -window:],
        a_runs=A_runs[:, :window],
        A_runs=A_runs,
        B_periods=np.arange(1, B_runs.shape[1] + 1),
        A_periods=np.arange(B_runs.shape[1] + 1, B_runs.shape[1] + A_runs.shape[1] + 1),
        run_seeds=list(range(B_runs.shape[0])),
        run_meta=[{} for _ in range(B_runs.shape[0])],
    )


class TestAggregate:
    def test_shift_counts_and_deltas(self):
        rng = np.random.default_rng(20)
        # Run 0: variance quadrupled after; run 1: unchanged distribution.
        B = np.stack([rng.normal(0, 1, 60), rng.normal(0, 1, 60)])
        A = np.stack([rng.normal(1, 2, 60), rng.normal(0, 1, 60)])
        rep = aggregate(_toy_samples(B, A), n_perm=199, perm_seed=0)
        assert rep.n_runs == 2
        assert rep.mean_up >= 1
        assert rep.var_up >= 1
        assert rep.kurt_n == 2
        # Per-run averaged percentage change dominated by run 0's jump.
        assert rep.avg_delta_var_pct > 50
        assert rep.row() == tuple(rep.to_dict()[k] for k in rep.to_dict() if k not in ("n_runs", "kurt_n"))

    def test_identical_segments_never_reject(self):
        rng = np.random.default_rng(21)
        runs = np.stack([rng.normal(0, 1, 40) for _ in range(3)])
        rep = aggregate(_toy_samples(runs, runs), n_perm=199, perm_seed=0)
        assert rep.cvm_A_B == 3  # identical samples: statistic at its minimum
        assert rep.mean_up == 0 and rep.var_up == 0 and rep.kurt_down == 0

    def test_pooled_mode_counts_once(self):
        rng = np.random.default_rng(22)
        B = np.stack([rng.normal(0, 1, 40) for _ in range(3)])
        A = np.stack([rng.normal(5, 1, 40) for _ in range(3)])
        rep = aggregate(_toy_samples(B, A), n_perm=199, perm_seed=0, pooled=True)
        assert rep.cvm_A_B in (0, 1)
        assert rep.cvm_A_B == 0  # pooled samples five sigmas apart
        # Shift counting still happens per run.
        assert rep.mean_up == 3

    def test_perm_seed_changes_nothing_material(self):
        rng = np.random.default_rng(23)
        B = np.stack([rng.normal(0, 1, 50) for _ in range(2)])
        A = np.stack([rng.normal(0, 1, 50) for _ in range(2)])
        samples = _toy_samples(B, A)
        a = aggregate(samples, n_perm=199, perm_seed=1)
        b = aggregate(samples, n_perm=199, perm_seed=1)
        assert a == b
