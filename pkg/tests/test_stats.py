"""Tests for the rank-test / effect-size / power module.

Exact distributions are cross-checked against brute-force enumeration over
all rank arrangements, and the normal path against scipy, which plays no
part in the implementation itself.
"""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from presstrain import stats
from presstrain.stats import (
    DegenerateVarianceError,
    InvalidInputError,
    Method,
    TiesRequireApproximationError,
    UseApproximationError,
    cohens_d,
    exact_mw_p,
    mann_whitney,
    median,
    midranks,
    mw_exact_counts,
    power_two_sample,
)


def brute_force_u_distribution(n1, n2):
    """Enumerate all C(n1+n2, n1) placements of sample-a ranks; count U values."""
    n = n1 + n2
    counts = {}
    for combo in itertools.combinations(range(1, n + 1), n1):
        u = sum(combo) - n1 * (n1 + 1) // 2
        counts[u] = counts.get(u, 0) + 1
    return counts


def brute_force_u_statistic(a, b):
    """U for sample a by direct pair counting (ties count one half)."""
    u = 0.0
    for x in a:
        for y in b:
            if x > y:
                u += 1.0
            elif x == y:
                u += 0.5
    return u


class TestExactDistribution:
    def test_counts_sum_to_binomial(self):
        for n1, n2 in [(1, 1), (3, 3), (5, 7), (12, 12)]:
            counts = mw_exact_counts(n1, n2)
            assert sum(counts) == math.comb(n1 + n2, n1)
            assert len(counts) == n1 * n2 + 1
            assert all(c >= 0 for c in counts)

    def test_recurrence_matches_enumeration_up_to_6x6(self):
        for n1 in range(1, 7):
            for n2 in range(1, 7):
                table = mw_exact_counts(n1, n2)
                brute = brute_force_u_distribution(n1, n2)
                for u in range(n1 * n2 + 1):
                    assert table[u] == brute.get(u, 0), (n1, n2, u)

    def test_u0_smallest_samples(self):
        assert exact_mw_p(0, 3, 3) == pytest.approx(1 / 20)

    def test_center_p_at_least_half(self):
        for n1, n2 in [(3, 3), (4, 6), (5, 5)]:
            assert exact_mw_p(n1 * n2 / 2, n1, n2) >= 0.5

    def test_distribution_symmetric(self):
        counts = mw_exact_counts(6, 5)
        assert counts == counts[::-1]

    def test_size_bound_enforced(self):
        with pytest.raises(UseApproximationError):
            exact_mw_p(10, 13, 13)
        # force flag bypasses the bound
        assert 0.0 < exact_mw_p(84, 13, 13, force=True) < 1.0

    def test_skewed_sizes_no_recursion_limit(self):
        # min(n) small but max(n) large: the iterative build must cope
        p = exact_mw_p(1000, 1, 2000)
        assert p == pytest.approx((1000 + 1) / (2000 + 1))

    def test_auto_avoids_exact_for_huge_counterpart(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=5).tolist()
        b = rng.normal(size=400).tolist()
        r = mann_whitney(a, b)  # auto: must fall back to the normal path
        assert r.method is Method.NORMAL_APPROX


class TestMannWhitney:
    def test_disjoint_samples_exact(self):
        r = mann_whitney([1, 2, 3], [4, 5, 6])
        assert r.U == 0.0
        assert r.method is Method.EXACT
        assert r.p_two_tailed == pytest.approx(2 / 20)
        assert r.p_one_tailed == pytest.approx(1 / 20)

    def test_identical_samples_centered(self):
        a = [1.0, 2.0, 3.0, 4.0]
        b = [1.5, 2.5, 3.5, 4.5]
        # interleaved: U near center; equality case: use a == b shifted so no ties
        r = mann_whitney(a, b)
        r_swap = mann_whitney(b, a)
        assert r.U + r_swap.U == pytest.approx(len(a) * len(b))

    def test_a_equals_b_distribution(self):
        a = [1, 2, 3, 4, 5]
        b = [1, 2, 3, 4, 5]
        r = mann_whitney(a, b, method="normal")
        assert r.U == pytest.approx(len(a) * len(b) / 2)
        assert r.z == pytest.approx(0.0)
        assert r.p_two_tailed == pytest.approx(1.0)

    def test_u_statistic_matches_pair_counting(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n1 = int(rng.integers(1, 12))
            n2 = int(rng.integers(1, 12))
            a = rng.normal(size=n1).round(1).tolist()  # rounding induces ties
            b = rng.normal(size=n2).round(1).tolist()
            r = mann_whitney(a, b, method="normal")
            assert r.U == pytest.approx(brute_force_u_statistic(a, b))

    def test_paper_scale_z_and_p(self):
        # construct untied samples of 15 vs 15 with U exactly 61
        a, b = make_samples_with_u(61, 15, 15)
        assert brute_force_u_statistic(a, b) == 61.0
        r = mann_whitney(a, b, method="normal")
        assert r.U == 61.0
        assert r.z == pytest.approx(-2.136, abs=0.005)
        assert r.p_two_tailed == pytest.approx(0.0327, abs=0.0005)
        assert r.p_two_tailed < 0.05
        assert r.r_effect == pytest.approx(r.z / math.sqrt(30))
        assert not r.tie_correction_applied

    def test_continuity_correction_value(self):
        a, b = make_samples_with_u(61, 15, 15)
        r = mann_whitney(a, b, method="normal", continuity=True)
        assert r.z == pytest.approx(-2.116, abs=0.005)

    def test_matches_scipy_normal_path(self):
        from scipy.stats import mannwhitneyu

        rng = np.random.default_rng(11)
        for _ in range(25):
            a = rng.normal(size=20).tolist()
            b = rng.normal(0.5, 1.2, size=18).tolist()
            ours = mann_whitney(a, b, method="normal")
            ref = mannwhitneyu(a, b, alternative="two-sided", method="asymptotic",
                               use_continuity=False)
            assert ours.p_two_tailed == pytest.approx(ref.pvalue, rel=1e-9)
            ref_less = mannwhitneyu(a, b, alternative="less", method="asymptotic",
                                    use_continuity=False)
            assert ours.p_one_tailed == pytest.approx(ref_less.pvalue, rel=1e-9)

    def test_matches_scipy_exact_path(self):
        from scipy.stats import mannwhitneyu

        rng = np.random.default_rng(13)
        for _ in range(10):
            a = rng.normal(size=8).tolist()
            b = rng.normal(0.8, size=9).tolist()
            ours = mann_whitney(a, b, method="exact")
            ref = mannwhitneyu(a, b, alternative="two-sided", method="exact")
            assert ours.p_two_tailed == pytest.approx(ref.pvalue, rel=1e-9)

    def test_tie_exact_matches_permutation_oracle(self):
        # small tied data: enumerate all subsets directly
        a = [1.0, 2.0, 2.0, 4.0]
        b = [2.0, 3.0, 5.0, 5.0]
        r = mann_whitney(a, b, method="exact", tie_exact=True)
        pooled = a + b
        n1 = len(a)
        ranks = midranks(pooled)
        u_obs = brute_force_u_statistic(a, b)
        lower = upper = total = 0
        for idx in itertools.combinations(range(len(pooled)), n1):
            r1 = sum(ranks[i] for i in idx)
            u = r1 - n1 * (n1 + 1) / 2.0
            total += 1
            if u <= u_obs:
                lower += 1
            if u >= u_obs:
                upper += 1
        assert r.p_one_tailed == pytest.approx(lower / total)
        assert r.p_two_tailed == pytest.approx(min(1.0, 2 * min(lower, upper) / total))

    def test_exact_refuses_ties_without_flag(self):
        with pytest.raises(TiesRequireApproximationError):
            mann_whitney([1, 2, 2], [2, 3, 4], method="exact")

    def test_degenerate_flagged(self):
        r = mann_whitney([2.0, 2.0, 2.0], [2.0, 2.0], method="normal")
        assert r.degenerate_variance
        assert math.isnan(r.z)

    def test_empty_sample_rejected(self):
        with pytest.raises(InvalidInputError):
            mann_whitney([], [1.0])

    def test_normal_approx_converges_to_exact_at_n12(self):
        # CDF comparison with the half-integer correction; central +-1 sigma band
        n1 = n2 = 12
        counts = mw_exact_counts(n1, n2)
        total = sum(counts)
        mu = n1 * n2 / 2.0
        sigma = math.sqrt(n1 * n2 * (n1 + n2 + 1) / 12.0)
        worst = 0.0
        for u in range(int(mu - sigma), int(mu + sigma) + 1):
            p_exact = sum(counts[: u + 1]) / total
            p_norm = stats._norm_cdf((u + 0.5 - mu) / sigma)
            worst = max(worst, abs(p_exact - p_norm))
        assert worst < 0.01

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=15),
        b=st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=15),
        scale=st.floats(0.1, 5.0),
        shift=st.floats(-10, 10),
    )
    def test_monotone_transform_invariance(self, a, b, scale, shift):
        from hypothesis import assume

        ta = [scale * x + shift for x in a]
        tb = [scale * x + shift for x in b]
        # the transform must stay strictly monotone in float arithmetic:
        # rounding may merge close values into new ties, which is out of scope
        assume(midranks(a + b) == midranks(ta + tb))
        r1 = mann_whitney(a, b, method="normal")
        r2 = mann_whitney(ta, tb, method="normal")
        assert r1.U == pytest.approx(r2.U)
        if not (r1.degenerate_variance or r2.degenerate_variance):
            assert r1.z == pytest.approx(r2.z, abs=1e-9)
            assert r1.p_two_tailed == pytest.approx(r2.p_two_tailed, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=12),
        b=st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=12),
    )
    def test_u_sum_identity(self, a, b):
        r_ab = mann_whitney(a, b, method="normal")
        r_ba = mann_whitney(b, a, method="normal")
        assert r_ab.U + r_ba.U == pytest.approx(len(a) * len(b))


class TestCohensD:
    def test_unit_effect(self):
        # means 0 and 1, both sds 1 -> d = -1
        a = [-1.0, 0.0, 1.0]
        b = [0.0, 1.0, 2.0]
        assert cohens_d(a, b) == pytest.approx(-1.0)

    def test_equal_samples_zero(self):
        assert cohens_d([1, 2, 3], [1, 2, 3]) == pytest.approx(0.0)

    def test_hand_computed_example(self):
        assert cohens_d([1, 2, 3, 4], [3, 4, 5, 6]) == pytest.approx(-1.549, abs=5e-4)

    def test_degenerate(self):
        with pytest.raises(DegenerateVarianceError):
            cohens_d([1.0, 1.0], [1.0, 1.0])


class TestPower:
    def test_null_effect_gives_alpha(self):
        assert power_two_sample(0.0, 15, alpha=0.05, tails=1) == pytest.approx(0.05, abs=1e-9)
        assert power_two_sample(0.0, 15, alpha=0.05, tails=2) == pytest.approx(0.05, abs=1e-9)

    def test_reference_point_n15(self):
        p = power_two_sample(0.85, 15, alpha=0.05, tails=1, are_correction=True)
        assert p == pytest.approx(0.74, abs=0.03)

    def test_reference_point_n18(self):
        p = power_two_sample(0.85, 18, alpha=0.05, tails=1, are_correction=True)
        assert p >= 0.80

    def test_monotone_in_d_n_alpha(self):
        base = power_two_sample(0.5, 12, alpha=0.05)
        assert power_two_sample(0.8, 12, alpha=0.05) > base
        assert power_two_sample(0.5, 24, alpha=0.05) > base
        assert power_two_sample(0.5, 12, alpha=0.10) > base

    def test_nct_variant_close_to_normal(self):
        pn = power_two_sample(0.85, 15, method="normal")
        pt = power_two_sample(0.85, 15, method="nct")
        assert pt == pytest.approx(pn, abs=0.03)

    def test_are_correction_reduces_power(self):
        with_are = power_two_sample(0.85, 15, are_correction=True)
        without = power_two_sample(0.85, 15, are_correction=False)
        assert with_are < without


class TestMedian:
    def test_odd(self):
        assert median([5, 1, 3]) == 3

    def test_even(self):
        assert median([4, 1, 3, 2]) == pytest.approx(2.5)

    def test_matches_sort_oracle_bulk(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            n = int(rng.integers(1, 60))
            xs = rng.normal(size=n).tolist()
            s = sorted(xs)
            expected = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
            assert median(xs) == pytest.approx(expected)


def make_samples_with_u(target_u, n1, n2):
    """Untied float samples (a, b) whose pair-count statistic is target_u.

    Start with every a below every b (U = 0) and raise a-values one at a
    time, each lift adding its count of exceeded b-values.
    """
    assert 0 <= target_u <= n1 * n2
    b = [float(10 + 2 * j) for j in range(n2)]  # 10, 12, ..., strictly increasing
    a = []
    remaining = target_u
    for i in range(n1):
        k = min(remaining, n2)  # this a exceeds the k smallest b values
        remaining -= k
        if k == 0:
            a.append(1.0 + 0.1 * i)  # below all b
        else:
            a.append(b[k - 1] + 0.5 + 0.001 * i)  # just above b[k-1]
    assert remaining == 0, "target_u not reachable"
    return a, b
