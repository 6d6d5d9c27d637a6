"""Closed-form staleness math, checked against brute-force enumeration."""

import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quorumstale.quorum import (
    ConfigurationError,
    PropagationProfile,
    QuorumSpec,
    epsilon_for_tolerance,
    k_staleness_load_bound,
    k_staleness_miss,
    kt_staleness_miss,
    load_lower_bound,
    monotonic_reads_miss,
    quorum_miss_probability,
    t_visibility_miss,
)


def enumerate_miss(n: int, r: int, w: int) -> Fraction:
    """Independent oracle: count disjoint (read, write) quorum pairs exactly."""
    replicas = range(n)
    misses = 0
    total = 0
    for read in combinations(replicas, r):
        for write in combinations(replicas, w):
            total += 1
            if not set(read) & set(write):
                misses += 1
    return Fraction(misses, total)


class TestQuorumMissProbability:
    def test_large_partial_quorum(self):
        # 1.88e-6 to 3 significant figures
        p = quorum_miss_probability(QuorumSpec(100, 30, 30))
        assert p == pytest.approx(1.88e-6, rel=5e-3)

    def test_strict_quorum_is_zero(self):
        assert quorum_miss_probability(QuorumSpec(3, 3, 1)) == 0.0

    def test_small_cases_exact(self):
        # Enumerated: 2/3 and 1/3. (A commonly quoted rounded figure of 0.6
        # for the first case is a loose bound; enumeration is ground truth.)
        assert quorum_miss_probability(QuorumSpec(3, 1, 1)) == pytest.approx(2 / 3)
        assert quorum_miss_probability(QuorumSpec(3, 1, 2)) == pytest.approx(1 / 3)

    def test_matches_enumeration_for_all_small_configs(self):
        for n in range(1, 7):
            for r in range(1, n + 1):
                for w in range(1, n + 1):
                    exact = enumerate_miss(n, r, w)
                    assert quorum_miss_probability(QuorumSpec(n, r, w)) == float(exact)

    def test_zero_iff_strict(self):
        for n in range(1, 7):
            for r in range(1, n + 1):
                for w in range(1, n + 1):
                    spec = QuorumSpec(n, r, w)
                    p = quorum_miss_probability(spec)
                    assert (p == 0.0) == spec.strict
                    assert (p > 0.0) == (r + w <= n)

    @given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 30))
    def test_monotone_in_quorum_sizes(self, n, r, w):
        if r > n or w > n:
            return
        p = quorum_miss_probability(QuorumSpec(n, r, w))
        if r + 1 <= n:
            assert quorum_miss_probability(QuorumSpec(n, r + 1, w)) <= p
        if w + 1 <= n:
            assert quorum_miss_probability(QuorumSpec(n, r, w + 1)) <= p
        assert quorum_miss_probability(QuorumSpec(n + 1, r, w)) >= p

    def test_invalid_specs_rejected(self):
        with pytest.raises(ConfigurationError):
            QuorumSpec(3, 0, 1)
        with pytest.raises(ConfigurationError):
            QuorumSpec(3, 1, 4)
        with pytest.raises(ConfigurationError):
            QuorumSpec(0, 1, 1)


class TestKStaleness:
    def test_three_versions(self):
        miss = k_staleness_miss(QuorumSpec(3, 1, 1), 3)
        assert 1 - miss == pytest.approx(0.7037, abs=5e-4)

    def test_k_one_is_single_quorum_miss(self):
        for n, r, w in [(3, 1, 1), (5, 2, 2), (4, 1, 3)]:
            spec = QuorumSpec(n, r, w)
            assert k_staleness_miss(spec, 1) == quorum_miss_probability(spec)

    def test_ten_versions(self):
        assert k_staleness_miss(QuorumSpec(3, 1, 1), 10) < 0.02

    @given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(1, 20))
    def test_non_increasing_in_k(self, n, r, w, k):
        if r > n or w > n:
            return
        spec = QuorumSpec(n, r, w)
        assert k_staleness_miss(spec, k + 1) <= k_staleness_miss(spec, k)

    def test_rejects_k_below_one(self):
        with pytest.raises(ValueError):
            k_staleness_miss(QuorumSpec(3, 1, 1), 0)


class TestMonotonicReads:
    def test_zero_ratio_equals_single_miss(self):
        spec = QuorumSpec(3, 1, 1)
        assert monotonic_reads_miss(spec, 0.0) == quorum_miss_probability(spec)

    def test_ratio_two_non_strict(self):
        assert monotonic_reads_miss(QuorumSpec(3, 1, 1), 2.0) == pytest.approx((2 / 3) ** 3)

    def test_ratio_one_strict(self):
        assert monotonic_reads_miss(QuorumSpec(3, 1, 1), 1.0, strict=True) == pytest.approx(2 / 3)

    def test_strict_needs_ratio_at_least_one(self):
        with pytest.raises(ValueError):
            monotonic_reads_miss(QuorumSpec(3, 1, 1), 0.5, strict=True)

    def test_real_valued_exponent(self):
        got = monotonic_reads_miss(QuorumSpec(3, 1, 1), 0.5)
        assert got == pytest.approx((2 / 3) ** 1.5)


class TestLoadBounds:
    def test_epsilon_identity(self):
        assert epsilon_for_tolerance(0.01, 1) == pytest.approx(0.01)
        assert epsilon_for_tolerance(0.01, 2) == pytest.approx(0.1)
        assert epsilon_for_tolerance(1.0, 7) == 1.0

    def test_perfect_intersection(self):
        assert load_lower_bound(0.0, 4) == pytest.approx(0.5)
        assert load_lower_bound(1.0, 9) == 0.0

    def test_composed_bound(self):
        assert k_staleness_load_bound(0.04, 2, 4) == pytest.approx(0.4)

    @given(st.integers(1, 100))
    def test_zero_epsilon_times_sqrt_n(self, n):
        assert load_lower_bound(0.0, n) * math.sqrt(n) == pytest.approx(1.0)


def profile_from_at_least(w_base, rows, t_grid=None):
    rows = np.asarray(rows, dtype=float)
    if t_grid is None:
        t_grid = np.arange(rows.shape[0], dtype=float)
    return PropagationProfile(w_base=w_base, t_grid=np.asarray(t_grid, float), table=rows)


def enumerate_t_visibility(n, r, at_least):
    """Oracle for the expanding-quorum sum: enumerate fresh subsets directly."""
    total = Fraction(0)
    for c in range(n + 1):
        upper = at_least[c + 1] if c < n else 0.0
        mass = Fraction(at_least[c] - upper).limit_denominator(10**9)
        if mass == 0:
            continue
        # Fresh set uniform among c-subsets; read quorum uniform among r-subsets.
        misses = 0
        pairs = 0
        for fresh in combinations(range(n), c):
            for read in combinations(range(n), r):
                pairs += 1
                if not set(read) & set(fresh):
                    misses += 1
        total += mass * Fraction(misses, pairs)
    return float(total)


class TestTVisibility:
    def test_fully_propagated_profile(self):
        profile = profile_from_at_least(1, [[1, 1, 1, 1], [1, 1, 1, 1]])
        for r in (1, 2, 3):
            assert t_visibility_miss(QuorumSpec(3, r, 1), profile, 1.0) == 0.0

    def test_frozen_at_w_reduces_to_fixed_quorum(self):
        # P(at least c) = 1 for c <= w, 0 above, forever.
        for n, r, w in [(3, 1, 1), (4, 2, 1), (5, 2, 2)]:
            row = [1.0] * (w + 1) + [0.0] * (n - w)
            profile = profile_from_at_least(w, [row, row])
            spec = QuorumSpec(n, r, w)
            got = t_visibility_miss(spec, profile, 0.5)
            assert got == pytest.approx(quorum_miss_probability(spec))

    def test_hand_example(self):
        # at-least = [1, 1, 0.5, 0.25]: masses {1: 0.5, 2: 0.25, 3: 0.25}
        profile = profile_from_at_least(1, [[1, 1, 0.25, 0.125], [1, 1, 0.5, 0.25]])
        got = t_visibility_miss(QuorumSpec(3, 1, 1), profile, 1.0)
        assert got == pytest.approx(5 / 12)
        assert got == pytest.approx(
            enumerate_t_visibility(3, 1, [1, 1, 0.5, 0.25])
        )

    def test_matches_enumeration_small(self):
        rng = np.random.default_rng(7)
        for n in (2, 3, 4):
            for w in range(1, n + 1):
                # random monotone at-least row with the committed prefix at 1
                tail = np.sort(rng.random(n - w))[::-1]
                row = np.concatenate([np.ones(w + 1), tail])
                profile = profile_from_at_least(w, [row])
                for r in range(1, n + 1):
                    got = t_visibility_miss(QuorumSpec(n, r, w), profile, 0.0)
                    assert got == pytest.approx(enumerate_t_visibility(n, r, row))

    def test_interpolates_between_grid_points(self):
        profile = profile_from_at_least(1, [[1, 1, 0.0, 0.0], [1, 1, 1.0, 0.0]])
        spec = QuorumSpec(3, 1, 1)
        lo = t_visibility_miss(spec, profile, 0.0)
        mid = t_visibility_miss(spec, profile, 0.5)
        hi = t_visibility_miss(spec, profile, 1.0)
        assert lo > mid > hi
        assert mid == pytest.approx((lo + hi) / 2)

    def test_w_mismatch_rejected(self):
        profile = profile_from_at_least(1, [[1, 1, 0.5, 0.25]])
        with pytest.raises(ConfigurationError):
            t_visibility_miss(QuorumSpec(3, 1, 2), profile, 0.0)

    def test_t_outside_grid_rejected(self):
        profile = profile_from_at_least(1, [[1, 1, 0.5, 0.25]])
        with pytest.raises(ValueError):
            t_visibility_miss(QuorumSpec(3, 1, 1), profile, 2.0)

    def test_dominating_profile_bounded_by_fixed_quorum(self):
        spec = QuorumSpec(4, 1, 2)
        row = [1.0, 1.0, 1.0, 0.6, 0.3]
        profile = profile_from_at_least(2, [row])
        assert t_visibility_miss(spec, profile, 0.0) <= quorum_miss_probability(spec)


class TestKtStaleness:
    def test_k_one_equals_t_visibility(self):
        profile = profile_from_at_least(1, [[1, 1, 0.5, 0.25]])
        spec = QuorumSpec(3, 1, 1)
        assert kt_staleness_miss(spec, profile, 0.0, 1) == t_visibility_miss(spec, profile, 0.0)

    def test_hand_example_squared(self):
        profile = profile_from_at_least(1, [[1, 1, 0.5, 0.25]])
        assert kt_staleness_miss(QuorumSpec(3, 1, 1), profile, 0.0, 2) == pytest.approx(25 / 144)

    def test_fully_propagated_any_k(self):
        profile = profile_from_at_least(2, [[1, 1, 1, 1]])
        assert kt_staleness_miss(QuorumSpec(3, 2, 2), profile, 0.0, 5) == 0.0


class TestPropagationProfileInvariants:
    def test_rejects_non_monotone_in_c(self):
        with pytest.raises(ConfigurationError):
            profile_from_at_least(1, [[1, 1, 0.2, 0.5]])

    def test_rejects_non_monotone_in_t(self):
        with pytest.raises(ConfigurationError):
            profile_from_at_least(1, [[1, 1, 0.5, 0.2], [1, 1, 0.4, 0.2]])

    def test_rejects_uncommitted_prefix(self):
        with pytest.raises(ConfigurationError):
            profile_from_at_least(2, [[1, 1, 0.9, 0.5]])
