"""Monte Carlo engine: oracles, pigeonhole, determinism, propagation profiles."""

import itertools
import math

import numpy as np
import pytest

from quorumstale.distributions import (
    Degenerate,
    Exponential,
    Mixture,
    make_rng,
    preset,
)
from quorumstale.quorum import QuorumSpec, t_visibility_miss
from quorumstale.simulator import (
    NOT_REACHED,
    Estimate,
    Uniform,
    Wan,
    WarsModel,
    empirical_propagation_profile,
    estimate_latency,
    estimate_staleness,
    isotonic_nondecreasing,
    kt_estimate,
    run_trial,
    t_for_target,
    wilson_interval,
)


def degenerate_model(n, r, w, value=0.0):
    d = Degenerate(value)
    return WarsModel(QuorumSpec(n, r, w), d, d, d, d)


def preset_model(name, n, r, w, topology=Uniform()):
    p = preset(name)
    return WarsModel(QuorumSpec(n, r, w), p.w, p.a, p.r, p.s, topology)


class TestRunTrial:
    def test_degenerate_zero_never_stale(self):
        rng = make_rng(0)
        model = degenerate_model(3, 1, 1)
        for t in (0.0, 1.0, 10.0):
            outcome = run_trial(model, t, rng)
            assert not outcome.stale
            assert outcome.write_commit_ms == 0.0
            assert outcome.read_return_ms == 0.0
            assert outcome.fresh_replica_count_at_read == 1

    def test_strict_quorum_never_stale(self):
        p = preset("lnkd-disk")
        model = WarsModel(QuorumSpec(3, 2, 2), p.w, p.a, p.r, p.s)
        rng = make_rng(1)
        assert not any(run_trial(model, 0.0, rng).stale for _ in range(2000))

    def test_outcome_ranges(self):
        model = preset_model("ymmr", 3, 1, 1)
        rng = make_rng(2)
        for _ in range(500):
            out = run_trial(model, 0.0, rng)
            assert out.write_commit_ms >= 0
            assert out.read_return_ms >= 0
            assert 0 <= out.fresh_replica_count_at_read <= 3
            if out.stale:
                assert out.fresh_replica_count_at_read == 0

    def test_rejects_negative_t(self):
        with pytest.raises(ValueError):
            run_trial(degenerate_model(3, 1, 1), -1.0, make_rng(0))


class TestMemorylessOracle:
    """n=2, r=w=1, W exponential, everything else instant.

    The random tiebreak picks a uniform replica; by memorylessness the
    non-minimum replica lags by a fresh exponential, so the staleness
    probability is exactly exp(-rate*t)/2.
    """

    @pytest.mark.parametrize("rate", [0.1, 1.0])
    def test_matches_closed_form(self, rate):
        zero = Degenerate(0.0)
        model = WarsModel(QuorumSpec(2, 1, 1), Exponential(rate), zero, zero, zero)
        trials = 200_000
        for t in (0.0, 1.0 / rate, 3.0 / rate):
            est = estimate_staleness(model, t, trials, seed=123)
            expected = 0.5 * math.exp(-rate * t)
            se = math.sqrt(expected * (1 - expected) / trials)
            assert abs(est.p_hat - expected) < 3 * se


def two_point(lo, p_lo, hi):
    """Two-point discrete distribution used by the enumeration oracle."""
    return Mixture(((p_lo, Degenerate(lo)), (1.0 - p_lo, Degenerate(hi))))


def enumerate_staleness(spec, legs, t):
    """Exhaustive staleness probability for two-point legs.

    Enumerates every combination of per-replica draws and every read-order
    tiebreak consistent with the request+response sums, weighting tied
    orders uniformly.
    """
    n, r, w = spec.n, spec.r, spec.w
    options = []
    for leg in legs:  # legs: (value, prob) pairs per leg, shared across replicas
        options.append(leg)
    total = 0.0
    axes = [leg for leg in legs for _ in range(n)]
    for combo in itertools.product(*[range(2) for _ in axes]):
        prob = 1.0
        values = []
        for choice, leg in zip(combo, axes):
            value, p_first = leg[0], leg[1]
            alt = leg[2]
            values.append(value if choice == 0 else alt)
            prob *= p_first if choice == 0 else (1.0 - p_first)
        w_lat = values[0:n]
        a_lat = values[n : 2 * n]
        r_lat = values[2 * n : 3 * n]
        s_lat = values[3 * n : 4 * n]
        commit = sorted(wi + ai for wi, ai in zip(w_lat, a_lat))[w - 1]
        rs = [ri + si for ri, si in zip(r_lat, s_lat)]
        stale_weight = 0.0
        orders = [
            perm
            for perm in itertools.permutations(range(n))
            if all(rs[perm[i]] <= rs[perm[i + 1]] for i in range(n - 1))
        ]
        for perm in orders:
            first = perm[:r]
            if all(w_lat[i] > commit + t + r_lat[i] for i in first):
                stale_weight += 1.0 / len(orders)
        total += prob * stale_weight
    return total


class TestBruteForceEquivalence:
    @pytest.mark.parametrize(
        "n,r,w,t",
        [(2, 1, 1, 0.0), (3, 1, 1, 0.0), (3, 1, 1, 1.0), (3, 2, 1, 0.0), (3, 1, 2, 0.5)],
    )
    def test_two_point_models(self, n, r, w, t):
        # each leg: (low value, P(low), high value)
        leg_params = [(0.5, 0.6, 4.0), (0.25, 0.5, 2.0), (0.1, 0.7, 3.0), (0.2, 0.5, 1.5)]
        spec = QuorumSpec(n, r, w)
        legs = leg_params
        exact = enumerate_staleness(spec, legs, t)
        model = WarsModel(
            spec,
            two_point(*leg_params[0]),
            two_point(*leg_params[1]),
            two_point(*leg_params[2]),
            two_point(*leg_params[3]),
        )
        est = estimate_staleness(model, t, 300_000, seed=77)
        assert est.ci95_lo - 1e-9 <= exact <= est.ci95_hi + 1e-9


class TestEstimateStaleness:
    def test_pigeonhole_strict_configs(self):
        for name in ("lnkd-ssd", "lnkd-disk", "ymmr"):
            model = preset_model(name, 3, 2, 2)
            assert estimate_staleness(model, 0.0, 100_000, seed=5).p_hat == 0.0

    def test_wilson_interval_brackets(self):
        est = estimate_staleness(preset_model("lnkd-disk", 3, 1, 1), 0.0, 50_000, seed=9)
        assert est.ci95_lo <= est.p_hat <= est.ci95_hi
        assert est.trials == 50_000

    def test_deterministic_same_seed(self):
        model = preset_model("ymmr", 3, 1, 1)
        a = estimate_staleness(model, 5.0, 150_000, seed=21)
        b = estimate_staleness(model, 5.0, 150_000, seed=21)
        assert a == b

    def test_worker_count_does_not_change_result(self):
        model = preset_model("lnkd-disk", 3, 1, 1)
        serial = estimate_staleness(model, 2.0, 200_000, seed=31, workers=1)
        parallel = estimate_staleness(model, 2.0, 200_000, seed=31, workers=4)
        assert serial == parallel

    def test_monotone_in_quorum_sizes(self):
        base = preset_model("lnkd-disk", 3, 1, 1)
        bigger_r = preset_model("lnkd-disk", 3, 2, 1)
        bigger_w = preset_model("lnkd-disk", 3, 1, 2)
        trials = 200_000
        p0 = estimate_staleness(base, 0.0, trials, seed=41)
        p1 = estimate_staleness(bigger_r, 0.0, trials, seed=41)
        p2 = estimate_staleness(bigger_w, 0.0, trials, seed=41)
        width = p0.ci95_hi - p0.ci95_lo
        assert p1.p_hat <= p0.p_hat + width
        assert p2.p_hat <= p0.p_hat + width

    def test_monotone_in_t_after_smoothing(self):
        model = preset_model("lnkd-disk", 3, 1, 1)
        ts = [0.0, 2.0, 5.0, 10.0, 20.0]
        raw = [1 - estimate_staleness(model, t, 100_000, seed=51 + i).p_hat
               for i, t in enumerate(ts)]
        smoothed = isotonic_nondecreasing(raw)
        assert all(b >= a for a, b in zip(smoothed, smoothed[1:]))
        for (t1, c1), (t2, c2) in itertools.combinations(zip(ts, raw), 2):
            if t2 > t1 + 5.0:
                assert c2 >= c1 - 2 * 0.01


class TestWanTopology:
    def test_local_read_after_local_write_is_fresh(self):
        # 3 datacenters, instant local delays: stale exactly when the read
        # coordinator is not the write coordinator, so p_stale = 2/3 at t=0.
        model = WarsModel(
            QuorumSpec(3, 1, 1),
            Degenerate(0.0), Degenerate(0.0), Degenerate(0.0), Degenerate(0.0),
            Wan(remote_extra_ms=75.0),
        )
        est = estimate_staleness(model, 0.0, 100_000, seed=61)
        assert est.p_hat == pytest.approx(2 / 3, abs=0.01)
        # once the remote hop has elapsed, everyone has the write
        est = estimate_staleness(model, 75.0, 50_000, seed=62)
        assert est.p_hat == 0.0

    def test_remote_extra_validated(self):
        with pytest.raises(ValueError):
            Wan(remote_extra_ms=-1.0)


class TestEstimateLatency:
    def test_degenerate_read_latency(self):
        model = degenerate_model(3, 1, 1, value=2.0)
        table = estimate_latency(model, 20_000, seed=71)
        for key in ("min", 50.0, 99.9, "max"):
            assert table.read_ms[key] == 4.0
            assert table.write_ms[key] == 4.0

    def test_requires_enough_tail_samples(self):
        with pytest.raises(ValueError):
            estimate_latency(degenerate_model(3, 1, 1), 100, seed=0, percentiles=(99.9,))

    def test_read_side_identity_between_presets(self):
        # read legs of the SSD and disk fits are identical distributions
        ssd = estimate_latency(preset_model("lnkd-ssd", 3, 1, 1), 200_000, seed=81)
        disk = estimate_latency(preset_model("lnkd-disk", 3, 1, 1), 200_000, seed=81)
        assert ssd.read_at(99.0) == pytest.approx(disk.read_at(99.0), rel=0.05)

    def test_higher_r_raises_read_latency(self):
        fast = estimate_latency(preset_model("ymmr", 3, 1, 1), 100_000, seed=91)
        slow = estimate_latency(preset_model("ymmr", 3, 3, 1), 100_000, seed=91)
        assert slow.read_at(99.0) > fast.read_at(99.0)


class TestKtEstimate:
    def test_k_one_identity(self):
        model = preset_model("lnkd-disk", 3, 1, 1)
        assert kt_estimate(model, 0.0, 1, 100_000, seed=101) == estimate_staleness(
            model, 0.0, 100_000, seed=101
        )

    def test_large_k_vanishes(self):
        model = preset_model("lnkd-disk", 3, 1, 1)
        assert kt_estimate(model, 0.0, 64, 100_000, seed=102).p_hat < 1e-9

    def test_square_of_estimate(self):
        model = preset_model("lnkd-disk", 3, 1, 1)
        single = estimate_staleness(model, 0.0, 200_000, seed=103)
        double = kt_estimate(model, 0.0, 2, 200_000, seed=103)
        assert double.p_hat == pytest.approx(single.p_hat**2)
        assert single.p_hat**2 == pytest.approx(0.561**2, abs=0.03)


class TestTForTarget:
    def test_strict_quorum_returns_zero(self):
        model = preset_model("ymmr", 3, 2, 2)
        assert t_for_target(model, 0.999, 20_000, seed=111) == 0.0

    def test_degenerate_returns_zero(self):
        assert t_for_target(degenerate_model(3, 1, 1), 0.5, 10_000, seed=112) == 0.0

    def test_not_reached_sentinel(self):
        # a write leg with an enormous tail never reaches five nines in 10ms
        model = WarsModel(
            QuorumSpec(3, 1, 1),
            Exponential(0.001), Degenerate(0.0), Degenerate(0.0), Degenerate(0.0),
        )
        got = t_for_target(model, 0.99999, 20_000, seed=113, horizon=10.0)
        assert got == NOT_REACHED

    def test_rejects_bad_target(self):
        with pytest.raises(ValueError):
            t_for_target(degenerate_model(3, 1, 1), 1.0, 1000, seed=0)


class TestPropagationProfileSimulation:
    def test_committed_prefix_and_degenerate(self):
        model = degenerate_model(3, 1, 1)
        profile = empirical_propagation_profile(model, [0.0, 1.0], 10_000, seed=121)
        assert np.all(profile.table == 1.0)

    def test_invariants_hold_for_presets(self):
        grid = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0]
        for name in ("lnkd-ssd", "lnkd-disk", "ymmr"):
            model = preset_model(name, 3, 1, 1)
            profile = empirical_propagation_profile(model, grid, 50_000, seed=122)
            assert profile.w_base == 1
            assert np.all(profile.table[0, :2] == 1.0)  # c <= w committed at t=0
            assert np.all(np.diff(profile.table, axis=0) >= 0)  # monotone in t
            assert np.all(np.diff(profile.table, axis=1) <= 0)  # monotone in c

    def test_closed_form_is_conservative_upper_bound(self):
        # the expanding-quorum sum ignores read flight time, so it must sit
        # above the simulated staleness estimate at every grid t
        grid = [0.0, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0]
        for name in ("lnkd-ssd", "lnkd-disk", "ymmr"):
            model = preset_model(name, 3, 1, 1)
            profile = empirical_propagation_profile(model, grid, 200_000, seed=123)
            for t in grid:
                bound = t_visibility_miss(model.spec, profile, t)
                est = estimate_staleness(model, t, 200_000, seed=124)
                assert bound >= est.ci95_lo

    def test_rejects_bad_grid(self):
        model = degenerate_model(3, 1, 1)
        with pytest.raises(ValueError):
            empirical_propagation_profile(model, [1.0, 2.0], 1000, seed=0)
        with pytest.raises(ValueError):
            empirical_propagation_profile(model, [], 1000, seed=0)


class TestWilsonInterval:
    def test_basic_properties(self):
        lo, hi = wilson_interval(10, 100)
        assert 0 <= lo <= 0.1 <= hi <= 1

    def test_extremes(self):
        lo, hi = wilson_interval(0, 1000)
        assert lo == 0.0 and hi < 0.01
        lo, hi = wilson_interval(1000, 1000)
        assert hi == 1.0 and lo > 0.99

    def test_estimate_from_counts(self):
        est = Estimate.from_counts(5, 50)
        assert est.p_hat == 0.1
        assert est.ci95_lo <= est.p_hat <= est.ci95_hi


class TestIsotonic:
    def test_already_monotone_unchanged(self):
        values = [0.1, 0.2, 0.3]
        assert list(isotonic_nondecreasing(values)) == values

    def test_pools_violators(self):
        got = isotonic_nondecreasing([0.3, 0.1, 0.5])
        assert list(got) == [0.2, 0.2, 0.5]
        assert all(b >= a for a, b in zip(got, got[1:]))
