import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optisplit.data import Dataset
from optisplit.splitter import (SplitPlan, energy_distance, energy_split, energy_swap_search,
                                make_split, materialize_split, random_split,
                                sample_test_indices, split_points, standardize)
from optisplit.theory import SplitRatio

from conftest import make_dataset


def brute_energy(A, B):
    A, B = np.atleast_2d(A), np.atleast_2d(B)
    d = lambda u, v: float(np.sqrt(np.sum((u - v) ** 2)))
    ab = sum(d(a, b) for a in A for b in B)
    aa = sum(d(a, c) for a in A for c in A)
    bb = sum(d(b, c) for b in B for c in B)
    return 2 * ab / (len(A) * len(B)) - aa / len(A) ** 2 - bb / len(B) ** 2


def check_partition(plan, N, m):
    test, train = set(plan.test_indices), set(plan.train_indices)
    assert not test & train
    assert test | train == set(range(N))
    assert len(test) == m and len(train) == N - m
    assert list(plan.test_indices) == sorted(plan.test_indices)
    assert list(plan.train_indices) == sorted(plan.train_indices)


class TestRandomSplit:
    def test_sizes(self):
        plan = random_split(10, SplitRatio(0.5), 0)
        check_partition(plan, 10, 5)
        check_partition(random_split(2, SplitRatio(0.01), 0), 2, 1)

    def test_deterministic(self):
        a = random_split(100, SplitRatio(0.2), 42)
        b = random_split(100, SplitRatio(0.2), 42)
        assert a == b and a.to_dict() == b.to_dict()
        assert random_split(100, SplitRatio(0.2), 43) != a

    def test_prefix_property(self):
        big = sample_test_indices(50, 30, np.random.default_rng(5))
        small = sample_test_indices(50, 10, np.random.default_rng(5))
        assert set(small) <= set(big)

    def test_uniform_inclusion(self):
        N, m, R = 8, 3, 20000
        counts = np.zeros(N)
        rng = np.random.default_rng(0)
        for _ in range(R):
            counts[sample_test_indices(N, m, rng)] += 1
        expected = R * m / N
        assert np.all(np.abs(counts - expected) < 4 * np.sqrt(expected))

    def test_bad_seed(self):
        with pytest.raises(ValueError):
            random_split(10, SplitRatio(0.5), -1)


class TestPartitionInvariant:
    def test_thousand_random_cases(self):
        rng = np.random.default_rng(2024)
        for case in range(1000):
            N = int(rng.integers(2, 60))
            gamma = float(rng.uniform(0.01, 0.99))
            method = "energy" if case % 4 == 0 else "random"
            ratio = SplitRatio(gamma)
            d = make_dataset(rng.standard_normal((N, 2)), rng.standard_normal(N))
            plan = make_split(d, ratio, method, int(rng.integers(0, 2 ** 63)), max_iters=50)
            check_partition(plan, N, ratio.m_of(N))


class TestEnergyDistance:
    def test_examples(self):
        assert energy_distance([[0.0]], [[1.0]]) == pytest.approx(2.0)
        pts = np.random.default_rng(0).standard_normal((6, 3))
        assert energy_distance(pts, pts[::-1]) == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 31), st.integers(1, 8), st.integers(1, 8), st.integers(1, 3))
    def test_matches_double_loop(self, seed, a, b, dim):
        rng = np.random.default_rng(seed)
        A, B = rng.standard_normal((a, dim)), rng.standard_normal((b, dim)) + 0.5
        val = energy_distance(A, B)
        assert val == pytest.approx(brute_energy(A, B), abs=1e-10)
        assert val >= -1e-12

    def test_errors(self):
        with pytest.raises(ValueError):
            energy_distance(np.ones((2, 2)), np.ones((2, 3)))
        with pytest.raises(ValueError):
            energy_distance(np.empty((0, 2)), np.ones((2, 2)))

    def test_standardize(self):
        Z = standardize(np.column_stack([np.arange(5.0), np.full(5, 3.0)]))
        np.testing.assert_allclose(Z.mean(axis=0), 0, atol=1e-15)
        assert Z[:, 0].std() == pytest.approx(1.0)
        assert np.all(Z[:, 1] == 0)


def line_dataset():
    return Dataset({"y": np.arange(1.0, 11.0)}, "y")


class TestEnergySplit:
    def test_ten_point_instance_beats_median(self):
        d = line_dataset()
        Z = split_points(d)
        values = [energy_distance(Z[list(c)], Z[[i for i in range(10) if i not in c]])
                  for c in itertools.combinations(range(10), 5)]
        assert len(values) == 252
        for seed in range(20):
            plan = energy_split(d, SplitRatio(0.5), seed)
            assert plan.energy_value <= np.median(values) + 1e-12
            test = list(plan.test_indices)
            assert plan.energy_value == pytest.approx(
                energy_distance(Z[test], Z[list(plan.train_indices)]), abs=1e-10)

    def test_max_iters_zero_is_random_split(self):
        d = make_dataset(np.random.default_rng(0).standard_normal((30, 2)), np.arange(30.0))
        e = energy_split(d, SplitRatio(0.3), 9, max_iters=0)
        r = random_split(30, SplitRatio(0.3), 9)
        assert e.test_indices == r.test_indices and e.swaps == 0
        assert e.energy_value == e.initial_energy_value

    def test_incremental_matches_full_recompute(self):
        rng = np.random.default_rng(1)
        Z = standardize(rng.standard_normal((25, 3)))
        history = []
        energy_swap_search(Z, np.arange(8), 100,
                           callback=lambda mask, pred, cur: history.append((mask, pred, cur)))
        assert history
        prev = energy_distance(Z[:8], Z[8:])
        for mask, predicted, current in history:
            full = energy_distance(Z[mask], Z[~mask])
            assert abs(predicted - full) <= 1e-8
            assert abs(current - full) <= 1e-8
            assert current < prev
            prev = current

    def test_never_worse_than_start(self, concrete):
        plan = energy_split(concrete, SplitRatio(0.1), 3)
        check_partition(plan, 1030, 103)
        assert plan.energy_value <= plan.initial_energy_value

    def test_deterministic(self):
        d = make_dataset(np.random.default_rng(4).standard_normal((40, 2)), np.arange(40.0))
        assert energy_split(d, SplitRatio(0.25), 11) == energy_split(d, SplitRatio(0.25), 11)

    def test_median_energy_beats_random_decile(self, concrete):
        d = concrete.take(range(200))
        Z = split_points(d)
        ratio = SplitRatio(0.2)
        greedy = [energy_split(d, ratio, s).energy_value for s in range(100)]
        rand = []
        for s in range(100):
            plan = random_split(200, ratio, 1000 + s)
            rand.append(energy_distance(Z[list(plan.test_indices)], Z[list(plan.train_indices)]))
        assert np.median(greedy) < np.percentile(rand, 10)

    def test_negative_iters(self):
        with pytest.raises(ValueError):
            energy_split(line_dataset(), SplitRatio(0.5), 0, max_iters=-1)


class TestMaterialize:
    def test_small(self):
        d = Dataset({"x": [10.0, 11.0, 12.0], "y": [0.0, 1.0, 2.0]}, "y")
        plan = SplitPlan(0.3, (1,), (0, 2), "random", 0)
        train, test = materialize_split(d, plan)
        assert train.columns["x"].tolist() == [10.0, 12.0]
        assert test.y.tolist() == [1.0]
        assert train.header == d.header

    def test_reassembles(self):
        rng = np.random.default_rng(0)
        d = make_dataset(rng.standard_normal((20, 2)), rng.standard_normal(20))
        plan = random_split(20, SplitRatio(0.35), 1)
        train, test = materialize_split(d, plan)
        idx = list(plan.train_indices) + list(plan.test_indices)
        order = np.argsort(idx)
        for name in d.columns:
            both = np.concatenate([train.columns[name], test.columns[name]])
            np.testing.assert_array_equal(both[order], d.columns[name])

    def test_concrete_sizes(self, concrete):
        train, test = materialize_split(concrete, random_split(1030, SplitRatio(0.1), 0))
        assert (train.row_count, test.row_count) == (927, 103)

    def test_out_of_range(self):
        d = Dataset({"y": [0.0, 1.0, 2.0]}, "y")
        with pytest.raises(IndexError):
            materialize_split(d, SplitPlan(0.3, (5,), (0, 1), "random", 0))

    def test_plan_round_trip(self):
        plan = random_split(30, SplitRatio(0.2), 8)
        assert SplitPlan.from_dict(plan.to_dict(), 30) == plan
