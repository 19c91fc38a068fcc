import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import LinAlgError

from optisplit.theory import (SplitRatio, asymptotic_mse, compute_trace_stats,
                              conditional_mean_error, conditional_var_error, exact_mse,
                              optimal_ratio, three_way_ratios)


class TestSplitRatio:
    @pytest.mark.parametrize("gamma", [0.0, 1.0, -0.2, 1.5])
    def test_open_interval(self, gamma):
        with pytest.raises(ValueError):
            SplitRatio(gamma)

    def test_sizes(self):
        assert SplitRatio(0.1).m_of(1030) == 103
        assert SplitRatio(0.01).m_of(2) == 1
        assert SplitRatio(0.99).m_of(10) == 9
        # 0.25 * 10 = 2.5 rounds away from zero
        assert SplitRatio(0.25).m_of(10) == 3
        assert SplitRatio(0.5).n_of(11) == 5

    @given(st.floats(1e-6, 1 - 1e-6), st.integers(2, 10 ** 6))
    def test_sizes_partition(self, gamma, N):
        r = SplitRatio(gamma)
        assert 1 <= r.m_of(N) <= N - 1
        assert r.m_of(N) + r.n_of(N) == N


def dense_inverse_traces(Fx, Fu, dps=40):
    n, m = Fx.shape[0], Fu.shape[0]
    with mpmath.workdps(dps):
        X = mpmath.matrix(Fx.tolist())
        U = mpmath.matrix(Fu.tolist())
        A = (X.T * X) ** -1 * (U.T * U) * mpmath.mpf(n) / m
        tr = sum(A[i, i] for i in range(A.rows))
        A2 = A * A
        tr2 = sum(A2[i, i] for i in range(A.rows))
        return float(tr), float(tr2)


class TestTraceStats:
    def test_matched_split_identity(self):
        rng = np.random.default_rng(0)
        Fu = np.column_stack([np.ones(6), rng.standard_normal((6, 2))])
        Fx = np.vstack([Fu, Fu])  # n = 2m, so F_x'F_x / n = F_u'F_u / m
        ts = compute_trace_stats(Fx, Fu)
        np.testing.assert_allclose(ts.A, np.eye(3), atol=1e-12)
        assert ts.tr_A == pytest.approx(3, rel=1e-12)
        assert ts.tr_A2 == pytest.approx(3, rel=1e-12)

    def test_row_rescaled_matched_design(self):
        rng = np.random.default_rng(1)
        Fx = rng.standard_normal((12, 3))
        L = np.linalg.cholesky(Fx.T @ Fx / 12)
        Q, _ = np.linalg.qr(rng.standard_normal((5, 3)))
        Fu = math.sqrt(5) * Q @ L.T  # F_u'F_u / 5 == F_x'F_x / 12
        assert compute_trace_stats(Fx, Fu).tr_A == pytest.approx(3, rel=1e-12)

    def test_intercept_only(self):
        ts = compute_trace_stats(np.ones((9, 1)), np.ones((4, 1)))
        assert ts.tr_A == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_against_dense_inverse(self, seed):
        rng = np.random.default_rng(seed)
        Fx, Fu = rng.standard_normal((10, 2)), rng.standard_normal((5, 2))
        ts = compute_trace_stats(Fx, Fu)
        tr, tr2 = dense_inverse_traces(Fx, Fu)
        assert ts.tr_A == pytest.approx(tr, rel=1e-8)
        assert ts.tr_A2 == pytest.approx(tr2, rel=1e-8)
        assert ts.tr_A == pytest.approx(np.trace(ts.A), rel=1e-10)
        assert ts.tr_A2 == pytest.approx(np.trace(ts.A @ ts.A), rel=1e-10)

    def test_tr_A2_is_matrix_square(self):
        rng = np.random.default_rng(3)
        ts = compute_trace_stats(rng.standard_normal((8, 3)), rng.standard_normal((4, 3)))
        assert not math.isclose(ts.tr_A2, float(np.sum(ts.A ** 2)), rel_tol=1e-6)

    def test_singular(self):
        Fx = np.column_stack([np.ones(5), np.ones(5)])
        with pytest.raises(LinAlgError):
            compute_trace_stats(Fx, Fx[:2])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            compute_trace_stats(np.ones((5, 2)), np.ones((3, 1)))


class TestClosedForms:
    def test_conditional_mean(self):
        assert conditional_mean_error(1, 100, 1) == pytest.approx(1.01)
        assert conditional_mean_error(2, 50, 5) == pytest.approx(2.2)
        assert conditional_mean_error(1.7, 9, 0) == 1.7

    def test_conditional_var(self):
        assert conditional_var_error(1, 50, 50, 1, 1) == pytest.approx(0.0424)
        assert conditional_var_error(0, 50, 50, 1, 1) == 0
        lim = conditional_var_error(1.3, 20, 10 ** 12, 3, 4)
        assert lim == pytest.approx(2 * 4 * 1.3 ** 2 / 400, rel=1e-9)

    def test_exact_mse(self):
        assert exact_mse(1, 1, 5, 5) == pytest.approx(2.08)
        assert exact_mse(1, 4, 300, 100) == pytest.approx(1.0474, abs=1e-4)
        assert exact_mse(1, 3, 10 ** 9, 10 ** 9) == pytest.approx(1.0, abs=1e-8)

    def test_exact_mse_argmin_n10(self):
        vals = {m: exact_mse(1, 1, 10 - m, m) for m in range(1, 10)}
        assert min(vals, key=vals.get) == 5

    def test_asymptotic(self):
        assert asymptotic_mse(1, 1, 10, 0.5) == pytest.approx(1.8)
        assert asymptotic_mse(1, 4, 400, 1 / 3) == pytest.approx(1.045)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            exact_mse(1, 5, 4, 3)
        with pytest.raises(ValueError):
            asymptotic_mse(1, 1, 10, 1.0)

    @given(st.integers(1, 50), st.integers(0, 500), st.integers(1, 500),
           st.floats(0.01, 100))
    def test_matched_decomposition(self, p, extra, m, sigma2):
        n = p + extra
        mean = conditional_mean_error(sigma2, n, p)
        var = conditional_var_error(sigma2, n, m, p, p)
        assert exact_mse(sigma2, p, n, m) == pytest.approx(mean ** 2 + var, rel=1e-12)
        assert exact_mse(sigma2, p, n, m) >= sigma2 ** 2


class TestOptimalRatio:
    def test_reference_values(self):
        assert optimal_ratio(1).gamma == 0.5
        assert optimal_ratio(81).gamma == 0.1
        assert optimal_ratio(41).gamma == pytest.approx(0.1351, abs=5e-4)

    def test_decreasing_and_bounded(self):
        g = np.array([optimal_ratio(p).gamma for p in range(1, 10001)])
        assert np.all(np.diff(g) < 0)
        assert g.max() == 0.5 and g.min() > 0

    @pytest.mark.parametrize("N", [10, 100, 1000, 10 ** 6])
    def test_grid_argmin_of_asymptotic_risk(self, N):
        step = 1e-4
        grid = np.arange(step, 1, step)
        for p in range(1, 101):
            risk = 1 + 2 * p / (N * (1 - grid)) + 2 / (N * grid)
            assert abs(grid[np.argmin(risk)] - optimal_ratio(p).gamma) <= step / 2 + 1e-12
            # the library function agrees with the inline expression at the optimum
            g = optimal_ratio(p).gamma
            assert asymptotic_mse(1, p, N, g) == pytest.approx(
                1 + 2 * p / (N * (1 - g)) + 2 / (N * g), rel=1e-14)

    def test_invalid(self):
        with pytest.raises(ValueError):
            optimal_ratio(0)


class TestThreeWay:
    def test_examples(self):
        assert three_way_ratios(16) == {"train": 0.64, "validation": 0.16, "test": 0.2}
        assert three_way_ratios(1) == {"train": 0.25, "validation": 0.25, "test": 0.5}

    def test_sums_to_one(self):
        for p in range(1, 10001):
            w = three_way_ratios(p)
            assert w["train"] + w["validation"] + w["test"] == 1.0
            assert all(0 < v < 1 for v in w.values())

    def test_proportions(self):
        for p in (2, 9, 41, 100):
            w = three_way_ratios(p)
            s = math.sqrt(p)
            assert w["train"] / w["validation"] == pytest.approx(s)
            assert w["test"] / w["validation"] == pytest.approx((s + 1) / s)
