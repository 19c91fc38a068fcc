"""Closed-form risk of the hold-out error estimate for linear regression.

Notation: N rows are split into n for training and m for testing, the
splitting ratio is gamma = m / N, p is the number of regression
coefficients (intercept included) and sigma2 the noise variance. The
hold-out estimate is the mean squared prediction error on the test rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .features import ModelMatrix


def _round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


@dataclass(frozen=True)
class SplitRatio:
    """Test fraction ``gamma`` in (0, 1), optionally with the p it came from."""

    gamma: float
    p: int | None = None

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")

    def m_of(self, N: int) -> int:
        """Test size: gamma * N rounded half away from zero, clamped to [1, N - 1]."""
        if N < 2:
            raise ValueError(f"need N >= 2, got {N}")
        return min(max(_round_half_away(self.gamma * N), 1), N - 1)

    def n_of(self, N: int) -> int:
        return N - self.m_of(N)


@dataclass(frozen=True)
class TraceStats:
    A: np.ndarray
    tr_A: float
    tr_A2: float


def _values(F):
    return F.values if isinstance(F, ModelMatrix) else np.asarray(F, dtype=float)


def compute_trace_stats(F_x, F_u) -> TraceStats:
    """``A = (n/m) (F_x'F_x)^-1 F_u'F_u`` and the traces of A and A @ A.

    The inverse is never formed; A comes from a Cholesky solve.
    """
    Fx, Fu = _values(F_x), _values(F_u)
    n, p = Fx.shape
    m = Fu.shape[0]
    if Fu.shape[1] != p:
        raise ValueError(f"F_x has {p} columns, F_u has {Fu.shape[1]}")
    if n < p:
        raise ValueError(f"n={n} < p={p}")
    try:
        factor = cho_factor(Fx.T @ Fx)
    except LinAlgError as exc:
        raise LinAlgError("F_x'F_x is singular") from exc
    A = (n / m) * cho_solve(factor, Fu.T @ Fu)
    return TraceStats(A, float(np.trace(A)), float(np.sum(A * A.T)))


def conditional_mean_error(sigma2: float, n: int, tr_A: float) -> float:
    """Expected hold-out error given the design: ``sigma2 (1 + tr_A / n)``."""
    if sigma2 < 0 or n < 1:
        raise ValueError("need sigma2 >= 0 and n >= 1")
    return sigma2 * (1.0 + tr_A / n)


def conditional_var_error(sigma2: float, n: int, m: int, tr_A: float, tr_A2: float) -> float:
    """Variance of the hold-out error given the design.

    ``sigma2**2 (2/m + 4 tr_A / (m n) + 2 tr_A2 / n**2)``. Averaging this
    over designs and adding the variance of :func:`conditional_mean_error`
    gives the unconditional variance.
    """
    if sigma2 < 0 or n < 1 or m < 1:
        raise ValueError("need sigma2 >= 0, n >= 1 and m >= 1")
    return sigma2 ** 2 * (2.0 / m + 4.0 * tr_A / (m * n) + 2.0 * tr_A2 / n ** 2)


def exact_mse(sigma2: float, p: int, n: int, m: int) -> float:
    """E{err^2} for a matched split, where A is the identity."""
    if not (n >= p >= 1 and m >= 1):
        raise ValueError(f"need n >= p >= 1 and m >= 1 (p={p}, n={n}, m={m})")
    return sigma2 ** 2 * ((1 + p / n) ** 2 + 2 / m + 4 * p / (m * n) + 2 * p / n ** 2)


def asymptotic_mse(sigma2: float, p: int, N: int, gamma: float) -> float:
    """Large-N E{err^2}: ``sigma2**2 (1 + 2p / (N (1 - gamma)) + 2 / (N gamma))``.

    The O(1/N**2) remainder is dropped.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    return sigma2 ** 2 * (1 + 2 * p / (N * (1 - gamma)) + 2 / (N * gamma))


def optimal_ratio(p: int) -> SplitRatio:
    """Test fraction ``1 / (sqrt(p) + 1)``, i.e. a sqrt(p):1 train:test split."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return SplitRatio(1.0 / (math.sqrt(p) + 1.0), p=int(p))


def three_way_ratios(p: int) -> dict:
    """Train/validation/test weights from applying the optimal ratio twice.

    Proportional to p : sqrt(p) : sqrt(p) + 1, i.e. ``(1-g)**2, g(1-g), g``
    with g the optimal ratio. The test weight falls back to one minus the
    others whenever the rounded closed forms do not sum to exactly 1.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    s = math.sqrt(p)
    denom = (s + 1.0) ** 2
    train = p / denom
    validation = s / denom
    test = 1.0 / (s + 1.0)
    if train + validation + test != 1.0:
        test = 1.0 - train - validation
    return {"train": train, "validation": validation, "test": test}
