"""Ordinary least squares through a column-pivoted Householder QR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from .errors import RankDeficiencyError, SizeError
from .features import ModelMatrix

RANK_TOL = 1e-10


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray
    rss: float
    sigma2_hat: float
    n: int
    p: int
    rank: int
    residuals: np.ndarray


def _as_matrix(X):
    if isinstance(X, ModelMatrix):
        return X.values, X.labels
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X, [f"column {j}" for j in range(X.shape[1])]


def fit_ols(X, y, rank_tol: float = RANK_TOL) -> FitResult:
    """Least-squares fit of ``y`` on the columns of ``X``.

    Rank is the number of diagonal entries of R with magnitude above
    ``rank_tol * |R[0, 0]|`` (pivoting makes |R[0, 0]| the largest). A
    rank-deficient matrix raises :class:`RankDeficiencyError` naming the
    columns that pivoting pushed past the rank.

    ``rss`` is snapped to exactly 0 when it is below the rounding floor
    ``(n * eps * ||y||)**2``, so that exact fits compare equal.
    ``sigma2_hat`` is ``rss / (n - p)`` and NaN when n == p.
    """
    F, labels = _as_matrix(X)
    y = np.asarray(y, dtype=float)
    n, p = F.shape
    if y.shape != (n,):
        raise ValueError(f"response has shape {y.shape}, expected ({n},)")
    if n < p:
        raise SizeError(f"n={n} rows is fewer than p={p} columns")
    if p == 0:
        rss = float(y @ y)
        return FitResult(np.empty(0), rss, rss / n, n, 0, 0, y.copy())

    Q, R, piv = qr(F, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > rank_tol * diag[0])) if diag[0] > 0 else 0
    if rank < p:
        raise RankDeficiencyError([labels[j] for j in piv[rank:]], rank, p)

    beta = np.empty(p)
    beta[piv] = solve_triangular(R, Q.T @ y)
    resid = y - F @ beta
    rss = float(resid @ resid)
    if rss <= (n * np.finfo(float).eps) ** 2 * float(y @ y):
        rss = 0.0
    sigma2 = rss / (n - p) if n > p else float("nan")
    return FitResult(beta, rss, sigma2, n, p, rank, resid)
