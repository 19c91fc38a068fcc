"""Chebyshev nodes and first-kind polynomial basis."""

import numpy as np


def chebyshev_nodes(N):
    """Roots of T_N: ``cos((2i - 1) pi / (2N))`` for i = 1..N, in decreasing order."""
    if N < 1:
        raise ValueError("N must be >= 1")
    i = np.arange(1, N + 1)
    return np.cos((2 * i - 1) * np.pi / (2 * N))


def chebyshev_basis(x, degree):
    """Columns T_0(x), ..., T_degree(x) from the three-term recurrence."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    out = np.empty((x.size, degree + 1))
    out[:, 0] = 1.0
    if degree >= 1:
        out[:, 1] = x
    for r in range(1, degree):
        out[:, r + 1] = 2.0 * x * out[:, r] - out[:, r - 1]
    return out
