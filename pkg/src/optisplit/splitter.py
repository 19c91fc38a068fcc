"""Train/test splitting: seeded random subsampling and energy-distance swaps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import Dataset
from .theory import SplitRatio

METHODS = ("random", "energy")
SWAP_TOL = 1e-12


@dataclass(frozen=True)
class SplitPlan:
    gamma: float
    test_indices: tuple
    train_indices: tuple
    method: str
    seed: int
    energy_value: float | None = None
    initial_energy_value: float | None = None
    swaps: int = 0

    @property
    def N(self) -> int:
        return len(self.test_indices) + len(self.train_indices)

    def to_dict(self) -> dict:
        out = {"gamma": self.gamma, "method": self.method, "seed": self.seed,
               "N": self.N, "n": len(self.train_indices), "m": len(self.test_indices),
               "test_indices": list(self.test_indices)}
        if self.method == "energy":
            out.update(energy_value=self.energy_value,
                       initial_energy_value=self.initial_energy_value, swaps=self.swaps)
        return out

    @classmethod
    def from_dict(cls, d: dict, N: int) -> "SplitPlan":
        test = tuple(sorted(int(i) for i in d["test_indices"]))
        train = tuple(sorted(set(range(N)) - set(test)))
        return cls(float(d["gamma"]), test, train, d["method"], int(d["seed"]),
                   d.get("energy_value"), d.get("initial_energy_value"), int(d.get("swaps", 0)))


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def sample_test_indices(N: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Partial Fisher-Yates: m swaps over ``arange(N)``, the first m slots are the test set.

    Swap i exchanges slot i with slot ``j_i``, where ``j_i`` is drawn
    uniformly from [i, N) by one vectorised ``rng.integers`` call.
    """
    idx = list(range(N))
    targets = rng.integers(np.arange(m), N).tolist()
    for i, j in enumerate(targets):
        idx[i], idx[j] = idx[j], idx[i]
    return np.sort(np.array(idx[:m], dtype=np.intp))


def _complement(N, test):
    mask = np.ones(N, dtype=bool)
    mask[test] = False
    return np.flatnonzero(mask)


def random_split(N: int, ratio: SplitRatio, seed) -> SplitPlan:
    """Uniform without-replacement test sample of size ``ratio.m_of(N)``.

    The generator is numpy's PCG64 seeded with ``seed``; the same
    ``(N, ratio, seed)`` always yields the same plan.
    """
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    seed = _check_seed(seed)
    rng = np.random.default_rng(seed)
    test = sample_test_indices(N, ratio.m_of(N), rng)
    return SplitPlan(ratio.gamma, tuple(test.tolist()), tuple(_complement(N, test).tolist()),
                     "random", seed)


def energy_distance(A, B) -> float:
    """Energy distance between two point sets under the Euclidean norm.

    ``2/(|A||B|) sum ||a-b|| - 1/|A|^2 sum ||a-a'|| - 1/|B|^2 sum ||b-b'||``.
    Points are used as given; see :func:`standardize`.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.size == 0 or B.size == 0:
        raise ValueError("point sets must be nonempty")
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    return float(2.0 * cdist(A, B).mean() - cdist(A, A).mean() - cdist(B, B).mean())


def standardize(Z) -> np.ndarray:
    """Center columns and scale to unit (population) variance; constant columns are only centered."""
    Z = np.asarray(Z, dtype=float)
    mu = Z.mean(axis=0)
    sd = Z.std(axis=0)
    sd[sd == 0] = 1.0
    return (Z - mu) / sd


def split_points(data: Dataset) -> np.ndarray:
    """Standardized predictors and response as the coordinates for energy splitting."""
    return standardize(np.column_stack([data.predictors(), data.y]))


class _EnergyState:
    """Running sums that make one swap evaluation O(1) and one swap update O(N).

    ``a[i]`` is the summed distance from point i to the test set, ``b[i]``
    to the training set.
    """

    def __init__(self, D, test_mask):
        self.D = D
        self.mask = test_mask.copy()
        self.a = D[:, self.mask].sum(axis=1)
        self.b = D[:, ~self.mask].sum(axis=1)

    def parts(self):
        T, S = self.mask, ~self.mask
        return self.b[T].sum(), self.a[T].sum(), self.b[S].sum()

    def value(self):
        m = int(self.mask.sum())
        n = self.mask.size - m
        cross, tt, ss = self.parts()
        return 2.0 * cross / (m * n) - tt / m ** 2 - ss / n ** 2

    def swap_values(self, T, S):
        """Energy after swapping test point T[i] with training point S[j], as an |T| x |S| array."""
        m, n = T.size, S.size
        cross, tt, ss = self.parts()
        at, bt = self.a[T][:, None], self.b[T][:, None]
        as_, bs = self.a[S][None, :], self.b[S][None, :]
        d = self.D[np.ix_(T, S)]
        cross2 = cross - bt - as_ + bs + at + 2.0 * d
        tt2 = tt - 2.0 * at + 2.0 * as_ - 2.0 * d
        ss2 = ss - 2.0 * bs + 2.0 * bt - 2.0 * d
        return 2.0 * cross2 / (m * n) - tt2 / m ** 2 - ss2 / n ** 2

    def apply(self, t, s):
        dt, ds = self.D[:, t], self.D[:, s]
        self.a += ds - dt
        self.b += dt - ds
        self.mask[t] = False
        self.mask[s] = True


def energy_swap_search(Z, test, max_iters: int, tol: float = SWAP_TOL, callback=None):
    """Best-improvement swap search minimizing energy distance between test and train.

    Each iteration scores every (test, train) swap and applies the best one
    if it lowers the energy by more than ``tol``; among equal scores the
    lowest test index, then the lowest train index, wins. Uses an N x N
    distance matrix, so memory is O(N^2).

    Returns ``(test_indices, energy, initial_energy, swaps)``.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    N = Z.shape[0]
    mask = np.zeros(N, dtype=bool)
    mask[np.asarray(test, dtype=np.intp)] = True
    state = _EnergyState(cdist(Z, Z), mask)
    current = initial = state.value()
    swaps = 0
    while swaps < max_iters:
        T = np.flatnonzero(state.mask)
        S = np.flatnonzero(~state.mask)
        vals = state.swap_values(T, S)
        k = int(np.argmin(vals))
        best = vals.flat[k]
        if not best < current - tol:
            break
        t, s = T[k // S.size], S[k % S.size]
        state.apply(t, s)
        current = state.value()
        swaps += 1
        if callback is not None:
            callback(state.mask.copy(), best, current)
    return np.flatnonzero(state.mask), float(current), float(initial), swaps


def energy_split(data: Dataset, ratio: SplitRatio, seed, max_iters: int = 1000) -> SplitPlan:
    """Deterministic split that greedily lowers the energy distance between test and train.

    Starts from :func:`random_split` with the same seed and swaps single
    test/train pairs until no swap improves or ``max_iters`` swaps were
    made. Coordinates are all predictors plus the response, standardized
    over the full dataset.
    """
    if max_iters < 0:
        raise ValueError("max_iters must be >= 0")
    init = random_split(data.row_count, ratio, seed)
    test, value, initial, swaps = energy_swap_search(split_points(data), init.test_indices,
                                                     max_iters)
    test = test.tolist()
    train = _complement(data.row_count, test).tolist()
    return SplitPlan(ratio.gamma, tuple(test), tuple(train), "energy", init.seed,
                     value, initial, swaps)


def make_split(data: Dataset, ratio: SplitRatio, method: str, seed, max_iters: int = 1000):
    if method == "random":
        return random_split(data.row_count, ratio, seed)
    if method == "energy":
        return energy_split(data, ratio, seed, max_iters)
    raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def materialize_split(data: Dataset, plan: SplitPlan):
    """Return ``(train, test)`` Datasets with rows in original order."""
    N = data.row_count
    idx = list(plan.train_indices) + list(plan.test_indices)
    if any(i < 0 or i >= N for i in idx):
        raise IndexError(f"plan indices out of range for {N} rows")
    return data.take(sorted(plan.train_indices)), data.take(sorted(plan.test_indices))
