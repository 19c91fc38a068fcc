"""Monte Carlo estimates of the hold-out error's mean, variance and mean square.

Two data-generating models are supported: an intercept-only Gaussian model
and a polynomial regression in the Chebyshev basis on a fixed design of
Chebyshev nodes. Each replicate draws fresh noise and a fresh split, fits
the correctly specified model on the training rows and returns the mean
squared prediction error on the test rows.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .chebyshev import chebyshev_basis, chebyshev_nodes
from .errors import ConfigError
from .ols import fit_ols
from .splitter import energy_swap_search, standardize
from .theory import SplitRatio, exact_mse

__all__ = [
    "InterceptModel", "ChebyshevModel", "SimConfig", "CurvePoint", "RiskCurve",
    "chebyshev_nodes", "chebyshev_basis", "default_grid", "replicate_seed",
    "replicate_once", "replicate_grid", "run_simulation", "overlay_exact", "run_fixed_design",
]

log = logging.getLogger(__name__)

CHUNK = 250


def default_grid():
    """0.05, 0.10, ..., 0.95."""
    return tuple(round(0.05 * k, 2) for k in range(1, 20))


@dataclass(frozen=True)
class InterceptModel:
    mu: float = 0.0
    sigma: float = 1.0

    @property
    def p(self) -> int:
        return 1


@dataclass(frozen=True)
class ChebyshevModel:
    """``y = sum_r beta_r T_r(x) + noise`` with r < p; beta defaults to zero."""

    p: int
    sigma: float = 1.0
    beta: tuple | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ConfigError("p must be >= 1")
        if self.beta is not None:
            object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
            if len(self.beta) != self.p:
                raise ConfigError(f"beta has {len(self.beta)} entries, expected {self.p}")


@dataclass(frozen=True)
class SimConfig:
    model: InterceptModel | ChebyshevModel
    N: int
    gamma_grid: tuple = field(default_factory=default_grid)
    replicates: int = 10_000
    master_seed: int = 0
    splitter: str = "random"
    max_iters: int = 1000
    common_random_numbers: bool = True

    def __post_init__(self):
        object.__setattr__(self, "gamma_grid", tuple(float(g) for g in self.gamma_grid))

    @property
    def p(self) -> int:
        return self.model.p

    def sizes(self, gamma):
        ratio = SplitRatio(gamma)
        return ratio.n_of(self.N), ratio.m_of(self.N)

    def validate(self) -> "SimConfig":
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.N < 2:
            raise ConfigError("N must be >= 2")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        if self.splitter not in ("random", "energy"):
            raise ConfigError(f"unknown splitter {self.splitter!r}")
        grid = self.gamma_grid
        if not grid:
            raise ConfigError("empty gamma grid")
        if any(not 0 < g < 1 for g in grid):
            raise ConfigError("gamma values must lie in (0, 1)")
        if list(grid) != sorted(set(grid)):
            raise ConfigError("gamma grid must be strictly increasing")
        for g in grid:
            n, m = self.sizes(g)
            if n <= self.p:
                raise ConfigError(f"gamma={g}: n={n} training rows is not more than p={self.p}")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = {"kind": "intercept" if isinstance(self.model, InterceptModel)
                      else "chebyshev", **asdict(self.model)}
        d["gamma_grid"] = list(self.gamma_grid)
        return d


@dataclass(frozen=True)
class CurvePoint:
    gamma: float
    n: int
    m: int
    mean_err: float
    var_err: float
    mean_sq_err: float
    stderr_mean_sq_err: float
    stderr_mean_err: float
    stderr_var_err: float
    exact_mse: float | None = None


@dataclass(frozen=True)
class RiskCurve:
    config: SimConfig
    points: tuple

    CSV_COLUMNS = ("gamma", "mean_err", "var_err", "mean_sq_err", "stderr")

    def column(self, name):
        return np.array([getattr(pt, name) for pt in self.points])

    def argmin_gamma(self) -> float:
        """Grid gamma with the smallest estimated mean square.

        Grid ratios that round to the same test size tie exactly under
        common random numbers; among ties the one closest to its realized
        ratio m / N is reported, then the smallest.
        """
        vals = self.column("mean_sq_err")
        N = self.config.N
        tied = [pt for pt, v in zip(self.points, vals) if v == vals.min()]
        return min(tied, key=lambda pt: (abs(pt.gamma - pt.m / N), pt.gamma)).gamma

    def to_csv(self, fh, overlay: bool = False) -> None:
        cols = list(self.CSV_COLUMNS) + (["exact_mse"] if overlay else [])
        fh.write(",".join(cols) + "\n")
        for pt in self.points:
            row = [pt.gamma, pt.mean_err, pt.var_err, pt.mean_sq_err, pt.stderr_mean_sq_err]
            if overlay:
                row.append(pt.exact_mse if pt.exact_mse is not None else
                           exact_mse(self._sigma2(), self.config.p, pt.n, pt.m))
            fh.write(",".join(repr(float(v)) for v in row) + "\n")

    def _sigma2(self):
        return self.config.model.sigma ** 2

    def metadata(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "points": [{"gamma": pt.gamma, "n": pt.n, "m": pt.m,
                        "stderr_mean_err": pt.stderr_mean_err,
                        "stderr_var_err": pt.stderr_var_err} for pt in self.points],
            "estimators": {"var_err": "sample variance, denominator R-1",
                           "mean_sq_err": "mean of squared errors",
                           "stderr": "standard error of mean_sq_err"},
        }

    def write(self, csv_path, overlay: bool = False) -> str:
        """Write the curve CSV and a ``.json`` metadata sidecar next to it."""
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            self.to_csv(fh, overlay)
        meta_path = str(csv_path).rsplit(".", 1)[0] + ".json"
        with open(meta_path, "w", encoding="utf-8") as fh:
            json.dump(self.metadata(), fh, indent=2)
            fh.write("\n")
        return meta_path


def replicate_seed(master_seed: int, gamma_index: int | None, replicate: int) -> int:
    """64-bit seed for one replicate, independent of evaluation order.

    ``gamma_index=None`` gives the seed shared by all grid ratios under
    common random numbers.
    """
    key = (replicate,) if gamma_index is None else (gamma_index, replicate)
    ss = np.random.SeedSequence(master_seed, spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])


_DESIGNS = {}


def _design(config: SimConfig):
    """Chebyshev nodes and model matrix for the fixed design, cached per (N, p)."""
    key = (config.N, config.p)
    if key not in _DESIGNS:
        x = chebyshev_nodes(config.N)
        _DESIGNS[key] = (x, chebyshev_basis(x, config.p - 1))
    return _DESIGNS[key]


def _draw(config: SimConfig, rng, m_max: int):
    """Noise first, then a partial Fisher-Yates order of length ``m_max``.

    Any m <= m_max swaps of the shuffle consume the same draws as the first
    m of ``m_max``, so ``order[:m]`` equals ``sample_test_indices(N, m)``
    (before sorting) for the same generator state.
    """
    N = config.N
    model = config.model
    noise = model.sigma * rng.standard_normal(N)
    if isinstance(model, InterceptModel):
        x, F = None, None
        y = model.mu + noise
    else:
        x, F = _design(config)
        y = noise if model.beta is None else F @ np.asarray(model.beta) + noise
    order = list(range(N))
    for i, j in enumerate(rng.integers(np.arange(m_max), N).tolist()):
        order[i], order[j] = order[j], order[i]
    return x, F, y, np.array(order[:m_max], dtype=np.intp)


def _holdout_error(config, x, F, y, test, m):
    N = config.N
    if config.splitter == "energy":
        coords = y[:, None] if x is None else np.column_stack([x, y])
        test, *_ = energy_swap_search(standardize(coords), test, config.max_iters)
    mask = np.zeros(N, dtype=bool)
    mask[test] = True
    if F is None:
        # least-squares fit of the intercept-only model is the training mean
        resid = y[mask] - y[~mask].mean()
    else:
        beta = fit_ols(F[~mask], y[~mask]).coefficients
        resid = y[mask] - F[mask] @ beta
    return float(resid @ resid / m)


def replicate_once(config: SimConfig, gamma: float, replicate_seed: int) -> float:
    """One simulated hold-out error for the model and split described by ``config``.

    Draw order from the replicate's generator: N noise values, then the
    partial Fisher-Yates test sample of size m.
    """
    n, m = config.sizes(gamma)
    if n <= config.p:
        raise ConfigError(f"n={n} training rows is not more than p={config.p}")
    rng = np.random.default_rng(replicate_seed)
    x, F, y, order = _draw(config, rng, m)
    return _holdout_error(config, x, F, y, order, m)


def replicate_grid(config: SimConfig, replicate_seed: int) -> np.ndarray:
    """Hold-out errors at every grid ratio from one shared draw (common random numbers).

    Entry k equals ``replicate_once(config, gamma_grid[k], replicate_seed)``.
    """
    ms = [config.sizes(g)[1] for g in config.gamma_grid]
    rng = np.random.default_rng(replicate_seed)
    x, F, y, order = _draw(config, rng, max(ms))
    cache = {}
    out = np.empty(len(ms))
    for k, m in enumerate(ms):
        if m not in cache:
            cache[m] = _holdout_error(config, x, F, y, order[:m], m)
        out[k] = cache[m]
    return out


def _run_chunk(args):
    config, gi, start, stop = args
    if gi is None:
        vals = np.array([replicate_grid(config, replicate_seed(config.master_seed, None, r))
                         for r in range(start, stop)])
        return None, start, vals
    gamma = config.gamma_grid[gi]
    vals = np.array([replicate_once(config, gamma, replicate_seed(config.master_seed, gi, r))
                     for r in range(start, stop)])
    return gi, start, vals


def _summarize(gamma, n, m, errs) -> CurvePoint:
    R = errs.size
    mean = math.fsum(errs) / R
    sq = errs * errs
    mean_sq = math.fsum(sq) / R
    if R > 1:
        dev = errs - mean
        var = math.fsum(dev * dev) / (R - 1)
        se_sq = math.sqrt(math.fsum((sq - mean_sq) ** 2) / (R - 1) / R)
        se_mean = math.sqrt(var / R)
        m4 = math.fsum(dev ** 4) / R
        se_var = math.sqrt(max(m4 - var * var * (R - 3) / (R - 1), 0.0) / R)
    else:
        warnings.warn("single replicate: var_err reported as 0", RuntimeWarning, stacklevel=3)
        var = se_sq = se_mean = se_var = 0.0
    return CurvePoint(gamma, n, m, mean, var, mean_sq, se_sq, se_mean, se_var)


def run_simulation(config: SimConfig, workers: int = 1, overlay: bool = False) -> RiskCurve:
    """Estimate E{err}, var{err} and E{err^2} at every grid ratio.

    Replicates are evaluated in chunks, optionally across ``workers``
    processes. Every replicate owns a seed derived from the master seed and
    its index (and, without common random numbers, the grid index); sums use
    ``math.fsum``. The curve is therefore bit-identical for any worker count.
    """
    config.validate()
    R = config.replicates
    G = len(config.gamma_grid)
    errs = np.empty((G, R))
    if config.common_random_numbers:
        tasks = [(config, None, s, min(s + CHUNK, R)) for s in range(0, R, CHUNK)]
    else:
        tasks = [(config, gi, s, min(s + CHUNK, R)) for gi in range(G) for s in range(0, R, CHUNK)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, tasks))
    else:
        results = map(_run_chunk, tasks)
    for gi, start, vals in results:
        if gi is None:
            errs[:, start:start + len(vals)] = vals.T
        else:
            errs[gi, start:start + len(vals)] = vals

    sigma2 = config.model.sigma ** 2
    points = []
    for gi, gamma in enumerate(config.gamma_grid):
        n, m = config.sizes(gamma)
        pt = _summarize(gamma, n, m, errs[gi])
        if overlay:
            pt = CurvePoint(**{**asdict(pt), "exact_mse": exact_mse(sigma2, config.p, n, m)})
        points.append(pt)
    return RiskCurve(config, tuple(points))


def overlay_exact(config: SimConfig) -> list[float]:
    """Matched-split E{err^2} at each grid ratio, for comparison with a simulated curve."""
    config.validate()
    sigma2 = config.model.sigma ** 2
    return [exact_mse(sigma2, config.p, *config.sizes(g)) for g in config.gamma_grid]


def _fixed_design_chunk(args):
    Fx, Fu, sigma, master_seed, start, stop = args
    n, m = Fx.shape[0], Fu.shape[0]
    out = np.empty(stop - start)
    for k, r in enumerate(range(start, stop)):
        rng = np.random.default_rng(replicate_seed(master_seed, None, r))
        e = sigma * rng.standard_normal(n + m)
        beta = fit_ols(Fx, e[:n]).coefficients
        resid = e[n:] - Fu @ beta
        out[k] = resid @ resid / m
    return start, out


def run_fixed_design(F_x, F_u, sigma: float = 1.0, replicates: int = 10_000,
                     master_seed: int = 0, workers: int = 1) -> CurvePoint:
    """Hold-out error moments with the training and test designs held fixed.

    Only the noise is redrawn: n + m standard normals per replicate, training
    rows first. The model is fitted by least squares with true coefficients
    zero, which loses no generality. The result estimates the conditional
    mean and variance given the design and is bit-identical for any worker
    count.
    """
    Fx = np.asarray(F_x, dtype=float)
    Fu = np.asarray(F_u, dtype=float)
    if replicates < 1:
        raise ConfigError("replicates must be >= 1")
    tasks = [(Fx, Fu, sigma, master_seed, s, min(s + CHUNK, replicates))
             for s in range(0, replicates, CHUNK)]
    errs = np.empty(replicates)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fixed_design_chunk, tasks))
    else:
        results = map(_fixed_design_chunk, tasks)
    for start, vals in results:
        errs[start:start + len(vals)] = vals
    n, m = Fx.shape[0], Fu.shape[0]
    return _summarize(m / (n + m), n, m, errs)
