"""Stepwise AIC / Mallows Cp selection of the effective parameter count."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np
from scipy.linalg import qr

from .data import Dataset
from .errors import EmptyCandidateSetError, OptisplitError, RankDeficiencyError, SizeError
from .features import ModelMatrix, expand_features
from .ols import RANK_TOL, FitResult, fit_ols

STOP_TOL = 1e-10
CRITERIA = ("aic", "cp")
DIRECTIONS = ("forward", "both")
STARTS = ("intercept", "full")


def aic(fit: FitResult) -> float:
    """``n ln(rss / n) + 2p``, additive constants omitted.

    Only differences between models fitted to the same response are
    meaningful. A perfect fit (rss == 0) returns ``-inf`` and warns.
    """
    if fit.n <= fit.p:
        raise SizeError(f"AIC needs n > p (n={fit.n}, p={fit.p})")
    if fit.rss == 0.0:
        warnings.warn("perfect fit: rss = 0, AIC is -inf", RuntimeWarning, stacklevel=2)
        return -math.inf
    return fit.n * math.log(fit.rss / fit.n) + 2 * fit.p


def mallows_cp(fit: FitResult, sigma2_full: float) -> float:
    """``rss / sigma2_full - n + 2p``."""
    if not sigma2_full > 0:
        raise ValueError(f"sigma2_full must be positive, got {sigma2_full}")
    return fit.rss / sigma2_full - fit.n + 2 * fit.p


def full_model_sigma2(X: ModelMatrix, y) -> float:
    """Residual variance of the largest full-rank subset of the columns of ``X``.

    Aliased columns are identified by pivoted QR at the same tolerance used
    by :func:`fit_ols` and left out.
    """
    _, R, piv = qr(X.values, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > RANK_TOL * diag[0]))
    keep = sorted(piv[:rank])
    fit = fit_ols(X.values[:, keep], y)
    if fit.n <= fit.p:
        raise SizeError(f"full candidate model leaves no residual degrees of freedom "
                        f"(n={fit.n}, rank={fit.p})")
    if fit.sigma2_hat == 0:
        raise ValueError("full candidate model fits exactly; Cp is undefined")
    return fit.sigma2_hat


@dataclass(frozen=True)
class TraceStep:
    step: int
    action: str
    descriptor: str
    criterion_value: float


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple
    selected_indices: tuple
    criterion: str
    direction: str
    criterion_value: float
    trace: tuple
    skipped: tuple = field(default=())
    candidates: int = 0
    start: str = "intercept"
    warnings: tuple = field(default=(), compare=False)

    @property
    def p(self) -> int:
        return len(self.selected)

    @property
    def labels(self) -> list[str]:
        return [str(d) for d in self.selected]

    def to_dict(self) -> dict:
        """JSON-ready report; non-finite criterion values become ``None``."""
        def num(x):
            return x if math.isfinite(x) else None
        return {
            "p": self.p,
            "criterion": self.criterion,
            "direction": self.direction,
            "start": self.start,
            "criterion_value": num(self.criterion_value),
            "candidates": self.candidates,
            "selected": self.labels,
            "trace": [{"step": t.step, "action": t.action, "descriptor": t.descriptor,
                       "criterion_value": num(t.criterion_value)} for t in self.trace],
            "skipped": [{"step": s, "descriptor": d, "reason": r} for s, d, r in self.skipped],
        }


def replay_trace(trace, labels, start: str = "intercept") -> list[str]:
    """Apply add/remove steps to the start model; returns labels in column order."""
    order = {lab: i for i, lab in enumerate(labels)}
    active = {labels[0]} if start == "intercept" else set(labels)
    for t in trace:
        if t.action == "add":
            active.add(t.descriptor)
        elif t.action == "remove":
            active.remove(t.descriptor)
        else:
            raise ValueError(f"unknown trace action {t.action!r}")
    return sorted(active, key=order.__getitem__)


def _scorer(X: ModelMatrix, y, criterion: str, sigma2_full):
    values = X.values
    n = X.n
    if criterion == "aic":
        def score(cols):
            if len(cols) >= n:
                return None
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                return aic(fit_ols(values[:, cols], y))
    elif criterion == "cp":
        def score(cols):
            if len(cols) >= n:
                return None
            return mallows_cp(fit_ols(values[:, cols], y), sigma2_full)
    else:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    return score


def stepwise(X: ModelMatrix, y, criterion: str = "aic", direction: str = "both",
             sigma2_full: float | None = None, start: str = "intercept") -> SelectionResult:
    """Greedy stepwise selection from the intercept-only (or the full) model.

    With ``start="full"`` all columns are active initially; the full fit must
    be full-rank with n > p or :class:`RankDeficiencyError` /
    :class:`SizeError` is raised.

    Every step scores all single additions (and, for ``direction="both"``,
    all single removals of non-intercept columns) and applies the move with
    the lowest criterion, provided it improves on the current value by more
    than ``STOP_TOL``. Equal scores go to the lowest column index. Moves
    that would leave p >= n are not considered; candidates whose fit is
    rank-deficient are skipped and listed in ``SelectionResult.skipped``.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if start not in STARTS:
        raise ValueError(f"start must be one of {STARTS}, got {start!r}")
    if not X.has_intercept():
        raise ValueError("model matrix must start with the intercept column")
    y = np.asarray(y, dtype=float)
    if criterion == "cp" and sigma2_full is None:
        sigma2_full = full_model_sigma2(X, y)
    score = _scorer(X, y, criterion, sigma2_full)
    labels = X.labels

    active = [0] if start == "intercept" else list(range(X.p))
    current = score(active)
    if current is None:
        raise SizeError(f"start model has p={len(active)} >= n={X.n}")
    trace, skipped = [], []
    step = 0
    while True:
        step += 1
        best = None
        moves = [("add", j) for j in range(1, X.p) if j not in active]
        if direction == "both":
            moves += [("remove", j) for j in active if j != 0]
        for action, j in sorted(moves, key=lambda m: m[1]):
            cols = sorted(active + [j]) if action == "add" else [c for c in active if c != j]
            try:
                val = score(cols)
            except RankDeficiencyError as exc:
                skipped.append((step, labels[j], str(exc)))
                continue
            if val is None:
                continue
            if best is None or val < best[0]:
                best = (val, action, j)
        if best is None or not best[0] < current - STOP_TOL:
            break
        val, action, j = best
        if action == "add":
            active = sorted(active + [j])
        else:
            active = [c for c in active if c != j]
        current = val
        trace.append(TraceStep(len(trace) + 1, action, labels[j], val))

    return SelectionResult(
        selected=tuple(X.descriptors[j] for j in active),
        selected_indices=tuple(active),
        criterion=criterion,
        direction=direction,
        criterion_value=current,
        trace=tuple(trace),
        skipped=tuple(skipped),
        candidates=X.p,
        start=start,
    )


def best_subset(X: ModelMatrix, y, criterion: str = "aic", sigma2_full=None,
                max_candidates: int = 10):
    """Exhaustive search over all subsets that contain the intercept.

    Returns ``(criterion_value, column_indices)``; ties go to the subset that
    comes first in size-then-lexicographic order.
    """
    k = X.p - 1
    if k > max_candidates:
        raise ValueError(f"{k} candidates exceeds max_candidates={max_candidates}")
    y = np.asarray(y, dtype=float)
    if criterion == "cp" and sigma2_full is None:
        sigma2_full = full_model_sigma2(X, y)
    score = _scorer(X, y, criterion, sigma2_full)
    best = None
    for size in range(k + 1):
        for combo in combinations(range(1, X.p), size):
            cols = [0, *combo]
            try:
                val = score(cols)
            except RankDeficiencyError:
                continue
            if val is not None and (best is None or val < best[0]):
                best = (val, tuple(cols))
    return best


def selection_gap(X: ModelMatrix, y, criterion: str = "aic", direction: str = "both") -> float:
    """Criterion of the stepwise model minus the exhaustive optimum (>= 0)."""
    sigma2 = full_model_sigma2(X, y) if criterion == "cp" else None
    res = stepwise(X, y, criterion, direction, sigma2_full=sigma2)
    opt, _ = best_subset(X, y, criterion, sigma2_full=sigma2)
    if math.isinf(res.criterion_value) and math.isinf(opt):
        return 0.0
    return res.criterion_value - opt


def estimate_p(data: Dataset, include_interactions: bool = True, include_quadratics: bool = True,
               criterion: str = "aic", direction: str = "both", start: str = "auto"):
    """Expand features, select a model on the full data, return ``(p, SelectionResult)``.

    ``start="auto"`` runs the stepwise search from the intercept-only model
    and, for ``direction="both"`` when the full candidate model is estimable
    (full rank, n > k), also from the full model; the result with the lower
    criterion wins, the intercept start on ties. Greedy search from the intercept alone can
    stall in a poor local optimum on wide expansions.

    Raises :class:`EmptyCandidateSetError` when expansion leaves nothing but
    the intercept.
    """
    X = expand_features(data, include_interactions, include_quadratics)
    if X.p < 2:
        raise EmptyCandidateSetError("no non-constant, non-duplicate candidate features remain")
    sigma2 = None
    if criterion == "cp":
        try:
            sigma2 = full_model_sigma2(X, data.y)
        except (SizeError, ValueError) as exc:
            raise OptisplitError(f"cannot compute Cp scale: {exc}") from exc
    if start == "auto":
        result = stepwise(X, data.y, criterion, direction, sigma2_full=sigma2)
        alt = None
        if direction == "both":
            try:
                alt = stepwise(X, data.y, criterion, direction, sigma2_full=sigma2,
                               start="full")
            except (RankDeficiencyError, SizeError):
                pass
        if alt is not None and alt.criterion_value < result.criterion_value:
            result = alt
    else:
        result = stepwise(X, data.y, criterion, direction, sigma2_full=sigma2, start=start)
    if result.skipped and len({d for _, d, _ in result.skipped}) == X.p - 1:
        raise EmptyCandidateSetError("every candidate feature is aliased with the intercept")
    return result.p, replace(result, warnings=X.warnings)
