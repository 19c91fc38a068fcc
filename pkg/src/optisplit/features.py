"""Feature descriptors, model matrices and polynomial feature expansion."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .chebyshev import chebyshev_basis
from .data import Dataset
from .errors import DataError

log = logging.getLogger(__name__)

KINDS = ("intercept", "main", "interaction", "quadratic", "chebyshev")


@dataclass(frozen=True)
class FeatureDescriptor:
    kind: str
    sources: tuple = ()
    degree: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        object.__setattr__(self, "sources", tuple(self.sources))
        nsrc = {"intercept": 0, "main": 1, "quadratic": 1, "interaction": 2, "chebyshev": 1}
        if len(self.sources) != nsrc[self.kind]:
            raise ValueError(f"{self.kind} feature needs {nsrc[self.kind]} source column(s)")
        if self.kind == "interaction" and self.sources[0] == self.sources[1]:
            raise ValueError("interaction sources must be distinct")
        if self.kind != "chebyshev" and self.degree != 0:
            raise ValueError("degree is only meaningful for chebyshev features")

    def __str__(self):
        if self.kind == "intercept":
            return "1"
        if self.kind == "main":
            return self.sources[0]
        if self.kind == "interaction":
            return f"{self.sources[0]}:{self.sources[1]}"
        if self.kind == "quadratic":
            return f"{self.sources[0]}^2"
        return f"T{self.degree}({self.sources[0]})"

    def evaluate(self, data: Dataset) -> np.ndarray:
        cols = data.columns
        if self.kind == "intercept":
            return np.ones(data.row_count)
        a = cols[self.sources[0]]
        if self.kind == "main":
            return a.copy()
        if self.kind == "interaction":
            return a * cols[self.sources[1]]
        if self.kind == "quadratic":
            return a * a
        return chebyshev_basis(a, self.degree)[:, -1]


INTERCEPT = FeatureDescriptor("intercept")


@dataclass(frozen=True)
class ModelMatrix:
    """An n x p feature matrix whose columns are labelled by descriptors."""

    values: np.ndarray
    descriptors: tuple
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("model matrix must be two-dimensional")
        if v.shape[1] != len(self.descriptors):
            raise ValueError(f"{v.shape[1]} columns but {len(self.descriptors)} descriptors")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "descriptors", tuple(self.descriptors))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def labels(self) -> list[str]:
        return [str(d) for d in self.descriptors]

    def columns(self, idx) -> "ModelMatrix":
        idx = list(idx)
        return ModelMatrix(self.values[:, idx], [self.descriptors[i] for i in idx])

    def rows(self, idx) -> "ModelMatrix":
        return ModelMatrix(self.values[np.asarray(idx, dtype=np.intp)], self.descriptors)

    def has_intercept(self) -> bool:
        return bool(self.descriptors) and self.descriptors[0].kind == "intercept"


def candidate_descriptors(names, include_interactions=True, include_quadratics=True):
    """Intercept, main effects, then interactions, then quadratics."""
    out = [INTERCEPT]
    out += [FeatureDescriptor("main", (c,)) for c in names]
    if include_interactions:
        out += [FeatureDescriptor("interaction", (a, b)) for a, b in combinations(names, 2)]
    if include_quadratics:
        out += [FeatureDescriptor("quadratic", (c,)) for c in names]
    return out


def expand_features(data: Dataset, include_interactions: bool = True,
                    include_quadratics: bool = True) -> ModelMatrix:
    """Build the intercept + main + interaction + quadratic model matrix.

    Columns that are exactly constant (the intercept excepted) or exactly
    equal to an earlier column are dropped; each drop is logged and kept in
    ``ModelMatrix.warnings``.
    """
    names = data.predictor_names
    if not names:
        raise DataError("dataset has no predictor columns")
    kept, cols, notes = [], [], []
    seen = {}
    for desc in candidate_descriptors(names, include_interactions, include_quadratics):
        v = desc.evaluate(data)
        if desc.kind != "intercept" and np.all(v == v[0]):
            notes.append(f"dropped constant column {desc}")
            continue
        key = (v + 0.0).tobytes()
        if key in seen:
            notes.append(f"dropped {desc}: duplicate of {seen[key]}")
            continue
        seen[key] = desc
        kept.append(desc)
        cols.append(v)
    for msg in notes:
        log.warning(msg)
    return ModelMatrix(np.column_stack(cols), kept, warnings=tuple(notes))
