"""The analyze report: selected p, optimal ratio and the implied split sizes."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources

from .selection import SelectionResult
from .theory import optimal_ratio, three_way_ratios


def round_down_ratio(gamma: float) -> float:
    """Round gamma down at its first nonzero decimal place: 0.135 -> 0.1, 0.042 -> 0.04."""
    step = 10
    while math.floor(gamma * step + 1e-9) == 0:
        step *= 10
    return math.floor(gamma * step + 1e-9) / step


@dataclass
class AnalyzeReport:
    p: int
    gamma_star: float
    three_way: dict
    N: int
    n: int
    m: int
    suggested_gamma: float
    criterion: str
    direction: str
    selection: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @classmethod
    def build(cls, result: SelectionResult, N: int, warnings=()) -> "AnalyzeReport":
        ratio = optimal_ratio(result.p)
        return cls(
            p=result.p,
            gamma_star=ratio.gamma,
            three_way=three_way_ratios(result.p),
            N=N,
            n=ratio.n_of(N),
            m=ratio.m_of(N),
            suggested_gamma=round_down_ratio(ratio.gamma),
            criterion=result.criterion,
            direction=result.direction,
            selection=result.to_dict(),
            warnings=list(warnings),
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyzeReport":
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "AnalyzeReport":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        tw = self.three_way
        lines = [
            f"p = {self.p} (stepwise {self.criterion}, {self.selection.get('start', 'intercept')}"
            f" start, {self.selection.get('candidates', '?')} candidates)",
            f"gamma* = {self.gamma_star:.4f}",
            f"train:test = {math.sqrt(self.p):.4f}:1",
            f"N = {self.N}: n = {self.n}, m = {self.m}",
            f"three-way train/validation/test = "
            f"{tw['train']:.4f} / {tw['validation']:.4f} / {tw['test']:.4f}",
            f"note: p may be underestimated if the expansion misses terms; treat gamma* as an "
            f"upper bound, e.g. gamma = {self.suggested_gamma:g}",
        ]
        return "\n".join(lines)


def load_schema(name: str) -> dict:
    """Return one of the published JSON schemas (``ratio``, ``analyze``, ``split_plan``, ``curve_meta``)."""
    text = resources.files("optisplit").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)
