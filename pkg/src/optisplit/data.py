"""Tabular datasets and CSV ingestion."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class Dataset:
    """Named real-valued columns, one of which is the response.

    Column arrays are copied and made read-only on construction, so a
    Dataset can be shared freely.
    """

    columns: Mapping[str, np.ndarray]
    response_name: str
    header: tuple = field(default=(), compare=False)
    # row subsets from take() may be a single row; ingested data needs two
    min_rows: int = field(default=2, repr=False, compare=False)

    def __post_init__(self):
        cols = {}
        for name, values in self.columns.items():
            arr = np.array(values, dtype=float)
            if arr.ndim != 1:
                raise DataError(f"column {name!r} is not one-dimensional")
            arr.setflags(write=False)
            cols[str(name)] = arr
        if self.response_name not in cols:
            raise DataError(f"response column {self.response_name!r} not found")
        lengths = {len(v) for v in cols.values()}
        if len(lengths) != 1:
            raise DataError(f"columns have differing lengths {sorted(lengths)}")
        (n,) = lengths
        if n < self.min_rows:
            raise DataError(f"need at least {self.min_rows} rows, got {n}")
        for name, arr in cols.items():
            bad = np.flatnonzero(~np.isfinite(arr))
            if bad.size:
                raise DataError(f"column {name!r} has non-finite values", rows=bad.tolist())
        object.__setattr__(self, "columns", cols)
        if not self.header:
            object.__setattr__(self, "header", tuple(cols))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.response_name == other.response_name
                and list(self.columns) == list(other.columns)
                and all(np.array_equal(v, other.columns[k]) for k, v in self.columns.items()))

    __hash__ = None

    @property
    def row_count(self) -> int:
        return len(self.columns[self.response_name])

    @property
    def predictor_names(self) -> list[str]:
        return [c for c in self.columns if c != self.response_name]

    @property
    def y(self) -> np.ndarray:
        return self.columns[self.response_name]

    def predictors(self) -> np.ndarray:
        """Return the N x d predictor matrix in column order."""
        names = self.predictor_names
        if not names:
            return np.empty((self.row_count, 0))
        return np.column_stack([self.columns[c] for c in names])

    def take(self, rows: Sequence[int]) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        if rows.size and (rows.min() < 0 or rows.max() >= self.row_count):
            raise IndexError("row index out of range")
        return Dataset({k: v[rows] for k, v in self.columns.items()},
                       self.response_name, header=self.header, min_rows=1)


def _parse_float(cell: str):
    try:
        return float(cell)
    except ValueError:
        return None


def read_csv_table(path) -> tuple[list[str], list[list[str]]]:
    text = Path(path).read_text(encoding="utf-8-sig")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{path}: empty file") from None
    rows = [r for r in reader if r]
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise DataError(f"row {i}: expected {len(header)} fields, got {len(r)}", rows=[i])
    return header, rows


def load_csv(path, response_name: str, categorical_policy: str = "reject") -> Dataset:
    """Read a CSV file with a header row into a :class:`Dataset`.

    Parameters
    ----------
    path : path-like
        UTF-8 CSV file, '.' as decimal separator.
    response_name : str
        Header of the response column; must be numeric.
    categorical_policy : {"reject", "one_hot"}
        With ``one_hot`` a non-numeric column with L levels becomes L-1
        indicator columns named ``col[level]``; the lexicographically first
        level is the reference. With ``reject`` any non-numeric column is an
        error.

    Raises
    ------
    DataError
        Missing, empty or non-finite cells (``rows`` lists the 0-based data
        row indices), a missing or non-numeric response, or a rejected
        categorical column.
    """
    if categorical_policy not in ("reject", "one_hot"):
        raise ValueError(f"unknown categorical policy {categorical_policy!r}")
    header, rows = read_csv_table(path)
    if response_name not in header:
        raise DataError(f"response column {response_name!r} not in header {header}")
    if len(set(header)) != len(header):
        raise DataError("duplicate column names in header")

    columns: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        cells = [r[j].strip() for r in rows]
        missing = [i for i, c in enumerate(cells) if c == ""]
        if missing:
            raise DataError(f"column {name!r}: missing values in rows {missing[:20]}", rows=missing)
        parsed = [_parse_float(c) for c in cells]
        if all(v is not None for v in parsed):
            nonfinite = [i for i, v in enumerate(parsed) if not math.isfinite(v)]
            if nonfinite:
                raise DataError(f"column {name!r}: non-finite values in rows {nonfinite[:20]}",
                                rows=nonfinite)
            columns[name] = np.array(parsed, dtype=float)
            continue
        if name == response_name:
            bad = [i for i, v in enumerate(parsed) if v is None]
            raise DataError(f"response column {name!r} is not numeric (rows {bad[:20]})", rows=bad)
        if categorical_policy == "reject":
            bad = [i for i, v in enumerate(parsed) if v is None]
            raise DataError(f"column {name!r} is non-numeric; use one_hot coding or recode it",
                            rows=bad)
        levels = sorted(set(cells))
        for level in levels[1:]:
            columns[f"{name}[{level}]"] = np.array([c == level for c in cells], dtype=float)
    return Dataset(columns, response_name, header=tuple(header))


def write_csv(data: Dataset, path) -> None:
    """Write ``data`` in column order with round-trip float precision."""
    names = list(data.columns)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        cols = [data.columns[c] for c in names]
        for i in range(data.row_count):
            writer.writerow([repr(float(col[i])) for col in cols])
