"""Tabular ingestion, min-max normalization and parity split.

Records carrying the missing-value token are dropped whole; the remaining
records keep their file order, which the parity split relies on.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class DataError(ValueError):
    """Raised for malformed or unusable input tables."""


@dataclass(frozen=True)
class Sample:
    inputs: np.ndarray
    target: float


@dataclass(frozen=True)
class Dataset:
    """Samples as an (N, n) input matrix plus an N-vector of targets.

    ``record_ids`` are the 0-based positions of each sample among the
    surviving records of the source file and serve as sample identity.
    """

    X: np.ndarray
    y: np.ndarray
    input_names: tuple[str, ...]
    target_name: str
    record_ids: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, len(self.input_names))
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[1] != len(self.input_names):
            raise DataError(
                f"input matrix shape {X.shape} does not match {len(self.input_names)} input names")
        if X.shape[0] != y.shape[0]:
            raise DataError(f"{X.shape[0]} input rows but {y.shape[0]} targets")
        ids = np.arange(X.shape[0]) if self.record_ids is None else np.asarray(self.record_ids, dtype=int)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "input_names", tuple(self.input_names))
        object.__setattr__(self, "record_ids", ids)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.X.shape[1]

    @property
    def samples(self) -> list[Sample]:
        return [Sample(x, float(t)) for x, t in zip(self.X, self.y)]

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)

    def subset(self, rows: Sequence[int] | np.ndarray) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.X[rows], self.y[rows], self.input_names, self.target_name,
                       self.record_ids[rows])


@dataclass(frozen=True)
class NormParams:
    """Raw per-column min/max; inputs first, target last."""

    names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray

    @property
    def constant(self) -> np.ndarray:
        return self.maxs == self.mins

    @property
    def span(self) -> np.ndarray:
        return np.where(self.constant, 1.0, self.maxs - self.mins)

    def denormalize_inputs(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) * self.span[:-1] + self.mins[:-1]

    def denormalize_target(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=float) * self.span[-1] + self.mins[-1]

    def normalize(self, d: Dataset) -> Dataset:
        """Apply these (already fitted) parameters to another dataset."""
        if tuple(d.input_names) + (d.target_name,) != self.names:
            raise DataError(f"columns {d.input_names + (d.target_name,)} do not match {self.names}")
        span = self.span
        X = np.where(self.constant[:-1], 0.0, (d.X - self.mins[:-1]) / span[:-1])
        y = np.where(self.constant[-1], 0.0, (d.y - self.mins[-1]) / span[-1])
        return Dataset(X, y, d.input_names, d.target_name, d.record_ids)

    def to_dict(self) -> dict:
        return {"names": list(self.names), "min": self.mins.tolist(), "max": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, payload: dict) -> "NormParams":
        return cls(tuple(payload["names"]), np.asarray(payload["min"], dtype=float),
                   np.asarray(payload["max"], dtype=float))


def load_csv(path: str | Path, target_column: str, missing_token: str = "?",
             input_columns: Sequence[str] | None = None, allow_empty: bool = False) -> Dataset:
    """Read a headed CSV, dropping every record that holds ``missing_token``.

    Only the target and the input columns are parsed; by default the inputs
    are all other columns. Unused columns may hold free text.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, header row expected") from None
        if target_column not in header:
            raise DataError(f"{path}: target column {target_column!r} not in header {header}")
        if input_columns is None:
            input_columns = [h for h in header if h != target_column]
        missing_cols = [c for c in input_columns if c not in header]
        if missing_cols:
            raise DataError(f"{path}: input columns {missing_cols} not in header {header}")
        if target_column in input_columns:
            raise DataError(f"{path}: target column {target_column!r} listed as an input")
        cols = [header.index(c) for c in input_columns] + [header.index(target_column)]

        rows, dropped = [], 0
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(record)}")
            cells = [record[c].strip() for c in cols]
            if any(cell == missing_token for cell in cells):
                dropped += 1
                continue
            values = []
            for name, cell in zip(list(input_columns) + [target_column], cells):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: column {name!r} has non-numeric value {cell!r}") from None
                if not math.isfinite(v):
                    raise DataError(f"{path}:{lineno}: column {name!r} is not finite")
                values.append(v)
            rows.append(values)

    if not rows and not allow_empty:
        raise DataError(f"{path}: no records left after dropping missing values")
    logger.info("%s: kept %d records, dropped %d with missing values", path, len(rows), dropped)
    arr = np.array(rows, dtype=float).reshape(len(rows), len(cols))
    return Dataset(arr[:, :-1], arr[:, -1], tuple(input_columns), target_column)


def normalize_minmax(d: Dataset) -> tuple[Dataset, NormParams]:
    """Map every input column and the target onto [0, 1].

    Constant columns become all zeros and are flagged in the returned params.
    """
    if len(d) == 0:
        raise DataError("cannot normalize an empty dataset")
    full = np.column_stack([d.X, d.y])
    params = NormParams(tuple(d.input_names) + (d.target_name,), full.min(axis=0), full.max(axis=0))
    for name in np.asarray(params.names)[params.constant]:
        logger.warning("column %r is constant; mapped to 0", name)
    return params.normalize(d), params


def split_even_odd(d: Dataset, swap: bool = False) -> tuple[Dataset, Dataset]:
    """Split by record parity: even 0-based positions train, odd ones test.

    ``swap`` exchanges the two halves.
    """
    if len(d) == 0:
        raise DataError("cannot split an empty dataset")
    idx = np.arange(len(d))
    train, test = d.subset(idx[idx % 2 == 0]), d.subset(idx[idx % 2 == 1])
    if swap:
        train, test = test, train
    if len(test) == 0 or len(train) == 0:
        logger.warning("parity split of %d record(s) leaves one side empty", len(d))
    return train, test


def write_csv(path: str | Path, d: Dataset) -> None:
    """Write inputs and target back out in the source column layout."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(d.input_names) + [d.target_name])
        for x, t in zip(d.X, d.y):
            w.writerow([repr(float(v)) for v in x] + [repr(float(t))])
