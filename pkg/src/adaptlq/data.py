"""Data containers, CSV ingestion and the seeded random-stream contract."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError

_MASK64 = (1 << 64) - 1


def _as_matrix(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DataError(f"expected a 2-d matrix, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DataError("matrix must have at least one row and one column")
    if not np.all(np.isfinite(arr)):
        raise DataError("matrix contains NaN or Inf")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    """Immutable n x p observation matrix; rows are observations."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_matrix(self.values))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class PairedSample:
    """Covariates X (n x p) paired with a response vector y of length n."""

    covariates: SampleMatrix
    response: np.ndarray

    def __post_init__(self):
        if not isinstance(self.covariates, SampleMatrix):
            object.__setattr__(self, "covariates", SampleMatrix(self.covariates))
        y = np.array(self.response, dtype=np.float64, copy=True).reshape(-1)
        if y.shape[0] != self.covariates.n:
            raise DataError(
                f"response length {y.shape[0]} != covariate rows {self.covariates.n}")
        if not np.all(np.isfinite(y)):
            raise DataError("response contains NaN or Inf")
        y.setflags(write=False)
        object.__setattr__(self, "response", y)

    @property
    def n(self) -> int:
        return self.covariates.n

    @property
    def p(self) -> int:
        return self.covariates.p


@dataclass(frozen=True, eq=False)
class TwoSampleData:
    first: SampleMatrix
    second: SampleMatrix

    def __post_init__(self):
        for name in ("first", "second"):
            val = getattr(self, name)
            if not isinstance(val, SampleMatrix):
                object.__setattr__(self, name, SampleMatrix(val))
        if self.first.p != self.second.p:
            raise DataError(
                f"samples differ in column count: {self.first.p} vs {self.second.p}")

    @property
    def n(self) -> int:
        return self.first.n

    @property
    def m(self) -> int:
        return self.second.n

    @property
    def p(self) -> int:
        return self.first.p


def load_csv(path, has_header: bool = False) -> SampleMatrix:
    """Read a comma-separated numeric file into a SampleMatrix.

    Row and column numbers in error messages are 1-based and count data rows
    only (the skipped header is not counted).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    rows: list[list[float]] = []
    width = None
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if has_header:
            next(reader, None)
        for r, raw in enumerate(reader, start=1):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            row = []
            for c, cell in enumerate(raw, start=1):
                try:
                    val = float(cell)
                except ValueError:
                    raise DataError(
                        f"cannot parse {cell!r} at row {r} column {c}") from None
                if not math.isfinite(val):
                    raise DataError(f"non-finite value at row {r} column {c}")
                row.append(val)
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataError(f"ragged row {r}: {len(row)} columns, expected {width}")
            rows.append(row)
    if not rows:
        raise DataError("empty input")
    return SampleMatrix(np.array(rows))


def write_csv(path, data: SampleMatrix, header: list[str] | None = None) -> None:
    # repr() of a Python float round-trips exactly
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for row in data.values:
            writer.writerow([repr(float(v)) for v in row])


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class SeedSpec:
    """Key of a Philox counter-based stream: (master_seed, stream_id)."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= int(v) <= _MASK64:
                raise DataError(f"{name} must be a 64-bit unsigned integer, got {v}")
            object.__setattr__(self, name, int(v))

    def generator(self) -> np.random.Generator:
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def derive_stream(seed: SeedSpec, index: int) -> SeedSpec:
    """Child stream number `index` of `seed`.

    The child id is splitmix64(splitmix64(stream_id) + index). splitmix64 is a
    bijection on 64-bit words, so distinct indices always give distinct keys.
    """
    if index < 0:
        raise DataError("stream index must be nonnegative")
    base = _splitmix64(seed.stream_id)
    return SeedSpec(seed.master_seed, _splitmix64((base + index) & _MASK64))
