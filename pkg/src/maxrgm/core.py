"""Domain types: DMUs, datasets, trade-off directions and technologies."""

from __future__ import annotations

import csv
import enum
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from maxrgm.errors import (
    DataError,
    DimensionMismatch,
    DuplicateName,
    EmptyDataset,
    NegativeValue,
    NonFiniteValue,
    ZeroVector,
)

FloatArray = NDArray[np.float64]


class Rts(enum.Enum):
    """Returns-to-scale regime of a technology."""

    VRS_TO = "vrs"
    CRS = "crs"


def _frozen_vector(values: Iterable[float]) -> FloatArray:
    arr = np.array(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.float64)
    arr = arr.reshape(-1).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dmu:
    """One observed decision-making unit.

    ``id`` is 1-based; ``x`` holds the m inputs and ``y`` the s outputs.
    """

    id: int
    name: str
    x: FloatArray
    y: FloatArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _frozen_vector(self.x))
        object.__setattr__(self, "y", _frozen_vector(self.y))
        for label, vec in (("x", self.x), ("y", self.y)):
            if not np.all(np.isfinite(vec)):
                raise NonFiniteValue(f"DMU {self.name!r}: non-finite value in {label}")
            if np.any(vec < 0):
                raise NegativeValue(f"DMU {self.name!r}: negative value in {label}")
            if vec.size == 0 or not np.any(vec > 0):
                raise ZeroVector(f"DMU {self.name!r}: {label} is the zero vector")

    @classmethod
    def point(cls, x: Sequence[float], y: Sequence[float], name: str = "point") -> Dmu:
        """A synthetic unit (id 0) for assessing an arbitrary input-output point."""
        return cls(0, name, np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    @property
    def m(self) -> int:
        return self.x.size

    @property
    def s(self) -> int:
        return self.y.size

    def __repr__(self) -> str:
        return f"Dmu({self.id}, {self.name!r}, x={self.x.tolist()}, y={self.y.tolist()})"


@dataclass(frozen=True, eq=False)
class Dataset:
    m: int
    s: int
    dmus: tuple[Dmu, ...]
    input_labels: tuple[str, ...] = ()
    output_labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "dmus", tuple(self.dmus))
        if not self.dmus:
            raise EmptyDataset("dataset has no DMUs")
        seen: set[str] = set()
        for k, d in enumerate(self.dmus, start=1):
            if d.id != k:
                raise DataError(f"DMU ids must be 1..n in order; got {d.id} at position {k}")
            if d.m != self.m or d.s != self.s:
                raise DimensionMismatch(f"DMU {d.name!r} has shape ({d.m}, {d.s}), expected ({self.m}, {self.s})")
            if d.name in seen:
                raise DuplicateName(f"duplicate DMU name {d.name!r}")
            seen.add(d.name)
        if not self.input_labels:
            object.__setattr__(self, "input_labels", tuple(f"x{i + 1}" for i in range(self.m)))
        if not self.output_labels:
            object.__setattr__(self, "output_labels", tuple(f"y{r + 1}" for r in range(self.s)))
        X = np.column_stack([d.x for d in self.dmus])
        Y = np.column_stack([d.y for d in self.dmus])
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "_X", X)
        object.__setattr__(self, "_Y", Y)

    @property
    def n(self) -> int:
        return len(self.dmus)

    @property
    def X(self) -> FloatArray:
        """Inputs as an (m, n) matrix; column j is DMU j+1."""
        return self._X  # type: ignore[attr-defined]

    @property
    def Y(self) -> FloatArray:
        return self._Y  # type: ignore[attr-defined]

    def __getitem__(self, dmu_id: int) -> Dmu:
        """Look up a DMU by its 1-based id."""
        if not 1 <= dmu_id <= self.n:
            raise KeyError(dmu_id)
        return self.dmus[dmu_id - 1]

    def __iter__(self):
        return iter(self.dmus)

    def __len__(self) -> int:
        return self.n

    @classmethod
    def from_arrays(
        cls,
        X: Sequence[Sequence[float]],
        Y: Sequence[Sequence[float]],
        names: Sequence[str] | None = None,
    ) -> Dataset:
        """Build from (m, n) input and (s, n) output matrices."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if X.shape[1] != Y.shape[1]:
            raise DimensionMismatch("X and Y disagree on the number of DMUs")
        names = list(names) if names is not None else [f"DMU{j + 1}" for j in range(X.shape[1])]
        dmus = [Dmu(j + 1, names[j], X[:, j], Y[:, j]) for j in range(X.shape[1])]
        return cls(X.shape[0], Y.shape[0], tuple(dmus))

    def scaled(self, input_factors: Sequence[float] | None = None, output_factors: Sequence[float] | None = None) -> Dataset:
        """Copy with every input row i multiplied by ``input_factors[i]`` (likewise outputs)."""
        a = np.ones(self.m) if input_factors is None else np.asarray(input_factors, dtype=float)
        b = np.ones(self.s) if output_factors is None else np.asarray(output_factors, dtype=float)
        dmus = tuple(Dmu(d.id, d.name, d.x * a, d.y * b) for d in self.dmus)
        return Dataset(self.m, self.s, dmus, self.input_labels, self.output_labels)


@dataclass(frozen=True, eq=False)
class TradeoffColumn:
    r_minus: FloatArray
    r_plus: FloatArray
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "r_minus", _frozen_vector(self.r_minus))
        object.__setattr__(self, "r_plus", _frozen_vector(self.r_plus))
        if not (np.all(np.isfinite(self.r_minus)) and np.all(np.isfinite(self.r_plus))):
            raise NonFiniteValue(f"trade-off column {self.label!r} has non-finite entries")


@dataclass(frozen=True, eq=False)
class TradeoffSpec:
    """K trade-off directions (r_minus_t, r_plus_t); entries may be negative."""

    m: int
    s: int
    columns: tuple[TradeoffColumn, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        for col in self.columns:
            if col.r_minus.size != self.m or col.r_plus.size != self.s:
                raise DimensionMismatch(f"trade-off column {col.label!r} does not match (m, s) = ({self.m}, {self.s})")
        if self.columns:
            Rm = np.column_stack([c.r_minus for c in self.columns])
            Rp = np.column_stack([c.r_plus for c in self.columns])
        else:
            Rm = np.zeros((self.m, 0))
            Rp = np.zeros((self.s, 0))
        Rm.setflags(write=False)
        Rp.setflags(write=False)
        object.__setattr__(self, "_Rm", Rm)
        object.__setattr__(self, "_Rp", Rp)

    @classmethod
    def empty(cls, m: int, s: int) -> TradeoffSpec:
        return cls(m, s, ())

    @classmethod
    def from_matrices(cls, R_minus, R_plus, labels: Sequence[str] | None = None) -> TradeoffSpec:
        R_minus = np.asarray(R_minus, dtype=float)
        R_plus = np.asarray(R_plus, dtype=float)
        if R_minus.ndim != 2 or R_plus.ndim != 2 or R_minus.shape[1] != R_plus.shape[1]:
            raise DimensionMismatch("R_minus and R_plus must be 2-D with equal column counts")
        k = R_minus.shape[1]
        labels = list(labels) if labels is not None else [str(t + 1) for t in range(k)]
        cols = tuple(TradeoffColumn(R_minus[:, t], R_plus[:, t], labels[t]) for t in range(k))
        return cls(R_minus.shape[0], R_plus.shape[0], cols)

    @property
    def K(self) -> int:
        return len(self.columns)

    @property
    def R_minus(self) -> FloatArray:
        return self._Rm  # type: ignore[attr-defined]

    @property
    def R_plus(self) -> FloatArray:
        return self._Rp  # type: ignore[attr-defined]

    def scaled(self, input_factors=None, output_factors=None) -> TradeoffSpec:
        a = np.ones(self.m) if input_factors is None else np.asarray(input_factors, dtype=float)
        b = np.ones(self.s) if output_factors is None else np.asarray(output_factors, dtype=float)
        cols = tuple(TradeoffColumn(c.r_minus * a, c.r_plus * b, c.label) for c in self.columns)
        return TradeoffSpec(self.m, self.s, cols)


@dataclass(frozen=True, eq=False)
class Technology:
    """Dataset, trade-off directions and returns-to-scale regime.

    Under ``Rts.CRS`` the trade-offs must be empty; the conical hull of the
    observations is used directly.
    """

    dataset: Dataset
    tradeoffs: TradeoffSpec = field(default=None)  # type: ignore[assignment]
    rts: Rts = Rts.VRS_TO

    def __post_init__(self) -> None:
        if self.tradeoffs is None:
            object.__setattr__(self, "tradeoffs", TradeoffSpec.empty(self.dataset.m, self.dataset.s))
        if (self.tradeoffs.m, self.tradeoffs.s) != (self.dataset.m, self.dataset.s):
            raise DimensionMismatch("trade-off dimensions do not match the dataset")
        if self.rts is Rts.CRS and self.tradeoffs.K:
            raise DataError("CRS technology takes no trade-off columns")

    @property
    def m(self) -> int:
        return self.dataset.m

    @property
    def s(self) -> int:
        return self.dataset.s

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def K(self) -> int:
        return self.tradeoffs.K

    def generators(self) -> tuple[FloatArray, FloatArray]:
        """Column blocks [X | R_minus] and [Y | R_plus] multiplying (lambda, pi)."""
        return (
            np.hstack([self.dataset.X, self.tradeoffs.R_minus]),
            np.hstack([self.dataset.Y, self.tradeoffs.R_plus]),
        )

    def scaled(self, input_factors=None, output_factors=None) -> Technology:
        """Unit change: rescale data rows and trade-off rows consistently."""
        return Technology(
            self.dataset.scaled(input_factors, output_factors),
            self.tradeoffs.scaled(input_factors, output_factors),
            self.rts,
        )


@dataclass(frozen=True)
class IndexSets:
    """Coordinates with strictly positive entries (0-based)."""

    i_plus_x: frozenset[int]
    i_plus_y: frozenset[int]


def index_sets(dmu: Dmu) -> IndexSets:
    return IndexSets(
        frozenset(int(i) for i in np.flatnonzero(dmu.x > 0.0)),
        frozenset(int(r) for r in np.flatnonzero(dmu.y > 0.0)),
    )


def _parse_number(text: str, where: str) -> float:
    try:
        value = float(text.strip())
    except ValueError as exc:
        raise DataError(f"{where}: cannot parse {text!r} as a number") from exc
    if not math.isfinite(value):
        raise NonFiniteValue(f"{where}: non-finite value {text!r}")
    return value


def validate_dataset(raw: Sequence[Mapping[str, str]] | Sequence[Sequence[str]], header: Sequence[str] | None = None) -> Dataset:
    """Validate a parsed table and build a :class:`Dataset`.

    ``raw`` is either a list of dict rows (csv.DictReader style) or a list of
    string rows together with ``header``. Columns are ``dmu``, ``name``, then
    ``x_*`` input columns followed by ``y_*`` output columns; m and s are
    inferred from those prefixes.
    """
    rows = list(raw)
    if rows and isinstance(rows[0], Mapping):
        header = list(rows[0].keys())
        rows = [[r[h] for h in header] for r in rows]  # type: ignore[index]
    if header is None:
        raise DataError("a header is required")
    header = [h.strip() for h in header]
    if len(header) < 4 or header[0].lower() != "dmu" or header[1].lower() != "name":
        raise DataError("header must start with 'dmu,name'")
    x_cols = [k for k, h in enumerate(header) if h.startswith("x_")]
    y_cols = [k for k, h in enumerate(header) if h.startswith("y_")]
    if not x_cols or not y_cols or x_cols + y_cols != list(range(2, len(header))):
        raise DataError("expected x_<label> columns followed by y_<label> columns")
    if not rows:
        raise EmptyDataset("dataset has no rows")
    dmus = []
    for k, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise DataError(f"row {k}: expected {len(header)} fields, got {len(row)}")
        where = f"row {k}"
        dmu_id = int(_parse_number(row[0], where))
        if dmu_id != k:
            raise DataError(f"{where}: dmu id {row[0]!r} out of order (expected {k})")
        x = [_parse_number(row[c], where) for c in x_cols]
        y = [_parse_number(row[c], where) for c in y_cols]
        dmus.append(Dmu(k, row[1].strip(), np.array(x), np.array(y)))
    return Dataset(
        len(x_cols),
        len(y_cols),
        tuple(dmus),
        tuple(header[c][2:] for c in x_cols),
        tuple(header[c][2:] for c in y_cols),
    )


def read_dataset_csv(path: str | Path) -> Dataset:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise EmptyDataset(f"{path}: empty file") from None
            rows = [r for r in reader if r]
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return validate_dataset(rows, header)


def write_dataset_csv(dataset: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dmu", "name", *(f"x_{l}" for l in dataset.input_labels), *(f"y_{l}" for l in dataset.output_labels)])
        for d in dataset:
            w.writerow([d.id, d.name, *(repr(float(v)) for v in d.x), *(repr(float(v)) for v in d.y)])
