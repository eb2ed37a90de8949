"""Typed tabular data loaded from delimited text.

A Dataset is immutable after load: columns carry an inferred kind
(continuous or categorical), missing values are normalized to None, and
row indices 0..n_rows-1 are stable for the lifetime of the dataset so
that charts, fits, and selections can all refer to the same rows.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .errors import (
    AllMissingError,
    EmptyDataError,
    ParseError,
    SchemaError,
    UnknownVariableError,
)

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"

#: Case-insensitive markers treated as missing after whitespace trimming.
MISSING_MARKERS = frozenset({"", "na", "null"})

#: A numeric column with at most this many distinct values, all integers,
#: is treated as categorical (so small count variables can be grouped on).
CATEGORICAL_INT_THRESHOLD = 5


def _is_missing(raw: str) -> bool:
    return raw.strip().lower() in MISSING_MARKERS


def _parse_number(raw: str) -> float | None:
    """Return the finite float value of raw, or None if it is not one."""
    try:
        value = float(raw)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def infer_kind(raw_values: list[str]) -> str:
    """Infer the kind of a column from its raw string values.

    Anything non-numeric is categorical. A numeric column is categorical
    only when it looks like an integer code: at most
    CATEGORICAL_INT_THRESHOLD distinct values, all integral, with at least
    one repeated value (so tiny all-unique numeric columns stay
    continuous). Order of rows does not matter.
    """
    present = [v.strip() for v in raw_values if not _is_missing(v)]
    if not present:
        raise AllMissingError("column has no non-missing values")
    numbers = []
    for raw in present:
        value = _parse_number(raw)
        if value is None:
            return CATEGORICAL
        numbers.append(value)
    distinct = set(numbers)
    if (
        len(distinct) <= CATEGORICAL_INT_THRESHOLD
        and len(distinct) < len(numbers)
        and all(v == int(v) for v in distinct)
    ):
        return CATEGORICAL
    return CONTINUOUS


@dataclass(frozen=True)
class Column:
    """One dataset column.

    values holds float-or-None for continuous columns and label-or-None
    for categorical columns. levels is the lexicographically sorted set of
    distinct non-missing labels (categorical only, else empty).
    """

    name: str
    kind: str
    values: tuple
    levels: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise ValueError(f"unknown column kind {self.kind!r}")

    @property
    def n_missing(self) -> int:
        return sum(1 for v in self.values if v is None)


@dataclass(frozen=True)
class Dataset:
    """Immutable table of named, typed columns with stable row indices."""

    columns: tuple[Column, ...]
    n_rows: int
    source_name: str = ""

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        for col in self.columns:
            if len(col.values) != self.n_rows:
                raise SchemaError(
                    f"column {col.name!r} has {len(col.values)} values, "
                    f"expected {self.n_rows}"
                )

    def column(self, name: str) -> Column:
        for col in self.columns:
            if col.name == name:
                return col
        raise UnknownVariableError(f"unknown variable {name!r}")

    def has_column(self, name: str) -> bool:
        return any(col.name == name for col in self.columns)

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def schema_summary(self) -> list[dict]:
        """Compact per-column description used in prompts and payloads."""
        out = []
        for col in self.columns:
            entry = {"name": col.name, "kind": col.kind}
            if col.kind == CATEGORICAL:
                entry["levels"] = list(col.levels)
            out.append(entry)
        return out


def _make_column(name: str, raw_values: list[str], kind: str | None) -> Column:
    if kind is None:
        kind = infer_kind(raw_values)
    elif kind not in (CONTINUOUS, CATEGORICAL):
        raise SchemaError(f"invalid kind override {kind!r} for column {name!r}")
    if kind == CONTINUOUS:
        values = []
        for i, raw in enumerate(raw_values):
            if _is_missing(raw):
                values.append(None)
                continue
            value = _parse_number(raw.strip())
            if value is None:
                raise ParseError(
                    f"column {name!r}: value {raw.strip()!r} at data row "
                    f"{i + 1} is not numeric",
                    row=i + 1,
                )
            values.append(value)
        return Column(name=name, kind=kind, values=tuple(values))
    labels = tuple(None if _is_missing(raw) else raw.strip() for raw in raw_values)
    levels = tuple(sorted({v for v in labels if v is not None}))
    return Column(name=name, kind=kind, values=labels, levels=levels)


def load_csv(
    text: str | bytes,
    delimiter: str = ",",
    source_name: str = "",
    kind_overrides: dict[str, str] | None = None,
) -> Dataset:
    """Parse RFC-4180-style delimited text into a typed Dataset.

    The first row is the header. Kind inference can be corrected per column
    via kind_overrides ({column name: "continuous"|"categorical"}).
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDataError("input is empty") from None
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise SchemaError(f"duplicate header names: {', '.join(dupes)}")

    rows = []
    for i, row in enumerate(reader):
        if not row:
            continue  # blank trailing line
        if len(row) != len(header):
            raise ParseError(
                f"row {i + 1} has {len(row)} fields, expected {len(header)}",
                row=i + 1,
            )
        rows.append(row)
    if not rows:
        raise EmptyDataError("no data rows")

    overrides = kind_overrides or {}
    unknown = set(overrides) - set(header)
    if unknown:
        raise SchemaError(f"kind override for unknown column(s): {sorted(unknown)}")

    columns = []
    for j, name in enumerate(header):
        raw = [row[j] for row in rows]
        columns.append(_make_column(name, raw, overrides.get(name)))
    return Dataset(columns=tuple(columns), n_rows=len(rows), source_name=source_name)


def to_csv(dataset: Dataset, delimiter: str = ",") -> str:
    """Serialize a Dataset back to delimited text (round-trip safe)."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(dataset.column_names)
    for i in range(dataset.n_rows):
        row = []
        for col in dataset.columns:
            v = col.values[i]
            if v is None:
                row.append("")
            elif col.kind == CONTINUOUS:
                row.append(repr(v))
            else:
                row.append(v)
        writer.writerow(row)
    return buf.getvalue()


def complete_cases(dataset: Dataset, variables: list[str]) -> list[int]:
    """Row indices where every listed variable is non-missing, ascending.

    An empty variable list keeps every row.
    """
    cols = [dataset.column(name) for name in variables]
    return [
        i
        for i in range(dataset.n_rows)
        if all(col.values[i] is not None for col in cols)
    ]
