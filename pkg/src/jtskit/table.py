"""Typed column-oriented tables.

A ``TidyTable`` is a tuple of named columns, each a Python list with
``None`` for missing cells and a declared kind. The representation is
deliberately plain: exports must be byte-reproducible, so formatting is
owned here rather than delegated to a dataframe library.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DuplicateKey, EmptyInput, MissingKeyColumn
from .ods import canonical_number


class ColumnKind(str, Enum):
    TEXT = "text"
    INT = "int"
    FLOAT = "float"
    BOOL = "bool"


_KIND_CHECKS = {
    ColumnKind.TEXT: str,
    ColumnKind.INT: int,
    ColumnKind.FLOAT: float,
    ColumnKind.BOOL: bool,
}


@dataclass(eq=True)
class Column:
    """One named, typed value vector. ``source_name`` keeps the header
    text exactly as it appeared in the sheet."""

    name: str
    kind: ColumnKind
    values: list
    source_name: str = ""

    def __post_init__(self) -> None:
        want = _KIND_CHECKS[self.kind]
        for i, v in enumerate(self.values):
            if v is not None and type(v) is not want:
                raise TypeError(
                    f"column {self.name!r} is {self.kind.value} but row {i} "
                    f"holds {type(v).__name__}"
                )

    def __len__(self) -> int:
        return len(self.values)

    @property
    def null_mask(self) -> list[bool]:
        return [v is None for v in self.values]


@dataclass(frozen=True)
class Provenance:
    """Where a table came from. Never part of table equality."""

    table_code: str | None = None
    sheet_name: str | None = None
    source: str | None = None
    fetched_at: float | None = None


@dataclass(eq=True)
class TidyTable:
    columns: tuple[Column, ...]
    provenance: Provenance = field(default_factory=Provenance, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.columns, tuple):
            object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DuplicateKey(f"duplicate column names: {', '.join(dupes)}")
        lengths = {len(c) for c in self.columns}
        if len(lengths) > 1:
            raise ValueError(f"ragged columns: lengths {sorted(lengths)}")

    # -- shape ----------------------------------------------------------

    @property
    def n_rows(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for col in self.columns:
            if col.name == name:
                return col
        raise MissingKeyColumn(
            f"no column {name!r}; table has: {', '.join(self.column_names)}"
        )

    def select(self, names: Sequence[str]) -> "TidyTable":
        seen = set()
        for n in names:
            if n in seen:
                raise DuplicateKey(f"column {n!r} requested twice")
            seen.add(n)
        return TidyTable(
            tuple(self.column(n) for n in names), provenance=self.provenance
        )

    def rows(self) -> Iterable[tuple]:
        return zip(*(c.values for c in self.columns))

    # -- exports --------------------------------------------------------

    def to_csv(self, path: str | Path | None = None) -> bytes:
        """RFC 4180 text: UTF-8, LF line ends, minimal quoting. Nulls
        are empty fields; floats use the shortest round-trip form."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.column_names)
        formatters = [_FORMATTERS[c.kind] for c in self.columns]
        for row in self.rows():
            writer.writerow(
                "" if v is None else fmt(v) for fmt, v in zip(formatters, row)
            )
        data = buf.getvalue().encode("utf-8")
        if path is not None:
            Path(path).write_bytes(data)
        return data

    def to_columnar(self, path: str | Path) -> None:
        """Parquet with enough field metadata to restore kinds and
        source headers exactly."""
        import pyarrow as pa
        import pyarrow.parquet as pq

        fields = []
        arrays = []
        for col in self.columns:
            arrow_type = _ARROW_TYPES[col.kind]()
            arrays.append(pa.array(col.values, type=arrow_type))
            fields.append(
                pa.field(
                    col.name,
                    arrow_type,
                    metadata={
                        "jtskit_kind": col.kind.value,
                        "jtskit_source_name": col.source_name,
                    },
                )
            )
        meta = {
            "jtskit_provenance": json.dumps(
                {
                    "table_code": self.provenance.table_code,
                    "sheet_name": self.provenance.sheet_name,
                    "source": self.provenance.source,
                    "fetched_at": self.provenance.fetched_at,
                }
            )
        }
        schema = pa.schema(fields, metadata=meta)
        pq.write_table(pa.table(arrays, schema=schema), str(path))


def from_columnar(path: str | Path) -> TidyTable:
    """Read a Parquet file back into a table. Files written by
    ``to_columnar`` round-trip kinds, masks and order; foreign files get
    kinds inferred from their physical types."""
    import pyarrow.parquet as pq

    arrow = pq.read_table(str(path))
    columns = []
    for arrow_field, chunked in zip(arrow.schema, arrow.columns):
        metadata = arrow_field.metadata or {}
        kind_text = metadata.get(b"jtskit_kind", b"").decode()
        kind = _kind_for(kind_text, arrow_field.type)
        values = chunked.to_pylist()
        if kind is ColumnKind.FLOAT:
            values = [None if v is None else float(v) for v in values]
        elif kind is ColumnKind.INT:
            values = [None if v is None else int(v) for v in values]
        columns.append(
            Column(
                name=arrow_field.name,
                kind=kind,
                values=values,
                source_name=metadata.get(b"jtskit_source_name", b"").decode(),
            )
        )
    prov = Provenance()
    schema_meta = arrow.schema.metadata or {}
    if b"jtskit_provenance" in schema_meta:
        raw = json.loads(schema_meta[b"jtskit_provenance"])
        prov = Provenance(**raw)
    return TidyTable(tuple(columns), provenance=prov)


def join(left: TidyTable, right: TidyTable, on: str, how: str = "left") -> TidyTable:
    """Left or inner join on one key column.

    The right side must be unique on the key; a repeated key would
    silently multiply rows, so it is an error instead. Name collisions
    from the right side get a ``_2`` suffix.
    """
    if how not in ("left", "inner"):
        raise ValueError(f"how must be 'left' or 'inner', not {how!r}")
    left_key = left.column(on)
    right_key = right.column(on)

    index: dict = {}
    for row_num, key in enumerate(right_key.values):
        if key is None:
            continue
        if key in index:
            raise DuplicateKey(f"right side has key {key!r} more than once")
        index[key] = row_num

    keep = [
        i
        for i, key in enumerate(left_key.values)
        if how == "left" or (key is not None and key in index)
    ]
    positions = [
        None if left_key.values[i] is None else index.get(left_key.values[i])
        for i in keep
    ]

    taken = set(left.column_names)
    out = [
        Column(c.name, c.kind, [c.values[i] for i in keep], c.source_name)
        for c in left.columns
    ]
    for col in right.columns:
        if col.name == on:
            continue
        name = col.name
        suffix = 2
        while name in taken:
            name = f"{col.name}_{suffix}"
            suffix += 1
        taken.add(name)
        out.append(
            Column(
                name,
                col.kind,
                [None if p is None else col.values[p] for p in positions],
                col.source_name,
            )
        )
    return TidyTable(tuple(out), provenance=left.provenance)


def concat_columns(table: TidyTable, extra: Iterable[Column]) -> TidyTable:
    new = list(table.columns)
    for col in extra:
        if len(col) != table.n_rows:
            raise ValueError(
                f"column {col.name!r} has {len(col)} rows, table has {table.n_rows}"
            )
        new.append(col)
    return TidyTable(tuple(new), provenance=table.provenance)


def require_rows(table: TidyTable, context: str) -> TidyTable:
    if table.n_rows == 0:
        raise EmptyInput(f"{context}: no data rows")
    return table


def with_provenance(table: TidyTable, **fields) -> TidyTable:
    return TidyTable(
        table.columns, provenance=replace(table.provenance, **fields)
    )


_FORMATTERS = {
    ColumnKind.TEXT: str,
    ColumnKind.INT: str,
    ColumnKind.FLOAT: canonical_number,
    ColumnKind.BOOL: lambda v: "true" if v else "false",
}


def _arrow_types():
    import pyarrow as pa

    return {
        ColumnKind.TEXT: pa.string,
        ColumnKind.INT: pa.int64,
        ColumnKind.FLOAT: pa.float64,
        ColumnKind.BOOL: pa.bool_,
    }


class _LazyArrowTypes(dict):
    def __missing__(self, kind):
        self.update(_arrow_types())
        return self[kind]


_ARROW_TYPES: dict = _LazyArrowTypes()


def _kind_for(kind_text: str, arrow_type) -> ColumnKind:
    if kind_text:
        return ColumnKind(kind_text)
    import pyarrow as pa

    if pa.types.is_integer(arrow_type):
        return ColumnKind.INT
    if pa.types.is_floating(arrow_type):
        return ColumnKind.FLOAT
    if pa.types.is_boolean(arrow_type):
        return ColumnKind.BOOL
    return ColumnKind.TEXT
