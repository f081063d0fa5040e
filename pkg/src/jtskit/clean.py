"""Raw grid to typed table.

The pipeline is: find the header row, swap sentinel placeholders for
their numeric stand-ins, then coerce each column to the narrowest kind
that fits every value. All of it is deterministic; nothing here looks at
the network or the clock.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import ceil

from .errors import NoHeader, ShapeMismatch
from .ods import Cell, CellGrid, CellKind
from .registry import SentinelRule, TableSpec
from .table import Column, ColumnKind, Provenance, TidyTable

_NON_WORD_RE = re.compile(r"\W+")
_GROUPED_NUMBER_RE = re.compile(r"[+-]?\d{1,3}(?:,\d{3})+(?:\.\d+)?")
_INT64_MAX = 2**63


def normalize_name(source: str) -> str:
    """Header text to snake_case: ``"Average travel time (minutes)"``
    becomes ``average_travel_time_minutes``."""
    return _NON_WORD_RE.sub("_", source.casefold()).strip("_")


def numeric_from_text(text: str) -> float | None:
    """Parse a cell's text as a number, accepting ``1,234`` style
    thousands grouping. Returns None when it is not numeric."""
    t = text.strip()
    if not t:
        return None
    if _GROUPED_NUMBER_RE.fullmatch(t):
        t = t.replace(",", "")
    try:
        value = float(t)
    except ValueError:
        return None
    return value if value == value and abs(value) != float("inf") else None


@dataclass(frozen=True)
class HeaderResolution:
    """Which row is the header and what the columns are called."""

    row_index: int
    names: list[str]
    source_names: list[str]
    detected: bool  # False when the catalog pinned the row


def detect_header(grid: CellGrid, header_row: int | None = None) -> HeaderResolution:
    """Locate the header row.

    With ``header_row`` given (0-based) it is taken on faith, range
    permitting. Otherwise the first row that looks like labels wins: at
    least half its cells filled, all of them text, none of them numeric
    in disguise. Title and note rows fail the fill test, data rows fail
    the all-text test.
    """
    if header_row is not None:
        if not 0 <= header_row < grid.n_rows:
            raise NoHeader(
                f"header row {header_row} out of range, sheet has {grid.n_rows} rows",
                sheet=grid.sheet_name,
            )
        return _resolve_names(grid, header_row, detected=False)

    threshold = max(1, ceil(grid.width / 2))
    for index, row in enumerate(grid.rows):
        filled = [c for c in row if not c.is_empty]
        if len(filled) < threshold:
            continue
        if all(
            c.kind is CellKind.TEXT and numeric_from_text(c.text_value) is None
            for c in filled
        ):
            return _resolve_names(grid, index, detected=True)
    raise NoHeader("no row looks like a header", sheet=grid.sheet_name)


def _resolve_names(grid: CellGrid, row_index: int, detected: bool) -> HeaderResolution:
    row = grid.rows[row_index]
    source_names = [row[i].text_value if i < len(row) else "" for i in range(grid.width)]
    names: list[str] = []
    used: set[str] = set()
    for position, source in enumerate(source_names):
        base = normalize_name(source) or f"column_{position + 1}"
        candidate = base
        suffix = 2
        while candidate in used:
            candidate = f"{base}_{suffix}"
            suffix += 1
        used.add(candidate)
        names.append(candidate)
    return HeaderResolution(row_index, names, source_names, detected)


def apply_sentinels(
    grid: CellGrid,
    rules: tuple[SentinelRule, ...],
    header: HeaderResolution,
) -> CellGrid:
    """Replace placeholder cells below the header with their numeric
    stand-ins. A rule fires when the whole cell text equals its pattern
    and its column scope matches; the first matching rule wins.

    Rows without any match are reused, not copied.
    """
    if not rules:
        return grid
    patterns = {r.pattern for r in rules}
    # per column, the ordered rules whose scope covers it
    by_column = [
        [r for r in rules if r.applies_to_column(name)] for name in header.names
    ]
    replaced: dict[tuple[int, str], Cell] = {}

    def substitute(column: int, cell: Cell) -> Cell:
        key = (column, cell.text_value)
        hit = replaced.get(key)
        if hit is None:
            for rule in by_column[column] if column < len(by_column) else ():
                if rule.pattern == cell.text_value:
                    hit = Cell.number(rule.replacement)
                    break
            else:
                hit = cell
            replaced[key] = hit
        return hit

    out_rows = list(grid.rows)
    for row_num in range(header.row_index + 1, len(out_rows)):
        row = out_rows[row_num]
        if any(c.kind is CellKind.TEXT and c.text_value in patterns for c in row):
            out_rows[row_num] = [
                substitute(i, c)
                if c.kind is CellKind.TEXT and c.text_value in patterns
                else c
                for i, c in enumerate(row)
            ]
    return CellGrid(sheet_name=grid.sheet_name, rows=out_rows, width=grid.width)


def coerce_types(
    grid: CellGrid, header: HeaderResolution
) -> TidyTable:
    """Bind each column below the header to its narrowest kind.

    Order of preference: bool (all boolean cells), int (every value
    integral, in int64 range, never written with a decimal point),
    float (all numeric), else text. Dates keep their ISO text. Empty
    cells become nulls in every kind.
    """
    data_rows = [
        row + [_EMPTY] * (grid.width - len(row))
        for row in grid.rows[header.row_index + 1 :]
    ]
    columns = []
    for position, cells in enumerate(zip(*data_rows) if data_rows else []):
        columns.append(
            _coerce_column(list(cells), header.names[position], header.source_names[position])
        )
    if not data_rows:
        columns = [
            Column(name, ColumnKind.TEXT, [], source)
            for name, source in zip(header.names, header.source_names)
        ]
    return TidyTable(tuple(columns))


_EMPTY = Cell.empty()


def _coerce_column(cells: list[Cell], name: str, source_name: str) -> Column:
    saw_value = False
    all_bool = True
    all_number = True
    int_ok = True
    for cell in cells:
        kind = cell.kind
        if kind is CellKind.EMPTY:
            continue
        saw_value = True
        if kind is CellKind.BOOLEAN:
            all_number = False
            continue
        all_bool = False
        if kind is CellKind.NUMBER:
            if int_ok:
                value = cell.numeric_value
                if not (value.is_integer() and abs(value) < _INT64_MAX):
                    int_ok = False
        elif kind is CellKind.TEXT and all_number:
            value = numeric_from_text(cell.text_value)
            if value is None:
                all_number = False
            elif int_ok and (
                "." in cell.text_value
                or "e" in cell.text_value
                or "E" in cell.text_value
                or not (value.is_integer() and abs(value) < _INT64_MAX)
            ):
                int_ok = False
        else:  # DATE, or already demoted
            all_number = False
        if not all_number and not all_bool:
            break

    if not saw_value:
        return Column(name, ColumnKind.TEXT, [None] * len(cells), source_name)
    if all_bool:
        values = [
            None if c.kind is CellKind.EMPTY else c.text_value == "TRUE" for c in cells
        ]
        return Column(name, ColumnKind.BOOL, values, source_name)
    if all_number:
        if int_ok:
            values = [_int_value(c) for c in cells]
            return Column(name, ColumnKind.INT, values, source_name)
        values = [_float_value(c) for c in cells]
        return Column(name, ColumnKind.FLOAT, values, source_name)
    text_values = [None if c.kind is CellKind.EMPTY else c.text_value for c in cells]
    return Column(name, ColumnKind.TEXT, text_values, source_name)


def _int_value(cell: Cell) -> int | None:
    if cell.kind is CellKind.EMPTY:
        return None
    if cell.numeric_value is not None:
        return int(cell.numeric_value)
    return int(numeric_from_text(cell.text_value))


def _float_value(cell: Cell) -> float | None:
    if cell.kind is CellKind.EMPTY:
        return None
    if cell.numeric_value is not None:
        return cell.numeric_value
    return numeric_from_text(cell.text_value)


def clean(grid: CellGrid, spec: TableSpec | None = None) -> TidyTable:
    """Full grid-to-table pass for one sheet.

    With a catalog entry: check the raw shape when one is on record,
    honour its pinned header row, apply its sentinel rules. Without one,
    header detection is heuristic and no sentinels apply.
    """
    if spec is not None:
        expected = spec.expected_shape.get(grid.sheet_name)
        if expected is not None and expected != (grid.n_rows, grid.width):
            raise ShapeMismatch(
                f"expected {expected[0]} rows x {expected[1]} cols, "
                f"found {grid.n_rows} rows x {grid.width} cols",
                sheet=grid.sheet_name,
            )
    header = detect_header(grid, spec.header_row if spec is not None else None)
    prepared = apply_sentinels(grid, spec.sentinel_rules if spec is not None else (), header)
    table = coerce_types(prepared, header)
    return TidyTable(
        table.columns,
        provenance=Provenance(
            table_code=spec.table_code if spec is not None else None,
            sheet_name=grid.sheet_name,
        ),
    )
