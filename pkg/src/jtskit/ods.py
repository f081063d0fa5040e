"""OpenDocument Spreadsheet ingestion.

An ``.ods`` file is a ZIP archive whose ``content.xml`` entry holds every
sheet.  Runs of identical cells and rows are stored once with
``number-columns-repeated`` / ``number-rows-repeated`` attributes, so the
parser's main job is to expand those runs into logical cells without also
materialising the enormous all-empty padding that office suites append to
each row.  Cells are typed at parse time from the ``office:value-type``
attribute; display text for numbers is recomputed canonically so that a
grid is a pure function of the file's values, not its formatting.

Only reading is supported.  Formulas, styles and encrypted documents are
ignored or rejected; a minimal writer lives in the test suite as a fixture
generator.
"""

from __future__ import annotations

import csv
import io
import os
import zipfile
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator
from xml.etree import ElementTree

from .errors import MalformedDocument, UnknownSheet

TABLE_NS = "urn:oasis:names:tc:opendocument:xmlns:table:1.0"
OFFICE_NS = "urn:oasis:names:tc:opendocument:xmlns:office:1.0"
TEXT_NS = "urn:oasis:names:tc:opendocument:xmlns:text:1.0"

_TABLE_TAG = f"{{{TABLE_NS}}}table"
_ROW_TAG = f"{{{TABLE_NS}}}table-row"
_CELL_TAG = f"{{{TABLE_NS}}}table-cell"
_COVERED_TAG = f"{{{TABLE_NS}}}covered-table-cell"
_NAME_ATTR = f"{{{TABLE_NS}}}name"
_COLS_REPEATED = f"{{{TABLE_NS}}}number-columns-repeated"
_ROWS_REPEATED = f"{{{TABLE_NS}}}number-rows-repeated"
_VALUE_TYPE = f"{{{OFFICE_NS}}}value-type"
_VALUE = f"{{{OFFICE_NS}}}value"
_BOOL_VALUE = f"{{{OFFICE_NS}}}boolean-value"
_DATE_VALUE = f"{{{OFFICE_NS}}}date-value"
_TIME_VALUE = f"{{{OFFICE_NS}}}time-value"
_STRING_VALUE = f"{{{OFFICE_NS}}}string-value"
_P_TAG = f"{{{TEXT_NS}}}p"
_S_TAG = f"{{{TEXT_NS}}}s"
_TAB_TAG = f"{{{TEXT_NS}}}tab"
_BREAK_TAG = f"{{{TEXT_NS}}}line-break"
_SPACE_COUNT = f"{{{TEXT_NS}}}c"

SPREADSHEET_MIMETYPE = "application/vnd.oasis.opendocument.spreadsheet"
CONTENT_ENTRY = "content.xml"

# Expansion guards: a repeat run that would blow past these after
# trailing-trim indicates a hostile or broken file, not real data.
MAX_ROW_CELLS = 1_000_000
MAX_SHEET_ROWS = 2_000_000


def canonical_number(value: float) -> str:
    """Shortest decimal text that parses back to exactly ``value``.

    Integral values drop the trailing ``.0`` (``240.0`` -> ``"240"``).
    """
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError("non-finite numbers have no canonical text")
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


class CellKind(Enum):
    EMPTY = "empty"
    TEXT = "text"
    NUMBER = "number"
    BOOLEAN = "boolean"
    DATE = "date"


@dataclass(frozen=True, slots=True)
class Cell:
    """One logical spreadsheet cell.

    ``text_value`` is always present (empty string for empty cells); for
    number cells it is the canonical rendering of ``numeric_value``.
    """

    kind: CellKind
    text_value: str = ""
    numeric_value: float | None = None

    @staticmethod
    def empty() -> "Cell":
        return _EMPTY_CELL

    @staticmethod
    def text(value: str) -> "Cell":
        if value == "":
            return _EMPTY_CELL
        return Cell(CellKind.TEXT, value)

    @staticmethod
    def number(value: float) -> "Cell":
        value = float(value)
        return Cell(CellKind.NUMBER, canonical_number(value), value)

    @staticmethod
    def boolean(value: bool) -> "Cell":
        return Cell(CellKind.BOOLEAN, "TRUE" if value else "FALSE")

    @staticmethod
    def date(iso_text: str) -> "Cell":
        return Cell(CellKind.DATE, iso_text)

    @property
    def is_empty(self) -> bool:
        return self.kind is CellKind.EMPTY


_EMPTY_CELL = Cell(CellKind.EMPTY)


@dataclass(frozen=True)
class CellGrid:
    """Rectangular cell grid for one sheet.

    Rows are trimmed at their last non-empty cell and trailing all-empty
    rows are dropped, so rows may be ragged; ``width`` is the maximum
    logical row length.
    """

    sheet_name: str
    rows: list[list[Cell]]
    width: int

    @classmethod
    def from_rows(cls, sheet_name: str, rows: list[list[Cell]]) -> "CellGrid":
        width = max((len(r) for r in rows), default=0)
        return cls(sheet_name, rows, width)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def padded_rows(self) -> Iterator[list[Cell]]:
        """Rows padded with empty cells out to ``width``."""
        for row in self.rows:
            if len(row) < self.width:
                yield row + [_EMPTY_CELL] * (self.width - len(row))
            else:
                yield row


@dataclass(frozen=True)
class OdsDocument:
    """A validated ODS container; sheets are parsed on demand."""

    sheet_names: list[str]
    source: str
    _content: bytes = field(repr=False)


def open_ods(source) -> OdsDocument:
    """Open an ODS workbook from a path, bytes, or binary stream.

    Validates the ZIP container, the presence of ``content.xml``, the
    declared mimetype (when present) and the well-formedness of the
    content XML, and reads the sheet names in file order.

    Raises:
        MalformedDocument: the file cannot serve as a release artifact.
    """
    label, data = _read_source(source)
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise MalformedDocument(f"not a ZIP archive ({exc})", source=label) from None

    with archive:
        names = set(archive.namelist())
        if CONTENT_ENTRY not in names:
            raise MalformedDocument("missing content entry content.xml", source=label)
        if "mimetype" in names:
            declared = archive.read("mimetype").decode("utf-8", "replace").strip()
            if declared and declared != SPREADSHEET_MIMETYPE:
                raise MalformedDocument(
                    f"mimetype is {declared!r}, expected a spreadsheet", source=label)
        content = archive.read(CONTENT_ENTRY)

    sheet_names: list[str] = []
    try:
        for event, elem in ElementTree.iterparse(io.BytesIO(content), events=("start", "end")):
            if event == "start" and elem.tag == _TABLE_TAG:
                name = elem.get(_NAME_ATTR, "")
                if not name:
                    raise MalformedDocument("sheet with empty name", source=label)
                if name in sheet_names:
                    raise MalformedDocument(f"duplicate sheet name {name!r}", source=label)
                sheet_names.append(name)
            elif event == "end":
                elem.clear()
    except ElementTree.ParseError as exc:
        raise MalformedDocument(f"content XML not well-formed ({exc})", source=label) from None

    return OdsDocument(sheet_names=sheet_names, source=label, _content=content)


def parse_sheet(doc: OdsDocument, name: str) -> CellGrid:
    """Expand one sheet of ``doc`` into a :class:`CellGrid`.

    Repeated cells and rows are expanded into logical positions; covered
    (merged-away) cells come back empty; trailing empty runs are trimmed.

    Raises:
        UnknownSheet: ``name`` is not in ``doc.sheet_names``.
        MalformedDocument: structure errors inside the sheet.
    """
    if name not in doc.sheet_names:
        raise UnknownSheet(
            f"sheet {name!r} not found; workbook has {doc.sheet_names}",
            source=doc.source)

    rows: list[list[Cell]] = []
    pending_empty_rows = 0
    in_target = False
    depth = 0

    try:
        for event, elem in ElementTree.iterparse(io.BytesIO(doc._content), events=("start", "end")):
            if event == "start":
                if elem.tag == _TABLE_TAG:
                    depth += 1
                    in_target = depth == 1 and elem.get(_NAME_ATTR) == name
                continue
            # end events
            if elem.tag == _TABLE_TAG:
                depth -= 1
                if in_target:
                    break
                elem.clear()
            elif elem.tag == _ROW_TAG and in_target and depth == 1:
                cells = _expand_row(elem, doc.source, name, len(rows))
                repeat = _repeat_count(elem, _ROWS_REPEATED, doc.source, name)
                if not cells:
                    pending_empty_rows += repeat
                else:
                    if pending_empty_rows or repeat > 1:
                        total = len(rows) + pending_empty_rows + repeat
                        if total > MAX_SHEET_ROWS:
                            raise MalformedDocument(
                                f"row expansion exceeds {MAX_SHEET_ROWS} rows",
                                source=doc.source, sheet=name)
                    rows.extend([] for _ in range(pending_empty_rows))
                    pending_empty_rows = 0
                    rows.append(cells)
                    for _ in range(repeat - 1):
                        rows.append(list(cells))
                elem.clear()
    except ElementTree.ParseError as exc:
        raise MalformedDocument(
            f"content XML not well-formed ({exc})", source=doc.source, sheet=name) from None

    return CellGrid.from_rows(name, rows)


def _read_source(source) -> tuple[str, bytes]:
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        with open(path, "rb") as fh:
            return path, fh.read()
    if isinstance(source, (bytes, bytearray)):
        return "<bytes>", bytes(source)
    data = source.read()
    label = getattr(source, "name", "<stream>")
    return str(label), data


def _repeat_count(elem, attr: str, source: str, sheet: str) -> int:
    raw = elem.get(attr)
    if raw is None:
        return 1
    try:
        count = int(raw)
    except ValueError:
        raise MalformedDocument(
            f"invalid repeat count {raw!r}", source=source, sheet=sheet) from None
    if count < 1:
        raise MalformedDocument(
            f"invalid repeat count {raw!r}", source=source, sheet=sheet)
    return count


def _expand_row(row_elem, source: str, sheet: str, row_index: int) -> list[Cell]:
    """Logical cells of one row, trailing empties trimmed.

    Empty runs are buffered and only flushed when a later non-empty cell
    appears, so a trailing ``number-columns-repeated="16384"`` pad costs
    nothing.
    """
    cells: list[Cell] = []
    pending_empty = 0
    for child in row_elem:
        if child.tag == _CELL_TAG:
            cell = _parse_cell(child, source, sheet, row_index)
        elif child.tag == _COVERED_TAG:
            cell = _EMPTY_CELL
        else:
            continue
        repeat = _repeat_count(child, _COLS_REPEATED, source, sheet)
        if cell.is_empty:
            pending_empty += repeat
        else:
            if len(cells) + pending_empty + repeat > MAX_ROW_CELLS:
                raise MalformedDocument(
                    f"cell expansion exceeds {MAX_ROW_CELLS} cells",
                    source=source, sheet=sheet, row=row_index)
            if pending_empty:
                cells.extend([_EMPTY_CELL] * pending_empty)
                pending_empty = 0
            cells.extend([cell] * repeat)
    return cells


def _parse_cell(cell_elem, source: str, sheet: str, row_index: int) -> Cell:
    value_type = cell_elem.get(_VALUE_TYPE)
    if value_type in ("float", "percentage", "currency"):
        raw = cell_elem.get(_VALUE)
        if raw is None:
            raise MalformedDocument(
                f"number cell without office:value", source=source, sheet=sheet, row=row_index)
        try:
            return Cell.number(float(raw))
        except (ValueError, OverflowError):
            raise MalformedDocument(
                f"unparseable office:value {raw!r}", source=source, sheet=sheet,
                row=row_index) from None
    if value_type == "boolean":
        raw = (cell_elem.get(_BOOL_VALUE) or "").lower()
        if raw not in ("true", "false"):
            raise MalformedDocument(
                f"unparseable office:boolean-value {raw!r}", source=source,
                sheet=sheet, row=row_index)
        return Cell.boolean(raw == "true")
    if value_type == "date":
        raw = cell_elem.get(_DATE_VALUE)
        if not raw:
            raise MalformedDocument(
                "date cell without office:date-value", source=source, sheet=sheet,
                row=row_index)
        return Cell.date(raw)
    if value_type == "time":
        # Durations are rare metadata; keep the ISO text as-is.
        return Cell.text(cell_elem.get(_TIME_VALUE) or _cell_text(cell_elem))
    if value_type == "string":
        explicit = cell_elem.get(_STRING_VALUE)
        if explicit is not None:
            return Cell.text(explicit)
        return Cell.text(_cell_text(cell_elem))
    # No (or unknown) value type: fall back to any display text, lenient
    # toward attributes from ODS versions newer than 1.2.
    return Cell.text(_cell_text(cell_elem))


def _cell_text(cell_elem) -> str:
    paragraphs = [_para_text(p) for p in cell_elem if p.tag == _P_TAG]
    return "\n".join(paragraphs)


def _para_text(elem) -> str:
    parts: list[str] = []
    if elem.text:
        parts.append(elem.text)
    for child in elem:
        if child.tag == _S_TAG:
            parts.append(" " * int(child.get(_SPACE_COUNT, "1")))
        elif child.tag == _TAB_TAG:
            parts.append("\t")
        elif child.tag == _BREAK_TAG:
            parts.append("\n")
        else:
            parts.append(_para_text(child))
        if child.tail:
            parts.append(child.tail)
    return "".join(parts)


def grid_to_csv(grid: CellGrid) -> bytes:
    """Serialize a grid as RFC-4180 CSV (UTF-8, LF, rows padded to width).

    Byte-deterministic: equal grids always produce identical output.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in grid.padded_rows():
        writer.writerow([cell.text_value for cell in row])
    return buf.getvalue().encode("utf-8")


def grid_from_csv(source, sheet_name: str) -> CellGrid:
    """Read a pre-converted CSV release file into a text-cell grid.

    All cells come back as text (the cleaner does type coercion); trailing
    empty cells and rows are trimmed exactly as for parsed sheets.
    """
    label, data = _read_source(source)
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise MalformedDocument(f"CSV is not UTF-8 ({exc})", source=label) from None
    rows: list[list[Cell]] = []
    pending_empty_rows = 0
    try:
        for record in csv.reader(io.StringIO(text)):
            while record and record[-1] == "":
                record.pop()
            if not record:
                pending_empty_rows += 1
                continue
            rows.extend([] for _ in range(pending_empty_rows))
            pending_empty_rows = 0
            rows.append([Cell.text(value) for value in record])
    except csv.Error as exc:
        raise MalformedDocument(f"CSV structure error ({exc})", source=label) from None
    return CellGrid.from_rows(sheet_name, rows)
