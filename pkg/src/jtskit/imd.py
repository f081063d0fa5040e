"""English Index of Multiple Deprivation, one domain at a time.

The 2019 release publishes every domain's score, rank and decile in a
single wide CSV keyed by 2011 LSOA. ``get_imd`` slices out one domain as
a four-column table ready to join onto journey time data. Throughout,
rank 1 is the most deprived area and decile 1 the most deprived tenth.
"""

from __future__ import annotations

import csv
import io
from enum import Enum

from .clean import numeric_from_text
from .errors import EmptyInput, MalformedDocument, UnknownDomain
from .fetch import FileCache
from .registry import Registry, default_registry
from .table import Column, ColumnKind, Provenance, TidyTable


class ImdDomain(str, Enum):
    OVERALL = "overall"
    INCOME = "income"
    EMPLOYMENT = "employment"
    EDUCATION = "education"
    HEALTH = "health"
    CRIME = "crime"
    BARRIERS = "barriers"
    LIVING_ENVIRONMENT = "living_environment"


def _domain(value: ImdDomain | str) -> ImdDomain:
    try:
        return ImdDomain(value)
    except ValueError:
        known = ", ".join(d.value for d in ImdDomain)
        raise UnknownDomain(f"no domain {value!r}; one of: {known}") from None


def get_imd(
    year: int = 2019,
    domain: ImdDomain | str = ImdDomain.OVERALL,
    registry: Registry | None = None,
    cache: FileCache | None = None,
    policy: str = "prefer_cache",
) -> TidyTable:
    """Table of ``lsoa_code``, ``score``, ``rank``, ``decile`` for one
    domain of one release year."""
    domain = _domain(domain)
    registry = registry if registry is not None else default_registry()
    cache = cache if cache is not None else FileCache()
    config = registry.imd_config(year)  # UnsupportedYear for other years
    try:
        wanted = config.domains[domain.value]
    except KeyError:
        raise UnknownDomain(
            f"the {year} release carries no {domain.value!r} domain"
        ) from None

    ref = registry.source(config.source_ref)
    entry = cache.fetch(ref, policy=policy)
    raw = entry.path.read_bytes()
    return parse_imd_csv(
        raw,
        lsoa_code_column=config.lsoa_code_column,
        score_column=wanted["score"],
        rank_column=wanted["rank"],
        decile_column=wanted["decile"],
        source=entry.url,
        fetched_at=entry.fetched_at,
    )


def parse_imd_csv(
    data: bytes,
    lsoa_code_column: str,
    score_column: str,
    rank_column: str,
    decile_column: str,
    source: str | None = None,
    fetched_at: float | None = None,
) -> TidyTable:
    """Extract one domain from the wide release CSV.

    Column headers must match the release exactly; a miss names the
    absent header so catalog typos surface loudly.
    """
    text = data.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInput("deprivation file has no rows", source=source) from None

    positions = {}
    for role, wanted in (
        ("lsoa_code", lsoa_code_column),
        ("score", score_column),
        ("rank", rank_column),
        ("decile", decile_column),
    ):
        try:
            positions[role] = header.index(wanted)
        except ValueError:
            raise MalformedDocument(
                f"deprivation file lacks column {wanted!r}", source=source
            ) from None

    codes: list[str | None] = []
    scores: list[float | None] = []
    ranks: list[int | None] = []
    deciles: list[int | None] = []
    width = max(positions.values()) + 1
    for row_num, row in enumerate(reader, start=2):
        if not any(field.strip() for field in row):
            continue
        if len(row) < width:
            raise MalformedDocument(
                f"row {row_num} has {len(row)} fields, header has {len(header)}",
                source=source,
                row=row_num,
            )
        code = row[positions["lsoa_code"]].strip()
        codes.append(code or None)
        scores.append(_float_field(row[positions["score"]], "score", row_num, source))
        ranks.append(_int_field(row[positions["rank"]], "rank", row_num, source))
        deciles.append(_int_field(row[positions["decile"]], "decile", row_num, source))

    if not codes:
        raise EmptyInput("deprivation file has a header but no data", source=source)

    return TidyTable(
        (
            Column("lsoa_code", ColumnKind.TEXT, codes, lsoa_code_column),
            Column("score", ColumnKind.FLOAT, scores, score_column),
            Column("rank", ColumnKind.INT, ranks, rank_column),
            Column("decile", ColumnKind.INT, deciles, decile_column),
        ),
        provenance=Provenance(sheet_name=None, source=source, fetched_at=fetched_at),
    )


def _float_field(text: str, role: str, row_num: int, source: str | None) -> float | None:
    if not text.strip():
        return None
    value = numeric_from_text(text)
    if value is None:
        raise MalformedDocument(
            f"{role} value {text!r} is not numeric", source=source, row=row_num
        )
    return value


def _int_field(text: str, role: str, row_num: int, source: str | None) -> int | None:
    value = _float_field(text, role, row_num, source)
    if value is None:
        return None
    if not value.is_integer():
        raise MalformedDocument(
            f"{role} value {text!r} is not a whole number", source=source, row=row_num
        )
    return int(value)
