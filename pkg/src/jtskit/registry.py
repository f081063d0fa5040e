"""Catalog of JTS tables: codes, sheet layouts, sentinel rules, sources.

The catalog ships as a JSON data file so new releases can be described
without code changes. ``Registry.default()`` loads the packaged copy;
``Registry.load(path)`` reads an external one. Tests build small
registries directly from ``TableSpec`` objects.
"""

from __future__ import annotations

import difflib
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import (
    AmbiguousRequest,
    DuplicateKey,
    MalformedDocument,
    UnknownFamily,
    UnknownPurpose,
    UnknownSheet,
    UnknownTable,
    UnsupportedYear,
)
from .fetch import SourceRef

_FAMILY_RE = re.compile(r"jts\d{2}", re.IGNORECASE)


@lru_cache(maxsize=256)
def _compile_rule_pattern(pattern: str) -> re.Pattern[str]:
    return re.compile(pattern)


@dataclass(frozen=True)
class SentinelRule:
    """Maps one exact placeholder string to a numeric stand-in.

    ``pattern`` must equal the whole cell text; it is not a regex.
    ``applies_to`` is a regex matched (fully) against normalized column
    names, so a rule can be scoped to e.g. ``r"minutes_.*"``.
    """

    pattern: str
    replacement: float
    meaning: str
    applies_to: str = ".*"

    def applies_to_column(self, normalized_name: str) -> bool:
        return _compile_rule_pattern(self.applies_to).fullmatch(normalized_name) is not None


@dataclass(frozen=True)
class TableSpec:
    """Everything the pipeline needs to know about one published table."""

    table_code: str
    family: str
    title: str
    source_ref: str
    sheet_name_pattern: str
    purpose: str | None = None
    header_row: int | None = None
    sentinel_rules: tuple[SentinelRule, ...] = ()
    # keyed by concrete sheet name, value (rows, cols) of the raw grid
    expected_shape: dict[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.table_code.lower().startswith(self.family.lower()):
            raise MalformedDocument(
                f"table code {self.table_code!r} does not belong to family {self.family!r}"
            )

    def concrete_sheet(self, sheet: str | int | None) -> str:
        """Resolve the sheet to open.

        The pattern either names the sheet outright or contains a
        ``{year}`` placeholder. An explicit ``sheet`` argument fills the
        placeholder when there is one and is otherwise taken verbatim.
        """
        if sheet is not None:
            text = str(sheet)
            if "{year}" in self.sheet_name_pattern:
                return self.sheet_name_pattern.replace("{year}", text)
            return text
        if "{year}" in self.sheet_name_pattern:
            raise UnknownSheet(
                f"table {self.table_code} has one sheet per year; pass sheet=<year>"
            )
        return self.sheet_name_pattern


@dataclass(frozen=True)
class GeoAlternative:
    """A boundary vintage other than the default. ONS renames the code
    property between vintages (LSOA11CD vs LSOA21CD), so each alternative
    may carry its own; None inherits the level default."""

    source: str
    code_property: str | None = None


@dataclass(frozen=True)
class GeoConfig:
    default_source: str
    code_property: str
    # vintage label -> alternative; bare source names are accepted and
    # normalized on construction
    alternatives: dict[str, GeoAlternative] = field(default_factory=dict)

    def __post_init__(self) -> None:
        norm: dict[str, GeoAlternative] = {}
        for label, alt in self.alternatives.items():
            if isinstance(alt, GeoAlternative):
                norm[str(label)] = alt
            elif isinstance(alt, dict):
                norm[str(label)] = GeoAlternative(
                    source=alt["source"], code_property=alt.get("code_property")
                )
            else:
                norm[str(label)] = GeoAlternative(source=str(alt))
        object.__setattr__(self, "alternatives", norm)

    def for_year(self, year: int | str | None) -> tuple[str, str]:
        """Source name and code property for a vintage (default if the
        vintage is unknown or None)."""
        if year is not None:
            alt = self.alternatives.get(str(year))
            if alt is not None:
                return alt.source, alt.code_property or self.code_property
        return self.default_source, self.code_property


@dataclass(frozen=True)
class ImdConfig:
    source_ref: str
    lsoa_code_column: str
    # domain name -> {"score": col, "rank": col, "decile": col}
    domains: dict[str, dict[str, str]]


class Registry:
    """Lookup service over the table catalog and its download sources."""

    def __init__(
        self,
        specs: Iterable[TableSpec],
        sources: dict[str, SourceRef] | None = None,
        geo: dict[str, GeoConfig] | None = None,
        imd: dict[str, ImdConfig] | None = None,
    ) -> None:
        self._specs: dict[str, TableSpec] = {}
        for spec in specs:
            key = spec.table_code.lower()
            if key in self._specs:
                raise DuplicateKey(f"table code {spec.table_code} appears twice")
            self._specs[key] = spec
        self._sources = dict(sources or {})
        self._geo = dict(geo or {})
        self._imd = dict(imd or {})

    def __len__(self) -> int:
        return len(self._specs)

    # -- tables ---------------------------------------------------------

    def lookup(self, table_code: str) -> TableSpec:
        spec = self._specs.get(table_code.lower())
        if spec is None:
            near = difflib.get_close_matches(
                table_code.upper(), [s.table_code for s in self._specs.values()], n=5
            )
            hint = f"; did you mean {', '.join(near)}?" if near else ""
            raise UnknownTable(f"no table {table_code!r} in the catalog{hint}")
        return spec

    def resolve(
        self,
        family: str,
        purpose: str | None = None,
        sheet: str | int | None = None,
    ) -> tuple[TableSpec, str]:
        """Pick the table for a family/purpose pair and fix its sheet name."""
        members = [s for s in self._specs.values() if s.family == family.lower()]
        if not members:
            known = sorted({s.family for s in self._specs.values()})
            raise UnknownFamily(
                f"no family {family!r}; known families: {', '.join(known)}"
            )
        if purpose is not None:
            matches = [
                s for s in members if s.purpose and s.purpose.lower() == purpose.lower()
            ]
            if not matches:
                have = sorted(s.purpose for s in members if s.purpose)
                detail = f"family {family} has no purpose {purpose!r}"
                if have:
                    detail += f"; available: {', '.join(have)}"
                else:
                    detail += "; its tables are addressed by code only"
                raise UnknownPurpose(detail)
            spec = matches[0]
        elif len(members) == 1:
            spec = members[0]
        else:
            codes = ", ".join(sorted(s.table_code for s in members))
            raise AmbiguousRequest(
                f"family {family} holds {len(members)} tables ({codes}); "
                "pass purpose= or table_code="
            )
        return spec, spec.concrete_sheet(sheet)

    def list_tables(self, filter: str | None = None) -> list[TableSpec]:
        """All specs, a family's specs, or a substring search over code,
        title and purpose. Sorted by table code either way."""
        specs = sorted(self._specs.values(), key=lambda s: s.table_code)
        if filter is None:
            return specs
        if _FAMILY_RE.fullmatch(filter):
            fam = filter.lower()
            return [s for s in specs if s.family == fam]
        needle = filter.lower()
        return [
            s
            for s in specs
            if needle in s.table_code.lower()
            or needle in s.title.lower()
            or (s.purpose is not None and needle in s.purpose.lower())
        ]

    # -- sources and auxiliary datasets ---------------------------------

    def source(self, name: str) -> SourceRef:
        try:
            return self._sources[name]
        except KeyError:
            raise UnknownTable(f"no download source named {name!r}") from None

    def geo_config(self, level: str) -> GeoConfig:
        try:
            return self._geo[level]
        except KeyError:
            known = ", ".join(sorted(self._geo)) or "none configured"
            raise UnknownFamily(
                f"no boundary set for level {level!r}; known: {known}"
            ) from None

    def imd_config(self, year: int) -> ImdConfig:
        config = self._imd.get(str(year))
        if config is None:
            known = ", ".join(sorted(self._imd)) or "none configured"
            raise UnsupportedYear(
                f"no deprivation release for {year}; available: {known}"
            )
        return config

    # -- construction ---------------------------------------------------

    @classmethod
    def load(cls, path: str | Path) -> "Registry":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise MalformedDocument(
                f"cannot read catalog: {exc}", source=str(path)
            ) from exc
        return cls.from_dict(raw, source=str(path))

    @classmethod
    def from_dict(cls, raw: dict, source: str = "<dict>") -> "Registry":
        try:
            return cls._build(raw)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedDocument(
                f"catalog structure invalid: {exc!r}", source=source
            ) from exc

    @classmethod
    def _build(cls, raw: dict) -> "Registry":
        families = raw.get("families", {})
        specs = []
        for entry in raw["tables"]:
            code = entry["table_code"]
            family = code[:5].lower()
            defaults = families.get(family, {})
            rules = [
                _rule_from_dict(r)
                for r in defaults.get("sentinel_rules", [])
                + entry.get("extra_sentinel_rules", [])
            ]
            if "sentinel_rules" in entry:  # full override, rare
                rules = [_rule_from_dict(r) for r in entry["sentinel_rules"]]
            pattern = entry.get(
                "sheet_name_pattern", defaults.get("sheet_name_pattern", "{year}")
            ).replace("{code}", code)
            shape = {
                name: (int(dims[0]), int(dims[1]))
                for name, dims in entry.get("expected_shape", {}).items()
            }
            specs.append(
                TableSpec(
                    table_code=code,
                    family=family,
                    title=entry["title"],
                    source_ref=entry["source_ref"],
                    sheet_name_pattern=pattern,
                    purpose=entry.get("purpose"),
                    header_row=entry.get("header_row", defaults.get("header_row")),
                    sentinel_rules=tuple(rules),
                    expected_shape=shape,
                )
            )
        sources = {
            name: SourceRef(
                name=name,
                url=src["url"],
                media_kind=src["media_kind"],
                checksum=src.get("checksum"),
            )
            for name, src in raw.get("sources", {}).items()
        }
        geo = {
            level: GeoConfig(
                default_source=cfg["default_source"],
                code_property=cfg["code_property"],
                alternatives=dict(cfg.get("alternatives", {})),
            )
            for level, cfg in raw.get("geo", {}).items()
        }
        imd = {
            year: ImdConfig(
                source_ref=cfg["source_ref"],
                lsoa_code_column=cfg["lsoa_code_column"],
                domains={k: dict(v) for k, v in cfg["domains"].items()},
            )
            for year, cfg in raw.get("imd", {}).items()
        }
        return cls(specs, sources=sources, geo=geo, imd=imd)


def _rule_from_dict(raw: dict) -> SentinelRule:
    return SentinelRule(
        pattern=raw["pattern"],
        replacement=float(raw["replacement"]),
        meaning=raw.get("meaning", ""),
        applies_to=raw.get("applies_to", ".*"),
    )


@lru_cache(maxsize=1)
def default_registry() -> Registry:
    """The packaged catalog, parsed once per process."""
    text = resources.files("jtskit.data").joinpath("registry.json").read_text("utf-8")
    return Registry.from_dict(json.loads(text), source="jtskit/data/registry.json")
