"""Boundary polygons and their join onto tidy tables.

GeoJSON is the only boundary format read. Geometries are kept in
longitude/latitude; projection to pixels happens at render time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import DuplicateKey, MalformedDocument, MissingCodeProperty
from .fetch import FileCache
from .registry import Registry, default_registry
from .table import TidyTable

# ring: tuple of (lon, lat) pairs; polygon: outer ring then holes
Ring = tuple[tuple[float, float], ...]
Polygon = tuple[Ring, ...]


class GeoLevel(str, Enum):
    LSOA = "lsoa"
    LOCAL_AUTHORITY = "local_authority"


# column the join looks for in the data table, per level
DEFAULT_KEY_COLUMNS = {
    GeoLevel.LSOA: "lsoa_code",
    GeoLevel.LOCAL_AUTHORITY: "la_code",
}


@dataclass(frozen=True)
class Geometry:
    """One area as a set of polygons (a plain Polygon is stored as a
    one-element set)."""

    polygons: tuple[Polygon, ...]

    def bounds(self) -> tuple[float, float, float, float]:
        xs = [p[0] for poly in self.polygons for ring in poly for p in ring]
        ys = [p[1] for poly in self.polygons for ring in poly for p in ring]
        return min(xs), min(ys), max(xs), max(ys)


@dataclass(frozen=True)
class Feature:
    code: str
    name: str | None
    geometry: Geometry
    properties: dict = field(default_factory=dict, hash=False, compare=False)


@dataclass(frozen=True)
class FeatureSet:
    level: GeoLevel
    code_property: str
    features: tuple[Feature, ...]

    def __len__(self) -> int:
        return len(self.features)

    def codes(self) -> list[str]:
        return [f.code for f in self.features]

    def bounds(self) -> tuple[float, float, float, float]:
        if not self.features:
            raise MalformedDocument("boundary set has no features")
        per = [f.geometry.bounds() for f in self.features]
        return (
            min(b[0] for b in per),
            min(b[1] for b in per),
            max(b[2] for b in per),
            max(b[3] for b in per),
        )


def _ring(coords, code: str) -> Ring:
    ring = tuple((float(x), float(y)) for x, y in coords)
    for x, y in ring:
        if not (-180.0 <= x <= 180.0 and -90.0 <= y <= 90.0):
            # eastings/northings smell like an unconverted projected file
            raise MalformedDocument(
                f"feature {code!r} has coordinate ({x}, {y}) outside the "
                "longitude/latitude range; boundaries must be lon/lat, not "
                "a projected grid"
            )
    return ring


def _geometry(raw: dict, code: str) -> Geometry:
    kind = raw.get("type")
    coords = raw.get("coordinates")
    if kind == "Polygon":
        return Geometry((tuple(_ring(r, code) for r in coords),))
    if kind == "MultiPolygon":
        return Geometry(
            tuple(tuple(_ring(r, code) for r in poly) for poly in coords)
        )
    raise MalformedDocument(
        f"feature {code!r} has geometry type {kind!r}; only Polygon and "
        "MultiPolygon describe boundaries"
    )


def load_featureset(
    source: bytes | str | Path,
    code_property: str,
    level: GeoLevel | str,
    name_property: str | None = None,
) -> FeatureSet:
    """Parse a GeoJSON FeatureCollection into an ordered feature set.

    Every feature must carry ``code_property``; codes must be unique.
    """
    level = GeoLevel(level)
    if isinstance(source, bytes):
        text = source.decode("utf-8")
        origin = "<bytes>"
    else:
        text = Path(source).read_text(encoding="utf-8")
        origin = str(source)
    try:
        raw = json.loads(text)
    except ValueError as exc:
        raise MalformedDocument(f"not JSON: {exc}", source=origin) from exc
    if raw.get("type") != "FeatureCollection" or not isinstance(raw.get("features"), list):
        raise MalformedDocument("not a GeoJSON FeatureCollection", source=origin)

    features = []
    seen: set[str] = set()
    for position, item in enumerate(raw["features"]):
        props = item.get("properties") or {}
        if code_property not in props:
            raise MissingCodeProperty(
                f"feature {position} lacks property {code_property!r}",
                source=origin,
            )
        code = str(props[code_property])
        if code in seen:
            raise DuplicateKey(f"boundary code {code!r} appears twice", source=origin)
        seen.add(code)
        geometry = item.get("geometry")
        if not isinstance(geometry, dict):
            raise MalformedDocument(f"feature {code!r} has no geometry", source=origin)
        name = props.get(name_property) if name_property else None
        if name is None:
            # ONS releases pair every XXXcd with an XXXnm
            name_key = code_property[:-2] + "NM" if code_property.endswith("CD") else None
            if name_key and name_key in props:
                name = str(props[name_key])
        features.append(
            Feature(code=code, name=name, geometry=_geometry(geometry, code), properties=props)
        )
    return FeatureSet(level=level, code_property=code_property, features=tuple(features))


def get_geo(
    level: GeoLevel | str,
    year: int | str | None = None,
    registry: Registry | None = None,
    cache: FileCache | None = None,
    policy: str = "prefer_cache",
) -> FeatureSet:
    """Fetch (or reuse) the boundary file for a level and parse it.

    ``year`` selects an alternative vintage when the catalog offers one;
    otherwise the default source is used.
    """
    level = GeoLevel(level)
    registry = registry if registry is not None else default_registry()
    cache = cache if cache is not None else FileCache()
    config = registry.geo_config(level.value)
    source_name, code_property = config.for_year(year)
    ref = registry.source(source_name)
    entry = cache.fetch(ref, policy=policy)
    return load_featureset(entry.path, code_property, level)


@dataclass(frozen=True)
class GeoTable:
    """A tidy table with a boundary feature attached to each row.

    ``features`` is parallel to the table's rows; rows whose code has no
    boundary hold None there and are listed in ``absent_codes``.
    """

    table: TidyTable
    featureset: FeatureSet
    key_column: str
    features: tuple[Feature | None, ...]

    @property
    def matched(self) -> int:
        return sum(1 for f in self.features if f is not None)

    @property
    def absent_codes(self) -> list[str]:
        key = self.table.column(self.key_column)
        return [
            str(code)
            for code, feature in zip(key.values, self.features)
            if feature is None and code is not None
        ]

    def value_map(self, column: str) -> dict[str, float | int | None]:
        """Feature code to value, for rows that matched a boundary."""
        key = self.table.column(self.key_column).values
        vals = self.table.column(column).values
        return {
            str(code): value
            for code, value, feature in zip(key, vals, self.features)
            if feature is not None
        }


def join_geo(
    table: TidyTable,
    featureset: FeatureSet,
    key_column: str | None = None,
) -> GeoTable:
    """Attach boundaries to rows by area code. Unmatched rows stay in
    the table (their feature is None); boundary areas missing from the
    table are simply not attached, the renderer still draws them."""
    if key_column is None:
        key_column = DEFAULT_KEY_COLUMNS[featureset.level]
    key = table.column(key_column)  # raises MissingKeyColumn
    by_code = {f.code: f for f in featureset.features}
    features = tuple(
        by_code.get(str(v)) if v is not None else None for v in key.values
    )
    return GeoTable(
        table=table, featureset=featureset, key_column=key_column, features=features
    )
