"""One-call access to a cleaned table.

``get_jts`` strings the whole pipeline together: resolve the request in
the catalog, fetch (or reuse) the release file, parse the sheet, clean
it, and optionally attach boundaries. Alternate keyword spellings from
earlier drafts of the interface (``type_code`` for ``family``, ``spec``
for ``purpose``) are accepted to keep published call sites working.
"""

from __future__ import annotations

from dataclasses import dataclass

from .clean import clean
from .errors import AmbiguousRequest, UnknownFamily
from .fetch import FileCache
from .geo import GeoLevel, GeoTable, get_geo, join_geo
from .ods import open_ods, parse_sheet
from .registry import Registry, TableSpec, default_registry
from .table import TidyTable, with_provenance

# families whose rows are areas with published boundaries
_FAMILY_LEVELS = {
    "jts03": GeoLevel.LOCAL_AUTHORITY,
    "jts04": GeoLevel.LSOA,
    "jts05": GeoLevel.LSOA,
    "jts06": GeoLevel.LSOA,
    "jts07": GeoLevel.LSOA,
    "jts08": GeoLevel.LSOA,
    "jts09": GeoLevel.LSOA,
}

_ALIASES = {"type_code": "family", "spec": "purpose"}


@dataclass(frozen=True)
class JtsRequest:
    """A fully resolved request: which table, which sheet, what extras."""

    table_code: str | None = None
    family: str | None = None
    purpose: str | None = None
    sheet: str | int | None = None
    geo: bool = False
    policy: str = "prefer_cache"

    def resolve(self, registry: Registry) -> tuple[TableSpec, str]:
        by_code = self.table_code is not None
        by_family = self.family is not None or self.purpose is not None
        if by_code and by_family:
            raise AmbiguousRequest(
                "pass either table_code or family/purpose, not both"
            )
        if by_code:
            spec = registry.lookup(self.table_code)
            return spec, spec.concrete_sheet(self.sheet)
        if self.family is None:
            raise AmbiguousRequest(
                "nothing to look up: pass table_code, or family (with purpose "
                "where the family has several tables)"
            )
        return registry.resolve(self.family, self.purpose, self.sheet)


def _apply_aliases(kwargs: dict, family: str | None, purpose: str | None):
    for alias, target in _ALIASES.items():
        if alias not in kwargs:
            continue
        value = kwargs.pop(alias)
        current = family if target == "family" else purpose
        if current is not None and current != value:
            raise AmbiguousRequest(
                f"{alias}={value!r} conflicts with {target}={current!r}"
            )
        if target == "family":
            family = value
        else:
            purpose = value
    if kwargs:
        unknown = ", ".join(sorted(kwargs))
        raise TypeError(f"unexpected keyword arguments: {unknown}")
    return family, purpose


def get_jts(
    table_code: str | None = None,
    family: str | None = None,
    purpose: str | None = None,
    sheet: str | int | None = None,
    geo: bool = False,
    policy: str = "prefer_cache",
    registry: Registry | None = None,
    cache: FileCache | None = None,
    **kwargs,
) -> TidyTable | GeoTable:
    """Fetch, parse and clean one published table.

    Address the table either by its code (``table_code="jts0501"``) or
    by family and purpose (``family="jts05", purpose="employment"``).
    Tables with one sheet per year need ``sheet=<year>``. With
    ``geo=True`` the result is a ``GeoTable`` carrying boundary polygons
    for each row; otherwise a plain ``TidyTable``.
    """
    family, purpose = _apply_aliases(kwargs, family, purpose)
    request = JtsRequest(
        table_code=table_code,
        family=family,
        purpose=purpose,
        sheet=sheet,
        geo=geo,
        policy=policy,
    )
    registry = registry if registry is not None else default_registry()
    cache = cache if cache is not None else FileCache()

    spec, sheet_name = request.resolve(registry)
    ref = registry.source(spec.source_ref)
    entry = cache.fetch(ref, policy=policy)
    doc = open_ods(entry.path)
    grid = parse_sheet(doc, sheet_name)
    table = clean(grid, spec)
    table = with_provenance(table, source=entry.url, fetched_at=entry.fetched_at)
    if not geo:
        return table

    level = _FAMILY_LEVELS.get(spec.family)
    if level is None:
        raise UnknownFamily(
            f"family {spec.family} has no published boundaries to join"
        )
    featureset = get_geo(
        level, year=sheet, registry=registry, cache=cache, policy=policy
    )
    return join_geo(table, featureset)
