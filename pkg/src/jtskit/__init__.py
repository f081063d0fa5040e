"""Journey time statistics toolkit.

Turns the published ODS releases into typed tables, joins deprivation
scores and boundary polygons onto them, and writes deterministic CSV,
Parquet and SVG outputs.
"""

from .api import JtsRequest, get_jts
from .clean import (
    HeaderResolution,
    apply_sentinels,
    clean,
    coerce_types,
    detect_header,
    normalize_name,
)
from .errors import (
    AmbiguousRequest,
    CacheMiss,
    DuplicateKey,
    EmptyInput,
    IntegrityFailure,
    MalformedDocument,
    MissingCodeProperty,
    MissingKeyColumn,
    NetworkError,
    NoHeader,
    NonNumericColumn,
    PipelineError,
    ShapeMismatch,
    UnknownDomain,
    UnknownFamily,
    UnknownPurpose,
    UnknownSheet,
    UnknownTable,
    UnsupportedYear,
)
from .fetch import CacheEntry, FileCache, SourceRef
from .geo import (
    Feature,
    FeatureSet,
    GeoLevel,
    GeoTable,
    Geometry,
    get_geo,
    join_geo,
    load_featureset,
)
from .imd import ImdDomain, get_imd, parse_imd_csv
from .ods import (
    Cell,
    CellGrid,
    CellKind,
    OdsDocument,
    canonical_number,
    grid_from_csv,
    grid_to_csv,
    open_ods,
    parse_sheet,
)
from .registry import (
    GeoConfig,
    ImdConfig,
    Registry,
    SentinelRule,
    TableSpec,
    default_registry,
)
from .render import (
    OKABE_ITO,
    YLGNBU_7,
    ChoroplethSpec,
    LineChartSpec,
    choropleth,
    class_breaks,
    classify,
    line_chart,
    sample_palette,
    simplify,
)
from .table import (
    Column,
    ColumnKind,
    Provenance,
    TidyTable,
    from_columnar,
    join,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousRequest",
    "CacheEntry",
    "CacheMiss",
    "Cell",
    "CellGrid",
    "CellKind",
    "ChoroplethSpec",
    "Column",
    "ColumnKind",
    "DuplicateKey",
    "EmptyInput",
    "Feature",
    "FeatureSet",
    "FileCache",
    "GeoConfig",
    "GeoLevel",
    "GeoTable",
    "Geometry",
    "HeaderResolution",
    "ImdConfig",
    "ImdDomain",
    "IntegrityFailure",
    "JtsRequest",
    "LineChartSpec",
    "MalformedDocument",
    "MissingCodeProperty",
    "MissingKeyColumn",
    "NetworkError",
    "NoHeader",
    "NonNumericColumn",
    "OKABE_ITO",
    "OdsDocument",
    "PipelineError",
    "Provenance",
    "Registry",
    "SentinelRule",
    "ShapeMismatch",
    "SourceRef",
    "TableSpec",
    "TidyTable",
    "UnknownDomain",
    "UnknownFamily",
    "UnknownPurpose",
    "UnknownSheet",
    "UnknownTable",
    "UnsupportedYear",
    "YLGNBU_7",
    "apply_sentinels",
    "canonical_number",
    "choropleth",
    "class_breaks",
    "classify",
    "clean",
    "coerce_types",
    "default_registry",
    "detect_header",
    "from_columnar",
    "get_geo",
    "get_imd",
    "get_jts",
    "grid_from_csv",
    "grid_to_csv",
    "join",
    "join_geo",
    "line_chart",
    "load_featureset",
    "normalize_name",
    "open_ods",
    "parse_imd_csv",
    "parse_sheet",
    "sample_palette",
    "simplify",
    "__version__",
]
