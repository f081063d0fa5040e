"""Shared fixtures: a loopback file server, prebuilt registries, and the
acceptance summary printed after the run."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from jtskit import (
    FileCache,
    GeoConfig,
    ImdConfig,
    Registry,
    SentinelRule,
    SourceRef,
    TableSpec,
    default_registry,
)

import odsfixtures as fx

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


class _Handler(BaseHTTPRequestHandler):
    def do_GET(self):
        self.server.hit_count += 1  # type: ignore[attr-defined]
        files = self.server.files  # type: ignore[attr-defined]
        body = files.get(self.path)
        if body is None:
            self.send_error(404)
            return
        self.send_response(200)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


class FileServer:
    """Serves an in-memory path-to-bytes mapping over loopback HTTP."""

    def __init__(self):
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self._server.files = {}  # type: ignore[attr-defined]
        self._server.hit_count = 0  # type: ignore[attr-defined]
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def hits(self) -> int:
        return self._server.hit_count  # type: ignore[attr-defined]

    @property
    def port(self) -> int:
        return self._server.server_port

    def add(self, path: str, data: bytes) -> str:
        self._server.files[path] = data  # type: ignore[attr-defined]
        return self.url(path)

    def url(self, path: str) -> str:
        return f"http://127.0.0.1:{self.port}{path}"

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def file_server():
    server = FileServer()
    yield server
    server.close()


class FixtureEnv:
    """One test's world: a served file set, a fresh cache, a registry
    built up by the test."""

    def __init__(self, server: FileServer, tmp_path: Path):
        self.server = server
        self.cache_dir = tmp_path / "cache"
        self.cache = FileCache(self.cache_dir)
        self.specs: list[TableSpec] = []
        self.sources: dict[str, SourceRef] = {}
        self.geo: dict[str, GeoConfig] = {}
        self.imd: dict[str, ImdConfig] = {}

    def add_source(self, name: str, data: bytes, media_kind: str = "ods",
                   checksum: str | None = None) -> SourceRef:
        url = self.server.add(f"/{name}", data)
        ref = SourceRef(name=name, url=url, media_kind=media_kind, checksum=checksum)
        self.sources[name] = ref
        return ref

    def add_table(
        self,
        code: str,
        ods_bytes: bytes,
        *,
        purpose: str | None = None,
        header_row: int | None = None,
        sheet_name_pattern: str = "{year}",
        rules: tuple[SentinelRule, ...] = (),
        expected_shape: dict | None = None,
        title: str | None = None,
    ) -> TableSpec:
        name = code.lower()
        self.add_source(f"{name}.ods", ods_bytes)
        spec = TableSpec(
            table_code=code,
            family=code[:5].lower(),
            title=title or f"fixture table {code}",
            source_ref=f"{name}.ods",
            sheet_name_pattern=sheet_name_pattern,
            purpose=purpose,
            header_row=header_row,
            sentinel_rules=rules,
            expected_shape=expected_shape or {},
        )
        self.specs.append(spec)
        return spec

    def add_geo(self, geojson_bytes: bytes, level: str = "lsoa",
                code_property: str = "LSOA11CD") -> None:
        name = f"boundaries_{level}.geojson"
        self.add_source(name, geojson_bytes, media_kind="geojson")
        self.geo[level] = GeoConfig(default_source=name, code_property=code_property)

    def add_imd(self, csv_bytes: bytes, year: int = 2019) -> None:
        # reuse the packaged column map so the real header names are the
        # ones under test
        packaged = default_registry().imd_config(year)
        self.add_source("imd.csv", csv_bytes, media_kind="csv")
        self.imd[str(year)] = ImdConfig(
            source_ref="imd.csv",
            lsoa_code_column=packaged.lsoa_code_column,
            domains=packaged.domains,
        )

    @property
    def registry(self) -> Registry:
        return Registry(self.specs, sources=self.sources, geo=self.geo, imd=self.imd)

    def write_registry(self, path: Path) -> Path:
        """Serialize this environment's registry to catalog JSON, for
        exercising the CLI's --registry flag."""
        doc = {
            "version": 1,
            "families": {},
            "tables": [
                {
                    "table_code": spec.table_code,
                    "title": spec.title,
                    "source_ref": spec.source_ref,
                    "sheet_name_pattern": spec.sheet_name_pattern,
                    **({"purpose": spec.purpose} if spec.purpose else {}),
                    **({"header_row": spec.header_row} if spec.header_row is not None else {}),
                    "sentinel_rules": [
                        {
                            "pattern": r.pattern,
                            "replacement": r.replacement,
                            "meaning": r.meaning,
                            "applies_to": r.applies_to,
                        }
                        for r in spec.sentinel_rules
                    ],
                    "expected_shape": {
                        sheet: list(dims) for sheet, dims in spec.expected_shape.items()
                    },
                }
                for spec in self.specs
            ],
            "sources": {
                name: {
                    "url": ref.url,
                    "media_kind": ref.media_kind,
                    "checksum": ref.checksum,
                }
                for name, ref in self.sources.items()
            },
            "geo": {
                level: {
                    "default_source": cfg.default_source,
                    "code_property": cfg.code_property,
                    "alternatives": {
                        label: {"source": alt.source,
                                "code_property": alt.code_property}
                        for label, alt in cfg.alternatives.items()
                    },
                }
                for level, cfg in self.geo.items()
            },
            "imd": {
                year: {
                    "source_ref": cfg.source_ref,
                    "lsoa_code_column": cfg.lsoa_code_column,
                    "domains": cfg.domains,
                }
                for year, cfg in self.imd.items()
            },
        }
        path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
        return path


@pytest.fixture
def env(file_server, tmp_path):
    return FixtureEnv(file_server, tmp_path)


# -- canonical small fixtures ------------------------------------------

LSOA_CODES = ("E01000001", "E01000002", "E01000003", "E01000004")


def lsoa_recipe(sheet_name: str = "2019", value_rows=None) -> fx.FixtureRecipe:
    """A small LSOA-keyed sheet: two preamble rows, a header, four data
    rows. Header row index is 2."""
    if value_rows is None:
        value_rows = [
            (12.5, 5.1, 40),
            (8.0, 4.2, 55),
            (21.75, 9.9, 12),
            (15.0, 6.4, 31),
        ]
    rows = [
        fx.FixtureRow([fx.s("Travel time fixtures")], pad_empty=4),
        fx.FixtureRow([]),
        fx.FixtureRow(
            [fx.s("LSOA_code"), fx.s("LA_name"), fx.s("walkpt_time"),
             fx.s("car_time"), fx.s("services_count")]
        ),
    ]
    for code, values in zip(LSOA_CODES, value_rows):
        rows.append(
            fx.FixtureRow(
                [fx.s(code), fx.s(f"Borough {code[-1]}")]
                + [fx.n(v) for v in values]
            )
        )
    return fx.FixtureRecipe(sheet_name, rows)


def lsoa_ods(sheet_name: str = "2019", value_rows=None) -> bytes:
    return fx.write_fixture_ods([lsoa_recipe(sheet_name, value_rows)])


@pytest.fixture
def geojson_bytes(data_dir) -> bytes:
    return (data_dir / "boundaries_4.geojson").read_bytes()


@pytest.fixture
def imd_bytes(data_dir) -> bytes:
    return (data_dir / "imd_fixture.csv").read_bytes()


# -- acceptance reporting ----------------------------------------------

_VERDICTS = {
    "passed": "PASS",
    "failed": "FAIL",
    "error": "ERROR",
    "skipped": "SKIP",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = {}
    for state, verdict in _VERDICTS.items():
        for report in terminalreporter.stats.get(state, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            if getattr(report, "when", "call") not in ("call", "setup"):
                continue
            name = nodeid.split("::")[-1]
            parts = name.split("_")
            number = int(parts[2])
            label = " ".join(parts[3:])
            # a later failed phase overrides an earlier passed one
            if number not in lines or verdict != "PASS":
                lines[number] = (verdict, label)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        verdict, label = lines[number]
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {label}")
