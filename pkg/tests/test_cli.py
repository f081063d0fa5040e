import pytest

from conftest import lsoa_ods
from jtskit import from_columnar
from jtskit.cli import main


@pytest.fixture
def cli_env(env, tmp_path, geojson_bytes):
    env.add_table("JTS0501", lsoa_ods(), purpose="employment", header_row=2)
    env.add_geo(geojson_bytes)
    env.write_registry(tmp_path / "catalog.json")
    return env


def run(cli_env, tmp_path, *argv) -> int:
    return main(
        [
            "--registry", str(tmp_path / "catalog.json"),
            "--cache-dir", str(cli_env.cache_dir),
            *argv,
        ]
    )


# -- list ---------------------------------------------------------------


def test_list_packaged_catalog(capsys):
    assert main(["list"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 192
    assert all(line.count("\t") == 2 for line in lines)


def test_list_family(capsys):
    assert main(["list", "--family", "jts05"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 9
    assert [line.split("\t")[0] for line in lines] == [
        f"JTS050{i}" for i in range(1, 10)
    ]


def test_list_query(capsys):
    assert main(["list", "pharmacy"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("JTS0509\tpharmacy\t")


def test_list_query_within_family(capsys):
    assert main(["list", "employment", "--family", "jts05"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("JTS0501\t")


def test_list_custom_registry(cli_env, tmp_path, capsys):
    assert run(cli_env, tmp_path, "list") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == [f"JTS0501\temployment\tfixture table JTS0501"]


# -- fetch --------------------------------------------------------------


def test_fetch_prints_cache_path(cli_env, tmp_path, capsys):
    assert run(cli_env, tmp_path, "fetch", "JTS0501") == 0
    path = capsys.readouterr().out.strip()
    assert path.startswith(str(cli_env.cache_dir))
    assert cli_env.server.hits == 1
    # already cached: same path, no second download
    assert run(cli_env, tmp_path, "fetch", "JTS0501") == 0
    assert capsys.readouterr().out.strip() == path
    assert cli_env.server.hits == 1


def test_fetch_unknown_table(cli_env, tmp_path, capsys):
    assert run(cli_env, tmp_path, "fetch", "JTS9999") == 1
    assert capsys.readouterr().err.startswith("UnknownTable:")


# -- convert ------------------------------------------------------------


def test_convert_stdout_csv(cli_env, tmp_path, capsysbinary):
    assert run(cli_env, tmp_path, "convert", "JTS0501", "--sheet", "2019") == 0
    captured = capsysbinary.readouterr()
    assert captured.out == (
        b"lsoa_code,la_name,walkpt_time,car_time,services_count\n"
        b"E01000001,Borough 1,12.5,5.1,40\n"
        b"E01000002,Borough 2,8,4.2,55\n"
        b"E01000003,Borough 3,21.75,9.9,12\n"
        b"E01000004,Borough 4,15,6.4,31\n"
    )
    assert b"rows=4 cols=5" in captured.err


def test_convert_csv_file(cli_env, tmp_path, capsysbinary):
    out = tmp_path / "out.csv"
    code = run(cli_env, tmp_path, "convert", "JTS0501", "--sheet", "2019",
               "--out", str(out))
    assert code == 0
    captured = capsysbinary.readouterr()
    assert captured.out == b""  # data goes to the file, not stdout
    assert out.read_bytes().startswith(b"lsoa_code,")


def test_convert_parquet_file(cli_env, tmp_path):
    out = tmp_path / "out.parquet"
    code = run(cli_env, tmp_path, "convert", "--family", "jts05",
               "--purpose", "employment", "--sheet", "2019", "--out", str(out))
    assert code == 0
    table = from_columnar(out)
    assert table.column("services_count").values == [40, 55, 12, 31]
    assert table.provenance.table_code == "JTS0501"


def test_convert_unknown_extension(cli_env, tmp_path, capsys):
    code = run(cli_env, tmp_path, "convert", "JTS0501", "--sheet", "2019",
               "--out", str(tmp_path / "out.xlsx"))
    assert code == 2
    assert "use .csv or .parquet" in capsys.readouterr().err
    assert cli_env.server.hits == 0  # failed before any fetch


def test_convert_missing_sheet_is_pipeline_error(cli_env, tmp_path, capsys):
    assert run(cli_env, tmp_path, "convert", "JTS0501") == 1
    err = capsys.readouterr().err
    assert err.startswith("UnknownSheet:")


def test_convert_offline_empty_cache(cli_env, tmp_path, capsys):
    code = run(cli_env, tmp_path, "convert", "JTS0501", "--sheet", "2019",
               "--offline")
    assert code == 3
    assert capsys.readouterr().err.startswith("CacheMiss:")
    assert cli_env.server.hits == 0


# -- map and chart ------------------------------------------------------


def test_map_writes_svg(cli_env, tmp_path, capsys):
    out = tmp_path / "map.svg"
    code = run(cli_env, tmp_path, "map", "JTS0501", "--sheet", "2019",
               "--value", "walkpt_time", "--out", str(out),
               "--classes", "3", "--cap", "20", "--title", "walk times")
    assert code == 0
    err = capsys.readouterr().err
    assert "matched=4 unmatched=0" in err
    svg = out.read_bytes()
    assert svg.count(b"<path") == 4
    assert b"walk times" in svg


def test_map_nonnumeric_value_column(cli_env, tmp_path, capsys):
    code = run(cli_env, tmp_path, "map", "JTS0501", "--sheet", "2019",
               "--value", "la_name", "--out", str(tmp_path / "map.svg"))
    assert code == 1
    assert capsys.readouterr().err.splitlines()[-1].startswith("NonNumericColumn:")


def test_chart_writes_svg(cli_env, tmp_path):
    out = tmp_path / "chart.svg"
    code = run(cli_env, tmp_path, "chart", "JTS0501", "--sheet", "2019",
               "--x", "services_count", "--y", "walkpt_time,car_time",
               "--out", str(out), "--title", "by services")
    assert code == 0
    svg = out.read_bytes()
    assert svg.count(b"<polyline") == 2
    assert b'data-series="walkpt_time"' in svg
    assert b'data-series="car_time"' in svg


def test_chart_repeated_y_flags(cli_env, tmp_path):
    out = tmp_path / "chart.svg"
    code = run(cli_env, tmp_path, "chart", "JTS0501", "--sheet", "2019",
               "--x", "services_count", "--y", "walkpt_time",
               "--y", "car_time", "--out", str(out))
    assert code == 0
    assert out.read_bytes().count(b"<polyline") == 2


# -- usage and environment ----------------------------------------------


def test_no_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2


def test_conflicting_policy_flags(cli_env, tmp_path, capsys):
    with pytest.raises(SystemExit) as err:
        run(cli_env, tmp_path, "convert", "JTS0501", "--sheet", "2019",
            "--offline", "--refresh")
    assert err.value.code == 2


def test_bad_registry_path(tmp_path, capsys):
    code = main(["--registry", str(tmp_path / "absent.json"), "list"])
    assert code == 1
    assert capsys.readouterr().err.startswith("MalformedDocument:")


def test_cache_dir_env_var(cli_env, tmp_path, monkeypatch, capsys):
    env_cache = tmp_path / "envcache"
    monkeypatch.setenv("JTSKIT_CACHE_DIR", str(env_cache))
    code = main(["--registry", str(tmp_path / "catalog.json"),
                 "fetch", "JTS0501"])
    assert code == 0
    printed = capsys.readouterr().out.strip()
    assert printed.startswith(str(env_cache))
    assert (env_cache / "objects").exists()
