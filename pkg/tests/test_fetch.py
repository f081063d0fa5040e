import hashlib
import json

import pytest

from jtskit import CacheMiss, FileCache, IntegrityFailure, NetworkError, SourceRef
from jtskit.fetch import cache_key, default_cache_dir


PAYLOAD = b"ods bytes, pretend"
DIGEST = hashlib.sha256(PAYLOAD).hexdigest()


@pytest.fixture
def served_ref(file_server):
    url = file_server.add("/jts0101.ods", PAYLOAD)
    return SourceRef(name="jts0101", url=url, media_kind="ods")


def test_fetch_downloads_and_records(file_server, served_ref, tmp_path):
    cache = FileCache(tmp_path)
    entry = cache.fetch(served_ref)
    assert entry.path.read_bytes() == PAYLOAD
    assert entry.sha256 == DIGEST
    assert entry.size == len(PAYLOAD)
    assert entry.url == served_ref.url
    assert entry.path.name == cache_key(served_ref.url)
    assert file_server.hits == 1
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert cache_key(served_ref.url) in manifest["entries"]


def test_prefer_cache_reuses(file_server, served_ref, tmp_path):
    cache = FileCache(tmp_path)
    first = cache.fetch(served_ref)
    second = cache.fetch(served_ref)
    assert second.path == first.path
    assert second.fetched_at == first.fetched_at
    assert file_server.hits == 1


def test_refresh_downloads_again(file_server, served_ref, tmp_path):
    cache = FileCache(tmp_path)
    cache.fetch(served_ref)
    file_server.add("/jts0101.ods", b"newer bytes")
    entry = cache.fetch(served_ref, policy="refresh")
    assert entry.path.read_bytes() == b"newer bytes"
    assert file_server.hits == 2


def test_offline_hit_and_miss(file_server, served_ref, tmp_path):
    cache = FileCache(tmp_path)
    with pytest.raises(CacheMiss, match="offline"):
        cache.fetch(served_ref, policy="offline")
    cache.fetch(served_ref)
    hits_before = file_server.hits
    entry = cache.fetch(served_ref, policy="offline")
    assert entry.path.read_bytes() == PAYLOAD
    assert file_server.hits == hits_before


def test_bad_policy_rejected(tmp_path, served_ref):
    with pytest.raises(ValueError, match="policy"):
        FileCache(tmp_path).fetch(served_ref, policy="sometimes")


def test_checksum_pass(file_server, served_ref, tmp_path):
    ref = SourceRef(name="jts0101", url=served_ref.url, checksum=DIGEST)
    entry = FileCache(tmp_path).fetch(ref)
    assert entry.sha256 == DIGEST


def test_checksum_failure_quarantines(file_server, served_ref, tmp_path):
    wrong = "0" * 64
    ref = SourceRef(name="jts0101", url=served_ref.url, checksum=wrong)
    cache = FileCache(tmp_path)
    with pytest.raises(IntegrityFailure, match="quarantine"):
        cache.fetch(ref)
    key = cache_key(ref.url)
    assert (tmp_path / "quarantine" / key).read_bytes() == PAYLOAD
    assert not (tmp_path / "objects" / key).exists()
    assert cache.entries() == []


def test_changed_expectation_invalidates_cache(file_server, served_ref, tmp_path):
    cache = FileCache(tmp_path)
    cache.fetch(served_ref)
    # same url, but now the caller expects different bytes
    ref = SourceRef(name="jts0101", url=served_ref.url, checksum="1" * 64)
    with pytest.raises(IntegrityFailure):
        cache.fetch(ref)
    assert file_server.hits == 2


def test_http_error_is_network_error(file_server, tmp_path):
    ref = SourceRef(name="gone", url=file_server.url("/absent.ods"))
    with pytest.raises(NetworkError, match="404"):
        FileCache(tmp_path).fetch(ref)


def test_unreachable_host_is_network_error(tmp_path):
    # a reserved port on loopback nobody listens on
    ref = SourceRef(name="nowhere", url="http://127.0.0.1:9/x.ods")
    with pytest.raises(NetworkError, match="failed"):
        FileCache(tmp_path).fetch(ref)


def test_torn_object_refetches(file_server, served_ref, tmp_path):
    cache = FileCache(tmp_path)
    entry = cache.fetch(served_ref)
    entry.path.write_bytes(b"trunc")
    fresh = cache.fetch(served_ref)
    assert fresh.path.read_bytes() == PAYLOAD
    assert file_server.hits == 2


def test_purge_everything(file_server, served_ref, tmp_path):
    cache = FileCache(tmp_path)
    entry = cache.fetch(served_ref)
    assert cache.purge() == 1
    assert not entry.path.exists()
    assert cache.entries() == []
    with pytest.raises(CacheMiss):
        cache.fetch(served_ref, policy="offline")


def test_purge_respects_age(file_server, served_ref, tmp_path):
    cache = FileCache(tmp_path)
    cache.fetch(served_ref)
    assert cache.purge(older_than=3600) == 0  # too fresh to purge
    assert len(cache.entries()) == 1
    assert cache.purge(older_than=-1) == 1  # cutoff in the future


def test_two_cache_instances_share_a_root(file_server, served_ref, tmp_path):
    first = FileCache(tmp_path)
    second = FileCache(tmp_path)
    first.fetch(served_ref)
    entry = second.fetch(served_ref, policy="offline")
    assert entry.path.read_bytes() == PAYLOAD


def test_env_var_picks_cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("JTSKIT_CACHE_DIR", str(tmp_path / "elsewhere"))
    assert default_cache_dir() == tmp_path / "elsewhere"
    monkeypatch.delenv("JTSKIT_CACHE_DIR")
    assert default_cache_dir().name == "jtskit"
