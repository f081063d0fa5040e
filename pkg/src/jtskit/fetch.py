"""Download cache for source files.

Objects are stored under a key derived from the URL alone
(sha256 of its UTF-8 bytes), so one URL maps to one file regardless of
what the server calls it. Writes go to a temp file and land with
``os.replace``; a manifest records what each object is. Concurrent
processes are serialized with advisory file locks, one per object plus
one for the manifest.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path

import requests
from filelock import FileLock

from .errors import CacheMiss, IntegrityFailure, NetworkError

ENV_CACHE_DIR = "JTSKIT_CACHE_DIR"
POLICIES = ("prefer_cache", "refresh", "offline")
_TIMEOUT = 60
_CHUNK = 1 << 16


@dataclass(frozen=True)
class SourceRef:
    """A named download: where it lives and, optionally, what its bytes
    must hash to."""

    name: str
    url: str
    media_kind: str = "ods"
    checksum: str | None = None  # sha256 hex of the expected content


@dataclass(frozen=True)
class CacheEntry:
    path: Path
    url: str
    sha256: str
    size: int
    fetched_at: float  # Unix time of the download
    media_kind: str = "ods"


def cache_key(url: str) -> str:
    return hashlib.sha256(url.encode("utf-8")).hexdigest()


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_CACHE_DIR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "jtskit"


class FileCache:
    def __init__(self, root: str | Path | None = None, session: requests.Session | None = None):
        self.root = Path(root) if root is not None else default_cache_dir()
        self._session = session
        for sub in ("objects", "locks", "tmp", "quarantine"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)

    # -- public API -----------------------------------------------------

    def fetch(self, ref: SourceRef, policy: str = "prefer_cache") -> CacheEntry:
        if policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}, not {policy!r}")
        key = cache_key(ref.url)
        if policy == "offline":
            entry = self._cached_entry(ref, key)
            if entry is None:
                raise CacheMiss(
                    f"{ref.url} is not in the cache and the run is offline",
                    source=ref.name,
                )
            return entry
        with FileLock(str(self.root / "locks" / f"{key}.lock")):
            if policy == "prefer_cache":
                entry = self._cached_entry(ref, key)
                if entry is not None:
                    return entry
            return self._download(ref, key)

    def purge(self, older_than: float | None = None) -> int:
        """Drop cached objects, all of them or only those fetched more
        than ``older_than`` seconds ago. Returns how many went."""
        cutoff = None if older_than is None else time.time() - older_than
        removed = 0
        with self._manifest_lock():
            manifest = self._read_manifest()
            keep = {}
            for key, meta in manifest["entries"].items():
                if cutoff is not None and meta["fetched_at"] >= cutoff:
                    keep[key] = meta
                    continue
                try:
                    (self.root / "objects" / key).unlink()
                except FileNotFoundError:
                    pass
                removed += 1
            manifest["entries"] = keep
            self._write_manifest(manifest)
        return removed

    def entries(self) -> list[CacheEntry]:
        with self._manifest_lock():
            manifest = self._read_manifest()
        return [self._entry_from_meta(k, m) for k, m in sorted(manifest["entries"].items())]

    # -- internals ------------------------------------------------------

    def _object_path(self, key: str) -> Path:
        return self.root / "objects" / key

    def _manifest_lock(self) -> FileLock:
        return FileLock(str(self.root / "locks" / "manifest.lock"))

    def _read_manifest(self) -> dict:
        path = self.root / "manifest.json"
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return {"version": 1, "entries": {}}
        except ValueError:
            # a torn manifest only costs re-downloads, never corrupt data
            return {"version": 1, "entries": {}}
        manifest.setdefault("entries", {})
        return manifest

    def _write_manifest(self, manifest: dict) -> None:
        path = self.root / "manifest.json"
        tmp = self.root / "tmp" / f"manifest.{os.getpid()}.part"
        tmp.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        os.replace(tmp, path)

    def _entry_from_meta(self, key: str, meta: dict) -> CacheEntry:
        return CacheEntry(
            path=self._object_path(key),
            url=meta["url"],
            sha256=meta["sha256"],
            size=meta["size"],
            fetched_at=meta["fetched_at"],
            media_kind=meta.get("media_kind", "ods"),
        )

    def _cached_entry(self, ref: SourceRef, key: str) -> CacheEntry | None:
        with self._manifest_lock():
            meta = self._read_manifest()["entries"].get(key)
        if meta is None:
            return None
        path = self._object_path(key)
        try:
            size = path.stat().st_size
        except FileNotFoundError:
            return None
        if size != meta["size"]:
            return None  # torn object, treat as a miss
        if ref.checksum is not None and meta["sha256"] != ref.checksum:
            return None  # expectation changed since the download
        return self._entry_from_meta(key, meta)

    def _download(self, ref: SourceRef, key: str) -> CacheEntry:
        tmp = self.root / "tmp" / f"{key}.{os.getpid()}.part"
        digest = hashlib.sha256()
        size = 0
        get = self._session.get if self._session is not None else requests.get
        try:
            with get(ref.url, stream=True, timeout=_TIMEOUT) as resp:
                if resp.status_code >= 400:
                    raise NetworkError(
                        f"GET {ref.url} returned {resp.status_code}", source=ref.name
                    )
                with open(tmp, "wb") as fh:
                    for chunk in resp.iter_content(_CHUNK):
                        fh.write(chunk)
                        digest.update(chunk)
                        size += len(chunk)
        except requests.RequestException as exc:
            tmp.unlink(missing_ok=True)
            raise NetworkError(f"GET {ref.url} failed: {exc}", source=ref.name) from exc

        actual = digest.hexdigest()
        if ref.checksum is not None and actual != ref.checksum:
            os.replace(tmp, self.root / "quarantine" / key)
            raise IntegrityFailure(
                f"{ref.url}: expected sha256 {ref.checksum}, got {actual}; "
                "bytes moved to quarantine",
                source=ref.name,
            )

        os.replace(tmp, self._object_path(key))
        meta = {
            "url": ref.url,
            "sha256": actual,
            "size": size,
            "fetched_at": time.time(),
            "media_kind": ref.media_kind,
            "name": ref.name,
        }
        with self._manifest_lock():
            manifest = self._read_manifest()
            manifest["entries"][key] = meta
            self._write_manifest(manifest)
        return self._entry_from_meta(key, meta)
