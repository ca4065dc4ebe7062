"""On-disk deterministic cache for provider calls.

Layout: ``<root>/<sha256>.json`` holding the response text plus the key
material it was computed from. Writers insert atomically and never
overwrite; a second insert under the same key with a different value is a
determinism violation and raises.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

CACHE_ENV = "MOODDX_CACHE_DIR"


class CacheConflictError(RuntimeError):
    pass


class ProviderError(RuntimeError):
    def __init__(self, message: str, attempts: int = 1):
        super().__init__(f"{message} (after {attempts} attempt{'s' if attempts != 1 else ''})")
        self.attempts = attempts


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def cache_key(provider_id: str, model_id: str, payload: Any) -> str:
    material = canonical_json({"provider": provider_id, "model": model_id, "payload": payload})
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


@dataclass
class CacheStats:
    hits: int = 0
    misses: int = 0
    writes: int = 0

    def to_dict(self) -> dict:
        return {"hits": self.hits, "misses": self.misses, "writes": self.writes}


class ProviderCache:
    def __init__(self, root: str | Path | None = None, *, in_memory: bool = False):
        self._memory: dict[str, str] | None = {} if in_memory else None
        self.root = None if in_memory else Path(root or os.environ.get(CACHE_ENV, "cache"))
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
        self.stats = CacheStats()
        self._lock = threading.Lock()

    @classmethod
    def memory(cls) -> "ProviderCache":
        return cls(in_memory=True)

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, key: str) -> str | None:
        if self._memory is not None:
            value = self._memory.get(key)
        else:
            path = self._path(key)
            value = json.loads(path.read_text(encoding="utf-8"))["response"] if path.exists() else None
        with self._lock:
            if value is None:
                self.stats.misses += 1
            else:
                self.stats.hits += 1
        return value

    def put(self, key: str, value: str, key_material: Any = None) -> None:
        if self._memory is not None:
            with self._lock:
                existing = self._memory.setdefault(key, value)
                if existing != value:
                    raise CacheConflictError(f"cache key {key} already holds a different response")
                self.stats.writes += 1
            return
        record = {"key": key, "key_material": key_material, "response": value, "created_at": time.time()}
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump(record, f, ensure_ascii=False)
            try:
                os.link(tmp, self._path(key))
            except FileExistsError:
                existing = json.loads(self._path(key).read_text(encoding="utf-8"))["response"]
                if existing != value:
                    raise CacheConflictError(f"cache key {key} already holds a different response") from None
                return
        finally:
            os.unlink(tmp)
        with self._lock:
            self.stats.writes += 1

    def __len__(self) -> int:
        if self._memory is not None:
            return len(self._memory)
        return sum(1 for p in self.root.glob("*.json") if not p.name.startswith(".tmp-"))


def cache_lookup_or_call(
    cache: ProviderCache,
    key_material: dict,
    call: Callable[[], str],
    retries: int = 0,
) -> str:
    """Return the cached response or invoke ``call`` and store its result.

    ``key_material`` must contain ``provider``, ``model`` and ``payload``.
    """
    key = cache_key(key_material["provider"], key_material["model"], key_material["payload"])
    hit = cache.get(key)
    if hit is not None:
        return hit
    attempts = 0
    last: Exception | None = None
    while attempts <= retries:
        attempts += 1
        try:
            value = call()
            break
        except Exception as exc:  # noqa: BLE001 - any provider failure is retried
            last = exc
    else:
        raise ProviderError(f"provider call failed: {last}", attempts) from last
    cache.put(key, value, key_material)
    return value
