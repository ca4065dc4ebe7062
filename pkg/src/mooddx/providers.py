"""LLM and embedding providers: HTTP clients, scripted replay, cache wrappers.

A chat provider maps ``(model id, message list, decode params)`` to response
text. Every provider exposes ``provider_id`` and ``model`` so cache keys never
alias across backends or model versions.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from typing import Any, Callable, Iterable, Protocol, Sequence

import numpy as np

from .cache import ProviderCache, ProviderError, cache_lookup_or_call, canonical_json

API_BASE_ENV = "MOODDX_API_BASE"
API_KEY_ENV = "MOODDX_API_KEY"
MODEL_ENV = "MOODDX_MODEL"
EMBED_MODEL_ENV = "MOODDX_EMBED_MODEL"

Message = dict[str, str]


class ChatProvider(Protocol):
    provider_id: str
    model: str

    def complete(self, messages: Sequence[Message], **params: Any) -> str: ...


class Embedder(Protocol):
    embedder_id: str

    def embed_raw(self, text: str) -> np.ndarray: ...


def prompt_hash(messages: Sequence[Message]) -> str:
    return hashlib.sha256(canonical_json(list(messages)).encode("utf-8")).hexdigest()


class ChatCompletionsProvider:
    """OpenAI-compatible ``/chat/completions`` client; provider defaults for decoding."""

    provider_id = "http-chat"

    def __init__(self, base_url: str | None = None, api_key: str | None = None, model: str | None = None, timeout: float = 120.0):
        self.base_url = (base_url or os.environ.get(API_BASE_ENV, "")).rstrip("/")
        if not self.base_url:
            raise ProviderError(f"no endpoint configured; set {API_BASE_ENV}")
        self.api_key = api_key or os.environ.get(API_KEY_ENV, "")
        self.model = model or os.environ.get(MODEL_ENV, "gpt-4o-2024-08-06")
        self.timeout = timeout

    def complete(self, messages: Sequence[Message], **params: Any) -> str:
        import httpx

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        body = {"model": self.model, "messages": list(messages), **params}
        try:
            resp = httpx.post(f"{self.base_url}/chat/completions", json=body, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise ProviderError(f"chat completion failed: {exc}") from exc


class ScriptedProvider:
    """Replays canned responses.

    Lookup order per call: ``by_hash`` (prompt hash of the full message
    list), then ``handler(messages)``, then the next entry of ``responses``.
    """

    provider_id = "scripted"

    def __init__(
        self,
        responses: Iterable[str] = (),
        *,
        handler: Callable[[Sequence[Message]], str] | None = None,
        by_hash: dict[str, str] | None = None,
        model: str = "scripted-v1",
    ):
        self._queue = list(responses)
        self.handler = handler
        self.by_hash = dict(by_hash or {})
        self.model = model
        self.calls: list[list[Message]] = []
        self._lock = threading.Lock()

    def complete(self, messages: Sequence[Message], **params: Any) -> str:
        with self._lock:
            self.calls.append([dict(m) for m in messages])
            h = prompt_hash(messages)
            if h in self.by_hash:
                return self.by_hash[h]
            if self.handler is not None:
                return self.handler(messages)
            if not self._queue:
                raise ProviderError("scripted provider has no response left")
            return self._queue.pop(0)


class FailingProvider:
    provider_id = "failing"

    def __init__(self, model: str = "none"):
        self.model = model
        self.calls = 0

    def complete(self, messages: Sequence[Message], **params: Any) -> str:
        self.calls += 1
        raise ProviderError("provider unavailable")


class CachedProvider:
    """Wraps a chat provider with the deterministic response cache."""

    def __init__(self, inner: ChatProvider, cache: ProviderCache, retries: int = 2):
        self.inner = inner
        self.cache = cache
        self.retries = retries
        self.provider_id = inner.provider_id
        self.model = inner.model

    def complete(self, messages: Sequence[Message], **params: Any) -> str:
        material = {
            "provider": self.provider_id,
            "model": self.model,
            "payload": {"messages": list(messages), "params": params},
        }
        return cache_lookup_or_call(self.cache, material, lambda: self.inner.complete(messages, **params), self.retries)


_TOKEN = re.compile(r"\w+", re.UNICODE)


class HashingEmbedder:
    """Offline embedder: hashed token counts, L2-normalised by the caller."""

    def __init__(self, dim: int = 8192):
        self.dim = dim
        self.embedder_id = f"hashing-{dim}"

    def _bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dim

    def embed_raw(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in _TOKEN.findall(text.lower()):
            vec[self._bucket(token)] += 1.0
        return vec


class HTTPEmbedder:
    """OpenAI-compatible ``/embeddings`` client (e.g. a served BGE-M3)."""

    def __init__(self, base_url: str | None = None, api_key: str | None = None, model: str | None = None, timeout: float = 60.0):
        self.base_url = (base_url or os.environ.get(API_BASE_ENV, "")).rstrip("/")
        if not self.base_url:
            raise ProviderError(f"no endpoint configured; set {API_BASE_ENV}")
        self.api_key = api_key or os.environ.get(API_KEY_ENV, "")
        self.model = model or os.environ.get(EMBED_MODEL_ENV, "bge-m3")
        self.embedder_id = f"http:{self.model}"
        self.timeout = timeout

    def embed_raw(self, text: str) -> np.ndarray:
        import httpx

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = httpx.post(f"{self.base_url}/embeddings", json={"model": self.model, "input": text}, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            return np.asarray(resp.json()["data"][0]["embedding"], dtype=np.float64)
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise ProviderError(f"embedding request failed: {exc}") from exc


class CachedEmbedder:
    def __init__(self, inner: Embedder, cache: ProviderCache, retries: int = 2):
        self.inner = inner
        self.cache = cache
        self.retries = retries
        self.embedder_id = inner.embedder_id

    def embed_raw(self, text: str) -> np.ndarray:
        material = {"provider": "embedder", "model": self.embedder_id, "payload": text}
        raw = cache_lookup_or_call(
            self.cache,
            material,
            lambda: json.dumps(self.inner.embed_raw(text).tolist()),
            self.retries,
        )
        return np.asarray(json.loads(raw), dtype=np.float64)
