"""Prompt template assets and tolerant JSON extraction from model replies."""

from __future__ import annotations

import json
import re
from functools import lru_cache
from importlib import resources
from string import Template
from typing import Any

from .providers import ChatProvider, Message


class ResponseFormatError(ValueError):
    """A provider reply could not be parsed or failed validation."""


@lru_cache(maxsize=None)
def _asset(name: str) -> str:
    return resources.files("mooddx").joinpath("data", "prompts", name).read_text(encoding="utf-8")


def template(name: str) -> Template:
    return Template(_asset(f"{name}.txt"))


def render(name: str, **fields: Any) -> str:
    """Fill a template; a missing placeholder is a programming error."""
    return template(name).substitute({k: str(v) for k, v in fields.items()}).strip()


@lru_cache(maxsize=None)
def action_descriptions() -> dict[str, str]:
    return json.loads(_asset("actions.json"))


_FENCE = re.compile(r"^```[a-zA-Z]*\s*|\s*```$")


def extract_json(text: str) -> Any:
    """Parse the JSON value in a reply, tolerating code fences and prose around it."""
    stripped = _FENCE.sub("", text.strip()).strip()
    try:
        return json.loads(stripped)
    except json.JSONDecodeError:
        pass
    starts = [i for i in (stripped.find("{"), stripped.find("[")) if i >= 0]
    if not starts:
        raise ResponseFormatError("reply contains no JSON value")
    decoder = json.JSONDecoder()
    try:
        value, _ = decoder.raw_decode(stripped[min(starts):])
    except json.JSONDecodeError as exc:
        raise ResponseFormatError(f"invalid JSON: {exc.msg} at position {exc.pos}") from None
    return value


def ask_with_repair(provider: ChatProvider, messages: list[Message], parse, *, repairs: int = 1):
    """Call the provider and parse the reply; on failure re-prompt with the error.

    ``parse`` maps reply text to a value and raises ``ResponseFormatError``.
    Returns ``(value, messages)`` where messages includes every exchanged turn.
    """
    messages = list(messages)
    for attempt in range(repairs + 1):
        reply = provider.complete(messages)
        messages.append({"role": "assistant", "content": reply})
        try:
            return parse(reply), messages
        except ResponseFormatError as exc:
            if attempt == repairs:
                raise
            messages.append({"role": "user", "content": render("json_repair", error=str(exc))})
    raise AssertionError("unreachable")
