"""Chat model backends: a real HTTP client and a deterministic mock."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import httpx


class ModelError(Exception):
    """The backend could not produce a reply."""


@dataclass(frozen=True)
class ChatResult:
    text: str
    prompt_tokens: int
    completion_tokens: int


def approx_tokens(text: str) -> int:
    """Coarse deterministic token estimate used for budgeting and the mock."""
    return max(1, len(text) // 4)


class HttpChatModel:
    """OpenAI-style chat-completions client with a single retry."""

    def __init__(self, config):
        if not config.api_base:
            raise ModelError("LLM_API_BASE is not set")
        self.config = config
        headers = {}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        self.client = httpx.Client(base_url=config.api_base, headers=headers)

    def complete(self, messages, timeout_s: float) -> ChatResult:
        payload = {
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        }
        last_error = None
        for _ in range(2):
            try:
                response = self.client.post(
                    "/chat/completions", json=payload, timeout=timeout_s
                )
                response.raise_for_status()
                body = response.json()
                text = body["choices"][0]["message"]["content"]
                usage = body.get("usage", {})
                return ChatResult(
                    text=text,
                    prompt_tokens=int(usage.get("prompt_tokens", 0)),
                    completion_tokens=int(usage.get("completion_tokens", 0)),
                )
            except (httpx.HTTPError, KeyError, ValueError, TypeError) as exc:
                last_error = exc
        raise ModelError(f"chat completion failed: {last_error}")

    def close(self):
        self.client.close()


class MockModel:
    """Replays scripted replies in order; deterministic token accounting.

    The script file is a JSON list of reply strings; requests beyond the end
    of the script get "STOP".
    """

    def __init__(self, script_path: str | Path):
        self.replies = json.loads(Path(script_path).read_text(encoding="utf-8"))
        if not isinstance(self.replies, list):
            raise ModelError("mock script must be a JSON list of strings")
        self.cursor = 0

    def complete(self, messages, timeout_s: float) -> ChatResult:
        reply = self.replies[self.cursor] if self.cursor < len(self.replies) else "STOP"
        self.cursor += 1
        prompt_text = "\n".join(m["content"] for m in messages)
        return ChatResult(
            text=reply,
            prompt_tokens=approx_tokens(prompt_text),
            completion_tokens=approx_tokens(reply),
        )

    def close(self):
        pass
