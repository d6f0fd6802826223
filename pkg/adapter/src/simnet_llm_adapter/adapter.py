"""The serve loop: harness frames in, model calls, single-command replies out.

Protocol recap (mirrors the harness documentation; this package shares no
code with it): frames are `<decimal length>\\n<json>`; requests carry
task_prompt, turn, full history, remaining_turns, remaining_time_s; the
response is one action string plus token counts and an optional thought.
"""

from __future__ import annotations

import json
import re
import socket
import sys

from .config import AdapterConfig
from .model import ChatResult, ModelError, approx_tokens

ACTION_RE = re.compile(r"^[^\s:]+:\s*\S.*$")
FORMAT_REMINDER = (
    "Format reminder: reply with exactly one line, either `<node>: <command>` "
    "or STOP. No commentary."
)


def extract_action(reply: str) -> str | None:
    """Strict single-line extraction: one command or STOP, else nothing."""
    stripped = reply.strip()
    if not stripped or "\n" in stripped:
        return None
    if stripped == "STOP":
        return "STOP"
    if ACTION_RE.fullmatch(stripped):
        return stripped
    return None


def fit_history(history, task_prompt: str, system_prompt: str, budget_tokens: int):
    """Drop oldest (action, observation) pairs until the rendered
    conversation fits the context budget; the task prompt always survives."""
    kept = list(history)
    while kept:
        fixed = approx_tokens(system_prompt) + approx_tokens(task_prompt)
        spent = sum(
            approx_tokens(item["action"]) + approx_tokens(item["observation_text"])
            for item in kept
        )
        if fixed + spent <= budget_tokens:
            break
        kept.pop(0)
    return kept


def build_messages(config: AdapterConfig, request: dict, reminder: bool = False):
    messages = [{"role": "system", "content": config.system_prompt}]
    messages.append({"role": "user", "content": request["task_prompt"]})
    kept = fit_history(
        request.get("history", []),
        request["task_prompt"],
        config.system_prompt,
        config.context_budget_tokens,
    )
    for item in kept:
        messages.append({"role": "assistant", "content": item["action"]})
        messages.append({"role": "user", "content": item["observation_text"]})
    prompt_tail = f"Turn {request['turn']}. Your next command:"
    if reminder:
        prompt_tail = FORMAT_REMINDER + "\n" + prompt_tail
    messages.append({"role": "user", "content": prompt_tail})
    return messages


class Adapter:
    def __init__(self, config: AdapterConfig, model):
        self.config = config
        self.model = model

    def answer(self, request: dict) -> dict:
        """One response per request; never raises."""
        timeout = max(1.0, min(30.0, float(request.get("remaining_time_s", 30.0)) - 1.0))
        tokens_in = tokens_out = 0
        try:
            result = self.model.complete(build_messages(self.config, request), timeout)
            tokens_in += result.prompt_tokens
            tokens_out += result.completion_tokens
            action = extract_action(result.text)
            if action is None:
                retry = self.model.complete(
                    build_messages(self.config, request, reminder=True), timeout
                )
                tokens_in += retry.prompt_tokens
                tokens_out += retry.completion_tokens
                action = extract_action(retry.text)
                if action is None:
                    return {
                        "action": "STOP",
                        "tokens_in": tokens_in,
                        "tokens_out": tokens_out,
                        "thought": "format_fallback",
                    }
        except ModelError:
            return {
                "action": "STOP",
                "tokens_in": tokens_in,
                "tokens_out": tokens_out,
                "thought": "api_error",
            }
        return {"action": action, "tokens_in": tokens_in, "tokens_out": tokens_out}


# --- framing ----------------------------------------------------------------


def read_frame(stream) -> dict | None:
    head = stream.readline()
    if head == b"":
        return None
    length = int(head)
    payload = stream.read(length)
    return json.loads(payload)


def write_frame(stream, obj) -> None:
    payload = json.dumps(obj, sort_keys=True).encode("utf-8")
    stream.write(str(len(payload)).encode("ascii") + b"\n" + payload)
    stream.flush()


def serve_stdio(adapter: Adapter) -> None:
    stdin = sys.stdin.buffer
    stdout = sys.stdout.buffer
    while True:
        try:
            request = read_frame(stdin)
        except (ValueError, json.JSONDecodeError):
            break
        if request is None:
            break
        write_frame(stdout, adapter.answer(request))


def serve_tcp(adapter: Adapter, port: int, host: str = "127.0.0.1") -> None:
    """Listen for the harness (it connects to us), one session at a time."""
    server = socket.create_server((host, port))
    try:
        while True:
            conn, _ = server.accept()
            with conn:
                stream_in = conn.makefile("rb")
                stream_out = conn.makefile("wb")
                while True:
                    try:
                        request = read_frame(stream_in)
                    except (ValueError, json.JSONDecodeError):
                        break
                    if request is None:
                        break
                    write_frame(stream_out, adapter.answer(request))
    except KeyboardInterrupt:
        pass
    finally:
        server.close()
