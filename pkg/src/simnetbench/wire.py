"""Length-delimited JSON wire protocol for external agents.

Frame layout: an ASCII decimal byte count, a newline, then exactly that many
bytes of UTF-8 JSON. One request per turn carries the full history; the
response carries a single action (or STOP) plus optional token counts and a
free-text thought. Every malformed byte sequence maps to AgentProtocolError,
never to a crash.
"""

from __future__ import annotations

import json
import os
import select
import shlex
import socket
import subprocess
import time

from .agents import AgentHandle, AgentRequest, AgentResponse
from .errors import AgentProtocolError, AgentTimeout

MAX_FRAME_BYTES = 16 * 1024 * 1024
DEFAULT_DEADLINE_S = 60.0


def encode_frame(obj) -> bytes:
    payload = json.dumps(obj, sort_keys=True).encode("utf-8")
    return str(len(payload)).encode("ascii") + b"\n" + payload


def request_obj(request: AgentRequest) -> dict:
    return {
        "task_prompt": request.task_prompt,
        "turn": request.turn,
        "history": [
            {"action": a, "observation_text": o} for a, o in request.history
        ],
        "remaining_turns": request.remaining_turns,
        "remaining_time_s": request.remaining_time_s,
    }


def parse_response(obj) -> AgentResponse:
    if not isinstance(obj, dict):
        raise AgentProtocolError("response is not an object")
    action = obj.get("action")
    if not isinstance(action, str) or action == "":
        raise AgentProtocolError("response action must be a non-empty string")
    tokens_in = obj.get("tokens_in", 0)
    tokens_out = obj.get("tokens_out", 0)
    for name, value in (("tokens_in", tokens_in), ("tokens_out", tokens_out)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise AgentProtocolError(f"{name} must be a nonnegative integer")
    thought = obj.get("thought")
    if thought is not None and not isinstance(thought, str):
        raise AgentProtocolError("thought must be a string when present")
    return AgentResponse(
        action=action, tokens_in=tokens_in, tokens_out=tokens_out, thought=thought
    )


class _FrameReader:
    """Incremental frame decoder over a readable file descriptor."""

    def __init__(self, fd: int):
        self.fd = fd
        self.buffer = b""

    def _try_extract(self) -> bytes | None:
        if b"\n" not in self.buffer:
            if self.buffer and not self.buffer.isdigit():
                raise AgentProtocolError(f"bad frame length {self.buffer[:32]!r}")
            if len(self.buffer) > 32:
                raise AgentProtocolError("frame length line too long")
            return None
        head, _, rest = self.buffer.partition(b"\n")
        if not head.isdigit():
            raise AgentProtocolError(f"bad frame length {head[:32]!r}")
        length = int(head)
        if length > MAX_FRAME_BYTES:
            raise AgentProtocolError(f"frame too large ({length} bytes)")
        if len(rest) < length:
            return None
        self.buffer = rest[length:]
        return rest[:length]

    def read_frame(self, deadline_s: float) -> dict:
        deadline = time.monotonic() + deadline_s
        while True:
            frame = self._try_extract()
            if frame is not None:
                try:
                    return json.loads(frame.decode("utf-8"))
                except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                    raise AgentProtocolError(f"frame is not valid JSON: {exc}")
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise AgentTimeout("agent deadline exceeded")
            ready, _, _ = select.select([self.fd], [], [], remaining)
            if not ready:
                raise AgentTimeout("agent deadline exceeded")
            chunk = os.read(self.fd, 65536)
            if chunk == b"":
                raise AgentProtocolError("agent closed its output stream")
            self.buffer += chunk


class SubprocessAgent(AgentHandle):
    """Agent launched as a child process speaking frames on stdio."""

    def __init__(self, command_line: str, deadline_s: float = DEFAULT_DEADLINE_S,
                 agent_id: str = "subprocess"):
        super().__init__(agent_id, transport="subprocess-stdio",
                         deadline_s=deadline_s, synthetic=False)
        self.proc = subprocess.Popen(
            shlex.split(command_line),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
        )
        self.reader = _FrameReader(self.proc.stdout.fileno())

    def next_action(self, request: AgentRequest) -> AgentResponse:
        if self.proc.poll() is not None:
            raise AgentProtocolError("agent process exited")
        try:
            self.proc.stdin.write(encode_frame(request_obj(request)))
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise AgentProtocolError(f"agent stdin closed: {exc}")
        deadline = min(self.deadline_s or DEFAULT_DEADLINE_S,
                       max(request.remaining_time_s, 0.1))
        return parse_response(self.reader.read_frame(deadline))

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()


class TcpAgent(AgentHandle):
    """Agent reachable over a TCP socket; the harness connects."""

    def __init__(self, host: str, port: int, deadline_s: float = DEFAULT_DEADLINE_S,
                 agent_id: str | None = None):
        super().__init__(agent_id or f"tcp-{host}-{port}", transport="tcp",
                         deadline_s=deadline_s, synthetic=False)
        self.sock = socket.create_connection((host, port), timeout=deadline_s)
        self.sock.setblocking(True)
        self.reader = _FrameReader(self.sock.fileno())

    def next_action(self, request: AgentRequest) -> AgentResponse:
        try:
            self.sock.sendall(encode_frame(request_obj(request)))
        except OSError as exc:
            raise AgentProtocolError(f"agent socket closed: {exc}")
        deadline = min(self.deadline_s or DEFAULT_DEADLINE_S,
                       max(request.remaining_time_s, 0.1))
        return parse_response(self.reader.read_frame(deadline))

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass
