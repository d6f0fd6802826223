from __future__ import annotations

import json
import socket
import sys
import textwrap
import threading

import pytest

from simnetbench import run_episode
from simnetbench.agents import AgentRequest
from simnetbench.errors import AgentProtocolError, AgentTimeout
from simnetbench.wire import (
    SubprocessAgent,
    TcpAgent,
    _FrameReader,
    encode_frame,
    parse_response,
    request_obj,
)

ECHO_AGENT = textwrap.dedent(
    """
    import json, sys
    def read_frame(stream):
        length = int(stream.readline())
        return json.loads(stream.read(length))
    def write_frame(stream, obj):
        payload = json.dumps(obj).encode()
        stream.write(str(len(payload)).encode() + b"\\n" + payload)
        stream.flush()
    while True:
        try:
            req = read_frame(sys.stdin.buffer)
        except Exception:
            break
        turn = req["turn"]
        action = "r1: show ip route" if turn < 3 else "STOP"
        write_frame(sys.stdout.buffer, {"action": action, "tokens_in": 10, "tokens_out": 2})
    """
)

GARBAGE_AGENT = "import sys; sys.stdout.write('not a frame at all'); sys.stdout.flush(); sys.stdin.read()"


def test_frame_round_trip():
    blob = encode_frame({"a": 1})
    head, _, payload = blob.partition(b"\n")
    assert int(head) == len(payload)
    assert json.loads(payload) == {"a": 1}


def test_parse_response_validation():
    assert parse_response({"action": "STOP"}).action == "STOP"
    resp = parse_response({"action": "r1: show run", "tokens_in": 3, "thought": "hm"})
    assert resp.tokens_in == 3 and resp.thought == "hm"
    for bad in [
        "nope",
        {},
        {"action": ""},
        {"action": 7},
        {"action": "x", "tokens_in": -1},
        {"action": "x", "tokens_out": "many"},
        {"action": "x", "thought": 4},
    ]:
        with pytest.raises(AgentProtocolError):
            parse_response(bad)


def test_request_obj_carries_full_history():
    request = AgentRequest(
        task_prompt="prompt",
        turn=3,
        history=(("a1", "o1"), ("a2", "o2")),
        remaining_turns=97,
        remaining_time_s=12.5,
    )
    obj = request_obj(request)
    assert obj["history"] == [
        {"action": "a1", "observation_text": "o1"},
        {"action": "a2", "observation_text": "o2"},
    ]
    assert obj["turn"] == 3


def test_frame_reader_rejects_garbage():
    read_fd, write_fd = _pipe_with(b"xyz\n{}")
    reader = _FrameReader(read_fd)
    with pytest.raises(AgentProtocolError):
        reader.read_frame(1.0)


def test_frame_reader_times_out():
    import os

    read_fd, write_fd = os.pipe()
    reader = _FrameReader(read_fd)
    with pytest.raises(AgentTimeout):
        reader.read_frame(0.1)
    os.close(read_fd)
    os.close(write_fd)


def _pipe_with(data: bytes):
    import os

    read_fd, write_fd = os.pipe()
    os.write(write_fd, data)
    os.close(write_fd)
    return read_fd, write_fd


def test_subprocess_agent_episode(ccna, tmp_path):
    script = tmp_path / "echo_agent.py"
    script.write_text(ECHO_AGENT, encoding="utf-8")
    agent = SubprocessAgent(f"{sys.executable} {script}", agent_id="echo")
    trace = run_episode(ccna, agent)
    assert trace.terminal.reason == "agent_stop"
    assert len(trace.records) == 3
    assert trace.records[0].tokens_in == 10
    assert not trace.synthetic


def test_subprocess_garbage_becomes_protocol_errors(ccna, tmp_path):
    script = tmp_path / "garbage_agent.py"
    script.write_text(GARBAGE_AGENT, encoding="utf-8")
    agent = SubprocessAgent(f"{sys.executable} {script}")
    request = AgentRequest(
        task_prompt="", turn=1, history=(), remaining_turns=9, remaining_time_s=5.0
    )
    with pytest.raises(AgentProtocolError):
        agent.next_action(request)
    agent.close()


THOUGHTFUL_AGENT = textwrap.dedent(
    """
    import json, sys
    def read_frame(stream):
        length = int(stream.readline())
        return json.loads(stream.read(length))
    def write_frame(stream, obj):
        payload = json.dumps(obj).encode()
        stream.write(str(len(payload)).encode() + b"\\n" + payload)
        stream.flush()
    while True:
        try:
            req = read_frame(sys.stdin.buffer)
        except Exception:
            break
        if req["turn"] == 1:
            write_frame(sys.stdout.buffer,
                        {"action": "r1: show run", "thought": "let me check"})
        else:
            write_frame(sys.stdout.buffer, {"action": "STOP"})
    """
)


def test_thought_field_stored_verbatim_in_trace(ccna, tmp_path):
    from simnetbench import read_trace

    script = tmp_path / "thoughtful_agent.py"
    script.write_text(THOUGHTFUL_AGENT, encoding="utf-8")
    agent = SubprocessAgent(f"{sys.executable} {script}", agent_id="thoughtful")
    trace = run_episode(ccna, agent, out_dir=tmp_path)
    assert trace.records[0].thought == "let me check"
    loaded = read_trace(tmp_path / trace.filename())
    assert loaded.records[0].thought == "let me check"
    assert loaded.records[1].thought is None


def test_tcp_agent_round_trip():
    server = socket.create_server(("127.0.0.1", 0))
    port = server.getsockname()[1]

    def serve():
        conn, _ = server.accept()
        with conn:
            reader = _FrameReader(conn.fileno())
            reader.read_frame(5.0)
            conn.sendall(encode_frame({"action": "STOP", "tokens_out": 1}))

    thread = threading.Thread(target=serve, daemon=True)
    thread.start()
    agent = TcpAgent("127.0.0.1", port)
    response = agent.next_action(
        AgentRequest(task_prompt="", turn=1, history=(), remaining_turns=1,
                     remaining_time_s=5.0)
    )
    assert response.action == "STOP" and response.tokens_out == 1
    agent.close()
    thread.join(timeout=2)
    server.close()
