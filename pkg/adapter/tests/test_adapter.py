from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from simnet_llm_adapter import (
    Adapter,
    AdapterConfig,
    MockModel,
    extract_action,
    fit_history,
)
from simnet_llm_adapter.model import ChatResult, ModelError

# Fixture copy of the basic task's reference solution; the end-to-end test
# fails if this drifts from the harness's shipped ccna_ref.
CCNA_SOLUTION = [
    "r1: interface eth0 ip 10.0.1.1/24",
    "r2: interface eth0 ip 10.0.1.2/24",
    "r2: interface eth1 ip 10.0.2.1/24",
    "r3: interface eth0 ip 10.0.2.2/24",
    "r3: interface eth1 ip 10.0.3.1/24",
    "r4: interface eth0 ip 10.0.3.2/24",
    "r1: router rip",
    "r1: rip network 10.0.0.0/16",
    "r2: router rip",
    "r2: rip network 10.0.0.0/16",
    "r3: router rip",
    "r3: rip network 10.0.0.0/16",
    "r4: router rip",
    "r4: rip network 10.0.0.0/16",
    "STOP",
]


def request(turn=1, history=(), remaining=1800.0):
    return {
        "task_prompt": "configure things",
        "turn": turn,
        "history": list(history),
        "remaining_turns": 100 - turn,
        "remaining_time_s": remaining,
    }


# --- unit: extraction --------------------------------------------------------


@pytest.mark.parametrize(
    "reply,expected",
    [
        ("r1: router rip", "r1: router rip"),
        ("  r1: show ip route \n", "r1: show ip route"),
        ("STOP", "STOP"),
        ("Let me think about this.", None),
        ("r1: router rip\nr2: router rip", None),
        ("", None),
        ("STOP because everything works", None),
    ],
)
def test_extract_action(reply, expected):
    assert extract_action(reply) == expected


def test_prose_gets_one_reminder_then_stop(tmp_path):
    script = tmp_path / "script.json"
    script.write_text(json.dumps(["I will now configure RIP.", "Sounds good to me."]))
    adapter = Adapter(AdapterConfig(), MockModel(script))
    response = adapter.answer(request())
    assert response["action"] == "STOP"
    assert response["thought"] == "format_fallback"
    assert response["tokens_out"] > 0  # both attempts accounted


def test_reminder_can_rescue_format(tmp_path):
    script = tmp_path / "script.json"
    script.write_text(json.dumps(["something rambling", "r1: router rip"]))
    adapter = Adapter(AdapterConfig(), MockModel(script))
    response = adapter.answer(request())
    assert response["action"] == "r1: router rip"


class ExplodingModel:
    def complete(self, messages, timeout_s):
        raise ModelError("boom")

    def close(self):
        pass


def test_api_error_becomes_stop():
    adapter = Adapter(AdapterConfig(), ExplodingModel())
    response = adapter.answer(request())
    assert response == {
        "action": "STOP",
        "tokens_in": 0,
        "tokens_out": 0,
        "thought": "api_error",
    }


# --- unit: truncation --------------------------------------------------------


def test_truncation_drops_oldest_first():
    history = [
        {"action": f"a{i}", "observation_text": "x" * 400} for i in range(50)
    ]
    kept = fit_history(history, task_prompt="p" * 40, system_prompt="s" * 40,
                       budget_tokens=1000)
    assert kept
    assert kept == history[len(history) - len(kept):]
    assert kept[-1]["action"] == "a49"


def test_truncation_noop_within_budget():
    history = [{"action": "a", "observation_text": "b"}]
    assert fit_history(history, "p", "s", 120000) == history


def test_budget_must_be_positive():
    with pytest.raises(ValueError):
        AdapterConfig(context_budget_tokens=0)


# --- unit: protocol conformance ----------------------------------------------


def validate_response_schema(obj):
    assert isinstance(obj, dict)
    assert isinstance(obj.get("action"), str) and obj["action"]
    for key in ("tokens_in", "tokens_out"):
        if key in obj:
            assert isinstance(obj[key], int) and obj[key] >= 0
    if "thought" in obj:
        assert isinstance(obj["thought"], str)


def test_every_response_validates(tmp_path):
    script = tmp_path / "script.json"
    script.write_text(json.dumps(["r1: router rip", "garbage reply", "STOP"]))
    adapter = Adapter(AdapterConfig(), MockModel(script))
    for turn in range(1, 4):
        validate_response_schema(adapter.answer(request(turn=turn)))


def test_mock_adapter_deterministic(tmp_path):
    script = tmp_path / "script.json"
    script.write_text(json.dumps(CCNA_SOLUTION))
    runs = []
    for _ in range(2):
        adapter = Adapter(AdapterConfig(), MockModel(script))
        runs.append([adapter.answer(request(turn=t)) for t in range(1, 17)])
    assert runs[0] == runs[1]


# --- end to end through the harness CLI --------------------------------------


def run_harness(agent_spec: str, out_dir: Path):
    proc = subprocess.run(
        [
            sys.executable, "-m", "simnetbench.cli", "run",
            "--task", "ccna_rip", "--agent", agent_spec,
            "--reps", "1", "--out", str(out_dir),
        ],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    (trace_path,) = out_dir.glob("*.trace")
    rows = [json.loads(line) for line in trace_path.read_text().splitlines()]
    return {row["type"]: row for row in rows}, rows


def score_row(rows_by_type):
    row = dict(rows_by_type["score"])
    row.pop("type", None)
    return row


def test_mock_episode_matches_builtin_replay(tmp_path):
    script = tmp_path / "script.json"
    script.write_text(json.dumps(CCNA_SOLUTION))

    adapter_spec = f"subprocess:{sys.executable} -m simnet_llm_adapter --mock {script}"
    adapter_rows, adapter_all = run_harness(adapter_spec, tmp_path / "adapter")
    builtin_rows, _ = run_harness("builtin:replay:ccna_ref", tmp_path / "builtin")

    assert score_row(adapter_rows) == score_row(builtin_rows)
    assert adapter_rows["terminal"]["final_digest"] == builtin_rows["terminal"]["final_digest"]
    assert adapter_rows["terminal"]["reason"] == "agent_stop"
    # Client-side token accounting reached the trace.
    turn_rows = [r for r in adapter_all if r["type"] == "turn"]
    assert all(r["tokens_in"] > 0 for r in turn_rows[:-1])


def test_prose_only_mock_ends_via_stop_fallback(tmp_path):
    script = tmp_path / "script.json"
    script.write_text(json.dumps(["I think we should start with RIP."] * 6))
    adapter_spec = f"subprocess:{sys.executable} -m simnet_llm_adapter --mock {script}"
    rows, all_rows = run_harness(adapter_spec, tmp_path / "prose")
    assert rows["terminal"]["reason"] == "agent_stop"
    turn_rows = [r for r in all_rows if r["type"] == "turn"]
    assert [r["action"] for r in turn_rows] == ["STOP"]
    assert all("protocol" not in r["observation_text"] for r in turn_rows)


def test_tcp_transport_serves_an_episode(tmp_path):
    import socket
    import subprocess
    import time

    script = tmp_path / "script.json"
    script.write_text(json.dumps(["r1: show ip route", "STOP"]))
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    server = subprocess.Popen(
        [sys.executable, "-m", "simnet_llm_adapter", "--mock", str(script),
         "--listen", str(port)],
    )
    try:
        deadline = time.monotonic() + 10
        while time.monotonic() < deadline:
            try:
                socket.create_connection(("127.0.0.1", port), timeout=0.2).close()
                break
            except OSError:
                time.sleep(0.05)
        rows, all_rows = run_harness(f"tcp:127.0.0.1:{port}", tmp_path / "tcp")
        assert rows["terminal"]["reason"] == "agent_stop"
        turn_rows = [r for r in all_rows if r["type"] == "turn"]
        assert turn_rows[0]["action"] == "r1: show ip route"
    finally:
        server.terminate()
        server.wait(timeout=5)
