from __future__ import annotations

import pytest

from simnetbench import run_episode
from simnetbench.agents import (
    AgentRequest,
    BUILTIN_NAMES,
    builtin,
    fixation_fixture,
    load_solution,
)
from simnetbench.errors import UnknownAgent


def req(turn):
    return AgentRequest(
        task_prompt="", turn=turn, history=(), remaining_turns=100 - turn,
        remaining_time_s=1800.0,
    )


def test_builtin_names_complete(tasks):
    for name in BUILTIN_NAMES:
        params = {"replay": "ccna_ref"}.get(name)
        handle = builtin(name, params, task=tasks["ccna_rip"])
        assert handle.synthetic


def test_unknown_builtin_rejected(tasks):
    with pytest.raises(UnknownAgent):
        builtin("surprise", task=tasks["ccna_rip"])


def test_replay_emits_script_then_stop(tasks):
    handle = builtin("replay", "ccna_ref", task=tasks["ccna_rip"])
    script = load_solution("ccna_ref")
    actions = [handle.next_action(req(t)).action for t in range(1, len(script) + 3)]
    assert actions[: len(script)] == script
    assert actions[len(script):] == ["STOP", "STOP"]


def test_looper_never_stops(tasks):
    handle = builtin("looper", task=tasks["ccna_rip"])
    assert {handle.next_action(req(t)).action for t in range(1, 50)} == {
        "r1: show ip route"
    }


def test_random_seeded_reproducible(tasks):
    a = builtin("random", "seed=9,turns=8", task=tasks["ccna_rip"])
    b = builtin("random", "seed=9,turns=8", task=tasks["ccna_rip"])
    actions_a = [a.next_action(req(t)).action for t in range(1, 12)]
    actions_b = [b.next_action(req(t)).action for t in range(1, 12)]
    assert actions_a == actions_b
    assert actions_a[-1] == "STOP"


def test_random_needs_task():
    with pytest.raises(UnknownAgent):
        builtin("random", "seed=1")


def test_builtin_determinism_trace_level(tasks):
    task = tasks["ccna_rip"]
    one = run_episode(task, builtin("random", "seed=4", task=task))
    two = run_episode(task, builtin("random", "seed=4", task=task))
    strip = lambda t: [
        (r.turn, r.action, r.accepted, r.state_digest, r.observation_text)
        for r in t.records
    ]
    assert strip(one) == strip(two)
    assert one.score == two.score


def test_fixture_scripts_shape(tasks):
    task = tasks["ccna_rip"]
    vandal = builtin("vandal", task=task)
    script = [vandal.next_action(req(t)).action for t in range(1, 7)]
    assert script[-1] == "STOP"
    assert script[1].endswith("passive-interface default")
    fix = fixation_fixture(task)
    reads = [fix.next_action(req(t)).action for t in range(1, 11)]
    assert len(set(reads)) == 10
