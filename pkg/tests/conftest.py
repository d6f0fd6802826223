from __future__ import annotations

from importlib import resources

import pytest

from simnetbench import apply_sequence, initialize, parse_task, provision
from simnetbench.agents import load_solution

import json

TASK_REFS = {
    "ccna_rip": "ccna_ref",
    "ccnp_ospf": "ccnp_ospf_ref",
    "ccnp_ospf_adjacency": "ccnp_adjacency_ref",
    "ccie_bgp": "ccie_bgp_ref",
    "ccie_bgp_filter": "ccie_bgp_filter_ref",
}


def shipped_task_doc(name: str) -> dict:
    text = (
        resources.files("simnetbench")
        .joinpath(f"data/tasks/{name}.json")
        .read_text(encoding="utf-8")
    )
    return json.loads(text)


@pytest.fixture(scope="session")
def tasks():
    return {name: parse_task(shipped_task_doc(name)) for name in TASK_REFS}


@pytest.fixture(scope="session")
def solutions():
    return {name: load_solution(ref) for name, ref in TASK_REFS.items()}


@pytest.fixture(scope="session")
def solved_states(tasks, solutions):
    """Final states after applying each reference solution to a fresh SUT."""
    out = {}
    for name, task in tasks.items():
        state = initialize(provision(task.topology))
        out[name] = apply_sequence(state, solutions[name])
    return out


@pytest.fixture()
def ccna(tasks):
    return tasks["ccna_rip"]
