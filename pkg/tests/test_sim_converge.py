from __future__ import annotations

import pytest

from simnetbench import apply_config, apply_sequence, initialize, provision
from simnetbench.netstate import SutStatus
from simnetbench.task import InfraCommand

from oracles import expected_protocol_ribs


def chain_topology(n):
    commands = [InfraCommand(verb="add_node", node=f"r{i}") for i in range(1, n + 1)]
    for i in range(1, n):
        commands.append(
            InfraCommand(
                verb="add_link", endpoints=((f"r{i}", "eth1"), (f"r{i+1}", "eth0"))
            )
        )
    commands.append(InfraCommand(verb="deploy"))
    return commands


def rib_rows(state, node, protocol):
    return {
        (r.prefix, r.next_hop, r.metric)
        for r in state.rib[node]
        if r.protocol == protocol
    }


def test_two_node_rip_against_bellman_ford_oracle():
    # Hand-run Bellman-Ford: r2 originates 10.0.0.0/24 and 10.0.9.0/24 at
    # distance 0; one relaxation gives r1 both at metric 1 via 10.0.0.2.
    topo = [
        InfraCommand(verb="add_node", node="r1"),
        InfraCommand(verb="add_node", node="r2"),
        InfraCommand(verb="add_link", endpoints=(("r1", "eth0"), ("r2", "eth0"))),
        InfraCommand(verb="add_link", endpoints=(("r2", "eth1"), ("r1", "eth1"))),
        InfraCommand(verb="deploy"),
    ]
    state = initialize(provision(topo))
    state = apply_sequence(
        state,
        [
            "r1: interface eth0 ip 10.0.0.1/24",
            "r2: interface eth0 ip 10.0.0.2/24",
            "r2: interface eth1 ip 10.0.9.1/24",
            "r1: router rip",
            "r1: rip network 10.0.0.0/16",
            "r2: router rip",
            "r2: rip network 10.0.0.0/16",
        ],
    )
    assert state.status is SutStatus.STABLE
    assert rib_rows(state, "r1", "rip") == {("10.0.9.0/24", "10.0.0.2", 1)}
    assert rib_rows(state, "r2", "rip") == set()


def test_rip_hop_limit_cuts_off_distant_prefixes():
    n = 18
    state = initialize(provision(chain_topology(n)))
    commands = []
    for i in range(1, n):
        commands.append(f"r{i}: interface eth1 ip 10.0.{i}.1/24")
        commands.append(f"r{i+1}: interface eth0 ip 10.0.{i}.2/24")
    for i in range(1, n + 1):
        commands.append(f"r{i}: router rip")
        commands.append(f"r{i}: rip network 10.0.0.0/8")
    state = apply_sequence(state, commands)
    assert state.status is SutStatus.STABLE
    # The far-end link prefix 10.0.17.0/24 is 16 hops from r1: suppressed.
    assert not any(r.prefix == "10.0.17.0/24" for r in state.rib["r1"])
    # 15 hops away is still allowed.
    assert any(
        r.prefix == "10.0.16.0/24" and r.metric == 15 for r in state.rib["r1"]
    )


def test_empty_protocol_fixed_point_gives_connected_only():
    topo = chain_topology(2)
    state = initialize(provision(topo))
    state = apply_config(state, "r1: interface eth1 ip 10.0.1.1/24")
    assert state.status is SutStatus.STABLE
    assert [r.protocol for r in state.rib["r1"]] == ["connected"]
    assert state.rib["r2"] == ()


def test_passive_default_drops_adjacency_and_counts_flap():
    topo = chain_topology(2)
    state = apply_sequence(
        initialize(provision(topo)),
        [
            "r1: interface eth1 ip 10.0.1.1/24",
            "r2: interface eth0 ip 10.0.1.2/24",
            "r1: router ospf 1",
            "r1: ospf network 10.0.1.0/24 area 0",
            "r2: router ospf 1",
            "r2: ospf network 10.0.1.0/24 area 0",
        ],
    )
    assert state.ospf_adjacencies == (("r1", "r2"),)
    flapped = apply_config(state, "r1: passive-interface default")
    assert flapped.status is SutStatus.STABLE
    assert flapped.ospf_adjacencies == ()
    assert flapped.flap_counters == {("r1", "r2"): 1}
    # Re-enabling restores the adjacency; the flap count stays.
    restored = apply_config(flapped, "r1: no passive-interface eth1")
    assert restored.ospf_adjacencies == (("r1", "r2"),)
    assert restored.flap_counters == {("r1", "r2"): 1}


def test_reapplying_passive_idiom_flaps_again():
    topo = chain_topology(2)
    base = apply_sequence(
        initialize(provision(topo)),
        [
            "r1: interface eth1 ip 10.0.1.1/24",
            "r2: interface eth0 ip 10.0.1.2/24",
            "r1: router ospf 1",
            "r1: ospf network 10.0.1.0/24 area 0",
            "r1: passive-interface default",
            "r1: no passive-interface eth1",
            "r2: router ospf 1",
            "r2: ospf network 10.0.1.0/24 area 0",
        ],
    )
    assert base.ospf_adjacencies == (("r1", "r2"),)
    again = apply_sequence(
        base, ["r1: passive-interface default", "r1: no passive-interface eth1"]
    )
    assert again.ospf_adjacencies == (("r1", "r2"),)
    assert again.flap_counters[("r1", "r2")] == base.flap_counters.get(("r1", "r2"), 0) + 1


def test_static_route_needs_resolvable_next_hop():
    topo = chain_topology(2)
    state = apply_sequence(
        initialize(provision(topo)),
        [
            "r1: interface eth1 ip 10.0.1.1/24",
            "r1: ip route 10.9.0.0/24 via 10.0.1.2",
            "r1: ip route 10.8.0.0/24 via 172.16.0.1",
        ],
    )
    assert state.status is SutStatus.STABLE
    prefixes = {r.prefix for r in state.rib["r1"] if r.protocol == "static"}
    assert prefixes == {"10.9.0.0/24"}  # unresolvable next hop not installed


def test_protocol_preference_static_beats_rip():
    topo = chain_topology(3)
    commands = [
        "r1: interface eth1 ip 10.0.1.1/24",
        "r2: interface eth0 ip 10.0.1.2/24",
        "r2: interface eth1 ip 10.0.2.1/24",
        "r3: interface eth0 ip 10.0.2.2/24",
        "r1: router rip",
        "r1: rip network 10.0.0.0/8",
        "r2: router rip",
        "r2: rip network 10.0.0.0/8",
        "r3: router rip",
        "r3: rip network 10.0.0.0/8",
        "r1: ip route 10.0.2.0/24 via 10.0.1.2",
    ]
    state = apply_sequence(initialize(provision(topo)), commands)
    route = next(r for r in state.rib["r1"] if r.prefix == "10.0.2.0/24")
    assert route.protocol == "static"


def test_bgp_session_needs_mutual_matching_config():
    topo = chain_topology(2)
    base = apply_sequence(
        initialize(provision(topo)),
        [
            "r1: interface eth1 ip 10.0.1.1/24",
            "r2: interface eth0 ip 10.0.1.2/24",
            "r1: router bgp 65001",
            "r2: router bgp 65002",
            "r1: bgp neighbor 10.0.1.2 remote-as 65002",
        ],
    )
    assert base.bgp_sessions == ()
    wrong_as = apply_config(base, "r2: bgp neighbor 10.0.1.1 remote-as 64999")
    assert wrong_as.bgp_sessions == ()
    right = apply_config(base, "r2: bgp neighbor 10.0.1.1 remote-as 65001")
    assert right.bgp_sessions == (("r1", "r2"),)


def test_bgp_path_selection_and_loop_prevention(tasks, solutions, solved_states):
    state = solved_states["ccie_bgp"]
    route = next(r for r in state.rib["ent"] if r.prefix == "10.20.1.0/24")
    assert route.protocol == "bgp"
    assert route.next_hop == "10.10.1.2"  # shortest path tie broken by peer address
    assert route.metric == 2
    # The remote side never re-learns its own advertisement.
    assert not any(
        r.prefix == "10.20.1.0/24" and r.protocol == "bgp" for r in state.rib["rem"]
    )


def test_reference_solutions_match_graph_oracle(tasks, solutions, solved_states):
    for name, task in tasks.items():
        state = solved_states[name]
        rip_expected, ospf_expected = expected_protocol_ribs(task, solutions[name])
        for node in state.nodes:
            assert rib_rows(state, node, "rip") == rip_expected[node], (name, node)
            assert rib_rows(state, node, "ospf") == ospf_expected[node], (name, node)


def test_determinism_of_full_solution_replay(tasks, solutions):
    task = tasks["ccnp_ospf"]
    runs = []
    for _ in range(2):
        state = initialize(provision(task.topology))
        runs.append(apply_sequence(state, solutions["ccnp_ospf"]))
    assert runs[0] == runs[1]


def test_topology_immutable_under_transitions(tasks, solutions, solved_states):
    for name, task in tasks.items():
        fresh = initialize(provision(task.topology))
        solved = solved_states[name]
        assert solved.nodes == fresh.nodes
        assert solved.links == fresh.links
