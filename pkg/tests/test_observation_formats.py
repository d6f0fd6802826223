"""Frozen renderings of every read command.

These texts are normative: traces depend on them, so any change here is a
breaking format change and must be deliberate.
"""

from __future__ import annotations

from simnetbench import apply_sequence, initialize, observe, provision
from simnetbench.task import InfraCommand

SETUP = [
    "r1: interface eth0 ip 10.0.1.1/24",
    "r2: interface eth0 ip 10.0.1.2/24",
    "r2: interface eth1 ip 10.0.2.1/24",
    "r1: ip route 10.9.0.0/24 via 10.0.1.2",
    "r1: router rip",
    "r1: rip network 10.0.0.0/16",
    "r2: router rip",
    "r2: rip network 10.0.0.0/16",
    "r1: router ospf 1",
    "r1: ospf network 10.0.1.0/24 area 0",
    "r1: interface eth1 ip 10.0.3.1/24",
    "r1: interface eth1 ospf 1 area 0",
    "r1: passive-interface default",
    "r1: no passive-interface eth0",
    "r1: area 0 range 10.0.0.0/16",
    "r1: router bgp 65001",
    "r1: bgp neighbor 10.0.1.2 remote-as 65002",
    "r1: bgp network 10.0.1.0/24",
    "r1: bgp filter 10.0.1.2 in deny 192.0.2.0/24",
]


def configured_state():
    topo = [
        InfraCommand(verb="add_node", node="r1"),
        InfraCommand(verb="add_node", node="r2"),
        InfraCommand(verb="add_link", endpoints=(("r1", "eth0"), ("r2", "eth0"))),
        InfraCommand(verb="add_link", endpoints=(("r1", "eth1"), ("r2", "eth1"))),
        InfraCommand(verb="deploy"),
    ]
    return apply_sequence(initialize(provision(topo)), SETUP)


def test_show_interfaces_format():
    state = configured_state()
    assert observe(state, "r1: show interfaces").text == (
        "interface eth0 up address 10.0.1.1/24\n"
        "interface eth1 up address 10.0.3.1/24"
    )


def test_show_ip_route_format():
    state = configured_state()
    assert observe(state, "r1: show ip route").text == (
        "C 10.0.1.0/24 via connected metric 0\n"
        "R 10.0.2.0/24 via 10.0.1.2 metric 1\n"
        "C 10.0.3.0/24 via connected metric 0\n"
        "S 10.9.0.0/24 via 10.0.1.2 metric 1"
    )


def test_show_ospf_neighbors_format():
    state = configured_state()
    assert observe(state, "r1: show ospf neighbors").text == "no neighbors"
    assert observe(state, "r2: show ospf neighbors").text == "no OSPF process"


def test_show_bgp_summary_format():
    state = configured_state()
    assert observe(state, "r1: show bgp summary").text == (
        "local AS 65001\n"
        "neighbor 10.0.1.2 remote-as 65002 idle"
    )


def test_show_run_format():
    state = configured_state()
    assert observe(state, "r1: show run").text == (
        "interface eth0 ip 10.0.1.1/24\n"
        "interface eth1 ip 10.0.3.1/24\n"
        "ip route 10.9.0.0/24 via 10.0.1.2\n"
        "router rip\n"
        "rip network 10.0.0.0/16\n"
        "router ospf 1\n"
        "ospf network 10.0.1.0/24 area 0\n"
        "interface eth1 ospf 1 area 0\n"
        "passive-interface default\n"
        "no passive-interface eth0\n"
        "area 0 range 10.0.0.0/16\n"
        "router bgp 65001\n"
        "bgp neighbor 10.0.1.2 remote-as 65002\n"
        "bgp network 10.0.1.0/24\n"
        "bgp filter 10.0.1.2 in deny 192.0.2.0/24"
    )


def test_ping_formats():
    state = configured_state()
    assert observe(state, "r1: ping 10.0.1.2").text == "ping 10.0.1.2: 5/5 replies"
    assert (
        observe(state, "r1: ping 10.0.9.9").text
        == "ping 10.0.9.9: 0/5 replies (unreachable)"
    )


def test_empty_configuration_render():
    topo = [
        InfraCommand(verb="add_node", node="r1"),
        InfraCommand(verb="deploy"),
    ]
    state = initialize(provision(topo))
    assert observe(state, "r1: show run").text == "empty configuration"
    assert observe(state, "r1: show interfaces").text == "no interfaces"
    assert observe(state, "r1: show ip route").text == "no routes"
