"""Simulated-network state: per-node configuration plus derived control plane.

States are plain mutable dataclasses, but the simulator treats them as
values: every transition deep-copies, so any state reference a caller holds
is stable forever. Canonical ordering (sorted nodes, sorted routes) keeps
every derived artifact independent of hash order.
"""

from __future__ import annotations

import copy
import ipaddress
from dataclasses import dataclass, field
from enum import Enum

# Abstraction constants for the observable state space.
COUNTER_CAP = 16          # counters above this collapse to "inf"
CLOCK_WARN = 32           # abstract ticks until the clock reads near_expiry
CLOCK_MAX = 64            # abstract ticks until the clock reads expired
MAX_CONFIG_PER_NODE = 256

PROTOCOL_PREFERENCE = {"connected": 0, "static": 1, "ospf": 2, "rip": 3, "bgp": 4}
PROTOCOL_LETTER = {"connected": "C", "static": "S", "ospf": "O", "rip": "R", "bgp": "B"}
RIP_MAX_METRIC = 15


class SutStatus(str, Enum):
    STABLE = "stable"
    PENDING = "pending"
    ERROR = "error"


@dataclass(frozen=True, order=True)
class Route:
    prefix: str
    next_hop: str            # dotted quad, or the literal "connected"
    protocol: str
    metric: int

    def network(self) -> ipaddress.IPv4Network:
        return ipaddress.ip_network(self.prefix)


@dataclass
class RipConfig:
    networks: set[str] = field(default_factory=set)


@dataclass
class OspfConfig:
    pid: int
    interface_areas: dict[str, int] = field(default_factory=dict)
    network_areas: set[tuple[str, int]] = field(default_factory=set)
    passive_exceptions: set[str] = field(default_factory=set)
    passive_default: bool = False
    area_ranges: set[tuple[int, str]] = field(default_factory=set)

    def is_passive(self, iface: str) -> bool:
        return self.passive_default and iface not in self.passive_exceptions


@dataclass
class BgpConfig:
    asn: int
    neighbors: dict[str, int] = field(default_factory=dict)
    advertised: set[str] = field(default_factory=set)
    # (peer_ip, direction, action, prefix); order matters, first match wins.
    filters: list[tuple[str, str, str, str]] = field(default_factory=list)


@dataclass
class NodeConfig:
    interfaces: dict[str, tuple[str, int] | None] = field(default_factory=dict)
    static_routes: set[tuple[str, str]] = field(default_factory=set)
    rip: RipConfig | None = None
    ospf: OspfConfig | None = None
    bgp: BgpConfig | None = None
    applied_commands: int = 0

    def addresses(self) -> list[str]:
        return sorted(v[0] for v in self.interfaces.values() if v is not None)


@dataclass
class NetState:
    nodes: tuple[str, ...]
    links: tuple[tuple[str, str, str, str], ...]
    configs: dict[str, NodeConfig]
    rib: dict[str, tuple[Route, ...]]
    ospf_adjacencies: tuple[tuple[str, str], ...] = ()
    ospf_adjacency_areas: tuple[tuple[str, str, int], ...] = ()
    bgp_sessions: tuple[tuple[str, str], ...] = ()
    converged: bool = True
    status: SutStatus = SutStatus.STABLE
    error_detail: str | None = None
    abstract_clock: int = 0
    flap_counters: dict[tuple[str, str], int] = field(default_factory=dict)

    def clone(self) -> "NetState":
        return copy.deepcopy(self)

    def node_links(self, node: str) -> list[tuple[str, str, str]]:
        """Links touching `node` as (own_if, peer, peer_if), iface-sorted."""
        out = []
        for a, a_if, b, b_if in self.links:
            if a == node:
                out.append((a_if, b, b_if))
            if b == node:
                out.append((b_if, a, a_if))
        return sorted(out, key=lambda t: _iface_key(t[0]))

    def iface_address(self, node: str, iface: str) -> tuple[str, int] | None:
        return self.configs[node].interfaces.get(iface)

    def assigned_addresses(self) -> list[tuple[str, str, str]]:
        """All (node, iface, address) assignments in canonical order."""
        out = []
        for node in self.nodes:
            cfg = self.configs[node]
            for iface in sorted(cfg.interfaces, key=_iface_key):
                assigned = cfg.interfaces[iface]
                if assigned is not None:
                    out.append((node, iface, assigned[0]))
        return out

    def address_owner(self, addr: str) -> str | None:
        """Node owning an address; lowest node name wins on duplicates."""
        for node, _, a in self.assigned_addresses():
            if a == addr:
                return node
        return None


def _iface_key(iface: str) -> tuple[int, str]:
    digits = iface[3:]
    return (int(digits), iface) if digits.isdigit() else (10**6, iface)


def iface_network(addr: str, plen: int) -> ipaddress.IPv4Network:
    return ipaddress.ip_network(f"{addr}/{plen}", strict=False)


def prefix_sort_key(prefix: str) -> tuple[int, int]:
    net = ipaddress.ip_network(prefix)
    return (int(net.network_address), net.prefixlen)


def alpha_counter(value: int) -> str:
    """Counter abstraction: exact up to the cap, then indistinguishable."""
    return str(value) if value <= COUNTER_CAP else "inf"


def alpha_timer(ticks: int) -> str:
    if ticks < CLOCK_WARN:
        return "active"
    if ticks < CLOCK_MAX:
        return "near_expiry"
    return "expired"


def initial_state(nodes: list[str], links: list[tuple[str, str, str, str]]) -> NetState:
    """Fresh SUT state: interfaces up and unaddressed, no protocols, empty ribs."""
    configs: dict[str, NodeConfig] = {}
    for node in nodes:
        configs[node] = NodeConfig(interfaces={})
    for a, a_if, b, b_if in links:
        configs[a].interfaces.setdefault(a_if, None)
        configs[b].interfaces.setdefault(b_if, None)
    return NetState(
        nodes=tuple(nodes),
        links=tuple(links),
        configs=configs,
        rib={node: () for node in nodes},
        converged=True,
        status=SutStatus.STABLE,
    )
