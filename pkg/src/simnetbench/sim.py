"""SUT transitions: apply configuration commands, converge, observe, digest.

apply_config realizes the two-step transition (command then autonomous
convergence) atomically: callers only ever see stable or error states.
Error states keep the pre-command configuration and carry a detail string;
they absorb further commands.
"""

from __future__ import annotations

import hashlib
import ipaddress
from dataclasses import dataclass, replace

from .errors import PreconditionError
from .netstate import (
    MAX_CONFIG_PER_NODE,
    NetState,
    OspfConfig,
    BgpConfig,
    RipConfig,
    Route,
    SutStatus,
    alpha_counter,
    alpha_timer,
    iface_network,
    _iface_key,
)
from .platform import PlatformLanguage, ParsedCommand, SyntaxClass
from . import routing


@dataclass(frozen=True)
class Observation:
    text: str
    structured: dict


class _CommandError(Exception):
    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


def language_for(state: NetState) -> PlatformLanguage:
    return PlatformLanguage.for_nodes(state.nodes)


def _error_state(state: NetState, detail: str) -> NetState:
    failed = state.clone()
    failed.status = SutStatus.ERROR
    failed.error_detail = detail
    failed.converged = False
    return failed


def iteration_bound(state: NetState) -> int:
    return 4 * len(state.nodes) * max(len(state.links), 1) + 64


def converge(state: NetState) -> NetState:
    """Resolve a pending state to a fixed point, or an error on exhaustion.

    Each sweep recomputes the whole control plane; an adjacency present
    before a sweep but absent after it counts as one flap. The abstract
    clock advances once per call.
    """
    if state.status is not SutStatus.PENDING:
        raise PreconditionError("converge requires a pending state")
    known_adjacencies = set(state.ospf_adjacencies)
    flaps = dict(state.flap_counters)
    prev_bgp: dict[str, list[Route]] = {}
    previous = None
    stable = None
    for _ in range(iteration_bound(state)):
        derived = routing.derive(state, prev_bgp)
        current = set(derived.adjacency_pairs)
        for pair in sorted(known_adjacencies - current):
            flaps[pair] = flaps.get(pair, 0) + 1
        known_adjacencies = current
        if previous is not None and derived == previous:
            stable = derived
            break
        previous = derived
        prev_bgp = routing.bgp_routes_of(derived)
    if stable is None:
        return _error_state(state, "convergence timeout")

    settled = state.clone()
    settled.rib = {node: routes for node, routes in stable.rib}
    settled.ospf_adjacency_areas = stable.adjacency_areas
    settled.ospf_adjacencies = stable.adjacency_pairs
    settled.bgp_sessions = stable.session_pairs
    settled.flap_counters = flaps
    settled.abstract_clock = state.abstract_clock + 1
    settled.converged = True
    settled.status = SutStatus.STABLE
    settled.error_detail = None
    return settled


# --- configuration command semantics ---------------------------------------


def _get_iface(cfg, node: str, iface: str):
    if iface not in cfg.interfaces:
        raise _CommandError(f"unknown interface {iface} on {node}")
    return cfg.interfaces[iface]


def _need_ospf(cfg, pid: int | None = None) -> OspfConfig:
    if cfg.ospf is None:
        raise _CommandError("no OSPF process")
    if pid is not None and cfg.ospf.pid != pid:
        raise _CommandError(f"OSPF process {pid} does not exist")
    return cfg.ospf


def _need_rip(cfg) -> RipConfig:
    if cfg.rip is None:
        raise _CommandError("no RIP process")
    return cfg.rip


def _need_bgp(cfg, asn: int | None = None) -> BgpConfig:
    if cfg.bgp is None:
        raise _CommandError("no BGP process")
    if asn is not None and cfg.bgp.asn != asn:
        raise _CommandError(f"BGP process {asn} does not exist")
    return cfg.bgp


def _apply_parsed(state: NetState, parsed: ParsedCommand) -> None:
    """Mutate the addressed node's config in place; raise _CommandError on
    semantic failure. `state` is always a private clone here."""
    node = parsed.node
    if node not in state.configs:
        raise _CommandError(f"unknown node {node}")
    cfg = state.configs[node]
    form = parsed.form
    args = parsed.args

    if form == "if_ip":
        iface, (addr, plen) = args
        current = _get_iface(cfg, node, iface)
        if current is not None and current != (addr, plen):
            raise _CommandError(
                f"address conflict on {iface}: {current[0]}/{current[1]} already set"
            )
        cfg.interfaces[iface] = (addr, plen)
    elif form == "no_if_ip":
        (iface,) = args
        if _get_iface(cfg, node, iface) is None:
            raise _CommandError(f"no address assigned on {iface}")
        cfg.interfaces[iface] = None
    elif form == "static_add":
        prefix, nh = args
        if (prefix, nh) in cfg.static_routes:
            raise _CommandError("route exists")
        cfg.static_routes.add((prefix, nh))
    elif form == "static_del":
        (prefix,) = args
        matching = {entry for entry in cfg.static_routes if entry[0] == prefix}
        if not matching:
            raise _CommandError(f"no such route {prefix}")
        cfg.static_routes -= matching
    elif form == "rip_create":
        if cfg.rip is None:
            cfg.rip = RipConfig()
    elif form == "rip_del":
        _need_rip(cfg)
        cfg.rip = None
    elif form == "rip_network":
        (prefix,) = args
        _need_rip(cfg).networks.add(prefix)
    elif form == "rip_network_del":
        (prefix,) = args
        rip = _need_rip(cfg)
        if prefix not in rip.networks:
            raise _CommandError(f"no such RIP network {prefix}")
        rip.networks.remove(prefix)
    elif form == "ospf_create":
        (pid,) = args
        if cfg.ospf is not None and cfg.ospf.pid != pid:
            raise _CommandError(f"OSPF process {cfg.ospf.pid} exists")
        if cfg.ospf is None:
            cfg.ospf = OspfConfig(pid=pid)
    elif form == "ospf_del":
        (pid,) = args
        _need_ospf(cfg, pid)
        cfg.ospf = None
    elif form == "ospf_network":
        prefix, area = args
        ospf = _need_ospf(cfg)
        for existing_prefix, existing_area in ospf.network_areas:
            if existing_prefix == prefix and existing_area != area:
                raise _CommandError(
                    f"conflicting network statement for {prefix} (area {existing_area})"
                )
        ospf.network_areas.add((prefix, area))
    elif form == "ospf_network_del":
        prefix, area = args
        ospf = _need_ospf(cfg)
        if (prefix, area) not in ospf.network_areas:
            raise _CommandError(f"no such network statement {prefix} area {area}")
        ospf.network_areas.remove((prefix, area))
    elif form == "if_ospf":
        iface, pid, area = args
        ospf = _need_ospf(cfg, pid)
        if _get_iface(cfg, node, iface) is None:
            raise _CommandError(f"interface {iface} has no IP address")
        ospf.interface_areas[iface] = area
    elif form == "no_if_ospf":
        (iface,) = args
        ospf = _need_ospf(cfg)
        _get_iface(cfg, node, iface)
        if iface not in ospf.interface_areas:
            raise _CommandError(f"{iface} is not attached to OSPF")
        del ospf.interface_areas[iface]
    elif form == "passive_default":
        ospf = _need_ospf(cfg)
        ospf.passive_default = True
        ospf.passive_exceptions.clear()
    elif form == "no_passive":
        (iface,) = args
        ospf = _need_ospf(cfg)
        _get_iface(cfg, node, iface)
        ospf.passive_exceptions.add(iface)
    elif form == "area_range":
        area, prefix = args
        _need_ospf(cfg).area_ranges.add((area, prefix))
    elif form == "area_range_del":
        area, prefix = args
        ospf = _need_ospf(cfg)
        if (area, prefix) not in ospf.area_ranges:
            raise _CommandError(f"no such range {prefix} for area {area}")
        ospf.area_ranges.remove((area, prefix))
    elif form == "bgp_create":
        (asn,) = args
        if cfg.bgp is not None and cfg.bgp.asn != asn:
            raise _CommandError(f"BGP process {cfg.bgp.asn} exists")
        if cfg.bgp is None:
            cfg.bgp = BgpConfig(asn=asn)
    elif form == "bgp_del":
        (asn,) = args
        _need_bgp(cfg, asn)
        cfg.bgp = None
    elif form == "bgp_neighbor":
        addr, asn = args
        _need_bgp(cfg).neighbors[addr] = asn
    elif form == "bgp_neighbor_del":
        (addr,) = args
        bgp = _need_bgp(cfg)
        if addr not in bgp.neighbors:
            raise _CommandError(f"no such neighbor {addr}")
        del bgp.neighbors[addr]
    elif form == "bgp_network":
        (prefix,) = args
        _need_bgp(cfg).advertised.add(prefix)
    elif form == "bgp_network_del":
        (prefix,) = args
        bgp = _need_bgp(cfg)
        if prefix not in bgp.advertised:
            raise _CommandError(f"no such BGP network {prefix}")
        bgp.advertised.remove(prefix)
    elif form == "bgp_filter":
        addr, direction, action, prefix = args
        _need_bgp(cfg).filters.append((addr, direction, action, prefix))
    elif form == "bgp_filter_del":
        addr, direction, action, prefix = args
        bgp = _need_bgp(cfg)
        entry = (addr, direction, action, prefix)
        if entry not in bgp.filters:
            raise _CommandError("no such filter")
        bgp.filters.remove(entry)
    else:  # pragma: no cover - forms and handlers are defined together
        raise _CommandError(f"unhandled form {form}")


def apply_config(state: NetState, cmd: str) -> NetState:
    """Apply one configuration command and converge; total over inputs.

    Semantic failures return an error state carrying the detail; they never
    raise. Error states absorb: applying to one returns it unchanged.
    """
    if state.status is SutStatus.ERROR:
        return state
    if state.status is not SutStatus.STABLE:
        raise PreconditionError("apply_config requires a stable state")
    parsed = language_for(state).parse(cmd)
    if parsed is None or parsed.is_read:
        return _error_state(state, f"invalid configuration command: {cmd!r}")

    pending = state.clone()
    try:
        _apply_parsed(pending, parsed)
    except _CommandError as exc:
        return _error_state(state, exc.detail)
    node_cfg = pending.configs[parsed.node]
    node_cfg.applied_commands += 1
    if node_cfg.applied_commands > MAX_CONFIG_PER_NODE:
        return _error_state(state, f"configuration limit exceeded on {parsed.node}")
    pending.status = SutStatus.PENDING
    pending.converged = False
    return converge(pending)


def apply_sequence(state: NetState, commands) -> NetState:
    """Left fold of apply_config; the empty sequence is the identity."""
    current = state
    for cmd in commands:
        current = apply_config(current, cmd)
    return current


# --- read commands -----------------------------------------------------------


def _render_interfaces(state: NetState, node: str) -> Observation:
    cfg = state.configs[node]
    lines = []
    entries = []
    for iface in sorted(cfg.interfaces, key=_iface_key):
        assigned = cfg.interfaces[iface]
        if assigned is None:
            lines.append(f"interface {iface} up address unassigned")
            entries.append({"interface": iface, "address": None})
        else:
            addr, plen = assigned
            lines.append(f"interface {iface} up address {addr}/{plen}")
            entries.append({"interface": iface, "address": f"{addr}/{plen}"})
    return Observation("\n".join(lines) or "no interfaces", {"interfaces": entries})


def _render_routes(state: NetState, node: str) -> Observation:
    from .netstate import PROTOCOL_LETTER

    routes = state.rib.get(node, ())
    lines = [
        f"{PROTOCOL_LETTER[r.protocol]} {r.prefix} via {r.next_hop} metric {r.metric}"
        for r in routes
    ]
    entries = [
        {
            "prefix": r.prefix,
            "next_hop": r.next_hop,
            "protocol": r.protocol,
            "metric": r.metric,
        }
        for r in routes
    ]
    return Observation("\n".join(lines) or "no routes", {"routes": entries})


def _render_ospf_neighbors(state: NetState, node: str) -> Observation:
    if state.configs[node].ospf is None:
        return Observation("no OSPF process", {"neighbors": None})
    rows = sorted(
        {(b if a == node else a, area)
         for a, b, area in state.ospf_adjacency_areas
         if node in (a, b)}
    )
    lines = [f"neighbor {peer} area {area}" for peer, area in rows]
    entries = [{"neighbor": peer, "area": area} for peer, area in rows]
    return Observation("\n".join(lines) or "no neighbors", {"neighbors": entries})


def _render_bgp_summary(state: NetState, node: str) -> Observation:
    cfg = state.configs[node].bgp
    if cfg is None:
        return Observation("no BGP process", {"asn": None, "neighbors": None})
    established_pairs = {
        (b if a == node else a) for a, b in state.bgp_sessions if node in (a, b)
    }
    lines = [f"local AS {cfg.asn}"]
    entries = []
    for addr in sorted(cfg.neighbors, key=lambda a: int(ipaddress.ip_address(a))):
        remote_as = cfg.neighbors[addr]
        owner = state.address_owner(addr)
        up = (
            owner is not None
            and owner in established_pairs
            and state.configs[owner].bgp is not None
            and state.configs[owner].bgp.asn == remote_as
        )
        status = "established" if up else "idle"
        lines.append(f"neighbor {addr} remote-as {remote_as} {status}")
        entries.append({"neighbor": addr, "remote_as": remote_as, "established": up})
    return Observation("\n".join(lines), {"asn": cfg.asn, "neighbors": entries})


def _render_run(state: NetState, node: str) -> Observation:
    cfg = state.configs[node]
    lines = []
    for iface in sorted(cfg.interfaces, key=_iface_key):
        assigned = cfg.interfaces[iface]
        if assigned is not None:
            lines.append(f"interface {iface} ip {assigned[0]}/{assigned[1]}")
    for prefix, nh in sorted(cfg.static_routes):
        lines.append(f"ip route {prefix} via {nh}")
    if cfg.rip is not None:
        lines.append("router rip")
        for prefix in sorted(cfg.rip.networks):
            lines.append(f"rip network {prefix}")
    if cfg.ospf is not None:
        lines.append(f"router ospf {cfg.ospf.pid}")
        for prefix, area in sorted(cfg.ospf.network_areas):
            lines.append(f"ospf network {prefix} area {area}")
        for iface in sorted(cfg.ospf.interface_areas, key=_iface_key):
            lines.append(
                f"interface {iface} ospf {cfg.ospf.pid} area {cfg.ospf.interface_areas[iface]}"
            )
        if cfg.ospf.passive_default:
            lines.append("passive-interface default")
        for iface in sorted(cfg.ospf.passive_exceptions, key=_iface_key):
            lines.append(f"no passive-interface {iface}")
        for area, prefix in sorted(cfg.ospf.area_ranges):
            lines.append(f"area {area} range {prefix}")
    if cfg.bgp is not None:
        lines.append(f"router bgp {cfg.bgp.asn}")
        for addr in sorted(cfg.bgp.neighbors, key=lambda a: int(ipaddress.ip_address(a))):
            lines.append(f"bgp neighbor {addr} remote-as {cfg.bgp.neighbors[addr]}")
        for prefix in sorted(cfg.bgp.advertised):
            lines.append(f"bgp network {prefix}")
        for addr, direction, action, prefix in cfg.bgp.filters:
            lines.append(f"bgp filter {addr} {direction} {action} {prefix}")
    return Observation("\n".join(lines) or "empty configuration", {"lines": lines})


def _render_ping(state: NetState, node: str, target: str) -> Observation:
    success = routing.ping_walk(state, node, target)
    replies = 5 if success else 0
    text = (
        f"ping {target}: 5/5 replies"
        if success
        else f"ping {target}: 0/5 replies (unreachable)"
    )
    return Observation(text, {"target": target, "success": success, "replies": replies})


def observe(state: NetState, cmd: str) -> Observation:
    """Answer a read command without touching the state."""
    if state.status is SutStatus.PENDING:
        raise PreconditionError("observe requires a stable or error state")
    parsed = language_for(state).parse(cmd)
    if parsed is None or not parsed.is_read:
        head, _, _ = cmd.partition(":")
        node = head.strip()
        if node and node not in state.nodes and ":" in cmd:
            return Observation(f"error: unknown node {node}", {"error": "unknown node"})
        return Observation("error: not a read command", {"error": "invalid"})
    node = parsed.node
    if parsed.form == "show_interfaces":
        return _render_interfaces(state, node)
    if parsed.form == "show_ip_route":
        return _render_routes(state, node)
    if parsed.form == "show_ospf_neighbors":
        return _render_ospf_neighbors(state, node)
    if parsed.form == "show_bgp_summary":
        return _render_bgp_summary(state, node)
    if parsed.form == "show_run":
        return _render_run(state, node)
    return _render_ping(state, node, parsed.args[0])


READ_FORM_BODIES = (
    "show interfaces",
    "show ip route",
    "show ospf neighbors",
    "show bgp summary",
    "show run",
)


def abstract_fingerprint(state: NetState) -> str:
    """Digest of everything observable, with counters and the clock pushed
    through their abstractions. Equal digests mean observably equivalent."""
    if state.status is SutStatus.PENDING:
        raise PreconditionError("fingerprint requires a stable or error state")
    lines = []
    if state.status is SutStatus.ERROR:
        lines.append(f"status error {state.error_detail}")
    else:
        lines.append("status stable")
    lines.append(f"clock {alpha_timer(state.abstract_clock)}")
    for (a, b) in sorted(state.flap_counters):
        count = state.flap_counters[(a, b)]
        if count:
            lines.append(f"flap {a}~{b} {alpha_counter(count)}")
    for node in state.nodes:
        for body in READ_FORM_BODIES:
            obs = observe(state, f"{node}: {body}")
            lines.append(f"obs {node}|{body}|" + obs.text.replace("\n", "\\n"))
    targets = sorted(
        {addr for _, _, addr in state.assigned_addresses()},
        key=lambda a: int(ipaddress.ip_address(a)),
    )
    for node in state.nodes:
        for target in targets:
            obs = observe(state, f"{node}: ping {target}")
            lines.append(f"obs {node}|ping {target}|{obs.text}")
    payload = "\n".join(lines).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()
