"""Control-plane derivation: from per-node configs to ribs, adjacencies, sessions.

Everything here is a pure function of (topology, configs) plus the previous
sweep's BGP routes (sessions may depend on learned reachability). All
iteration runs over sorted collections so results never depend on hash order.

Model summary:
  - connected: one route per addressed interface.
  - static: installed only when the next hop falls inside a connected subnet.
  - rip: synchronous distance-vector over links where both ends run RIP and
    cover the link subnet; hop metric, 15-hop limit.
  - ospf: adjacencies need matching areas, addresses on a shared subnet and
    non-passive interfaces on both ends; per-area unit-cost shortest paths;
    border routers (area 0 plus another) inject inter-area routes, applying
    configured ranges (components suppressed, range advertised at the
    minimum component metric). Intra-area routes beat inter-area ones.
  - bgp: sessions need mutual neighbor statements with matching AS numbers
    and mutually reachable peer addresses; best-path-only path-vector with
    AS-path loop drop, exact-prefix first-match in/out filters (default
    permit), selection by shortest AS path then lowest peer address.
  - rib merge: connected < static < ospf < rip < bgp, then metric, then
    lowest next hop.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass

from .netstate import (
    NetState,
    PROTOCOL_PREFERENCE,
    RIP_MAX_METRIC,
    Route,
    iface_network,
    prefix_sort_key,
)


@dataclass(frozen=True)
class Derived:
    adjacency_areas: tuple[tuple[str, str, int], ...]
    session_endpoints: tuple[tuple[str, str, str, str], ...]
    rib: tuple[tuple[str, tuple[Route, ...]], ...]
    bgp_tables: tuple

    @property
    def adjacency_pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted({(a, b) for a, b, _ in self.adjacency_areas}))

    @property
    def session_pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted({(a, b) for a, b, _, _ in self.session_endpoints}))

    def rib_map(self) -> dict[str, tuple[Route, ...]]:
        return dict(self.rib)


def _nh_sort_key(next_hop: str):
    if next_hop == "connected":
        return (0, 0)
    return (1, int(ipaddress.ip_address(next_hop)))


def _best(candidates: list[Route]) -> Route:
    return min(
        candidates,
        key=lambda r: (PROTOCOL_PREFERENCE[r.protocol], r.metric, _nh_sort_key(r.next_hop)),
    )


def _addressed_links(state: NetState):
    """Links whose two ends sit on the same subnet, with both addresses."""
    out = []
    for a, a_if, b, b_if in state.links:
        if a == b:
            continue
        addr_a = state.iface_address(a, a_if)
        addr_b = state.iface_address(b, b_if)
        if addr_a is None or addr_b is None:
            continue
        net_a = iface_network(*addr_a)
        net_b = iface_network(*addr_b)
        if net_a != net_b:
            continue
        out.append((a, a_if, addr_a[0], b, b_if, addr_b[0], str(net_a)))
    return out


def _connected_routes(state: NetState) -> dict[str, list[Route]]:
    routes: dict[str, list[Route]] = {n: [] for n in state.nodes}
    for node in state.nodes:
        cfg = state.configs[node]
        seen = set()
        for iface in sorted(cfg.interfaces):
            assigned = cfg.interfaces[iface]
            if assigned is None:
                continue
            prefix = str(iface_network(*assigned))
            if prefix not in seen:
                seen.add(prefix)
                routes[node].append(Route(prefix, "connected", "connected", 0))
    return routes


def _static_routes(state: NetState, connected: dict[str, list[Route]]) -> dict[str, list[Route]]:
    routes: dict[str, list[Route]] = {n: [] for n in state.nodes}
    for node in state.nodes:
        nets = [ipaddress.ip_network(r.prefix) for r in connected[node]]
        per_prefix: dict[str, list[Route]] = {}
        for prefix, nh in sorted(state.configs[node].static_routes):
            if any(ipaddress.ip_address(nh) in net for net in nets):
                per_prefix.setdefault(prefix, []).append(Route(prefix, nh, "static", 1))
        for prefix in sorted(per_prefix):
            routes[node].append(_best(per_prefix[prefix]))
    return routes


def _rip_routes(state: NetState) -> dict[str, list[Route]]:
    edges = []  # (node, peer, peer_addr) once per direction
    for a, a_if, a_addr, b, b_if, b_addr, prefix in _addressed_links(state):
        cfg_a, cfg_b = state.configs[a], state.configs[b]
        if cfg_a.rip is None or cfg_b.rip is None:
            continue
        net = ipaddress.ip_network(prefix)
        covered_a = any(net.subnet_of(ipaddress.ip_network(p)) for p in cfg_a.rip.networks)
        covered_b = any(net.subnet_of(ipaddress.ip_network(p)) for p in cfg_b.rip.networks)
        if covered_a and covered_b:
            edges.append((a, b, b_addr))
            edges.append((b, a, a_addr))
    edges.sort()

    # Each RIP speaker originates its covered connected subnets.
    vec: dict[str, dict[str, tuple[int, str | None]]] = {n: {} for n in state.nodes}
    for node in state.nodes:
        cfg = state.configs[node]
        if cfg.rip is None:
            continue
        for iface in sorted(cfg.interfaces):
            assigned = cfg.interfaces[iface]
            if assigned is None:
                continue
            net = iface_network(*assigned)
            if any(net.subnet_of(ipaddress.ip_network(p)) for p in cfg.rip.networks):
                vec[node][str(net)] = (0, None)

    for _ in range(RIP_MAX_METRIC + 1):
        nxt = {n: dict(v) for n, v in vec.items()}
        changed = False
        for node, peer, peer_addr in edges:
            for prefix in sorted(vec[peer], key=prefix_sort_key):
                metric = vec[peer][prefix][0] + 1
                if metric > RIP_MAX_METRIC:
                    continue
                cur = nxt[node].get(prefix)
                better = (
                    cur is None
                    or metric < cur[0]
                    or (
                        metric == cur[0]
                        and cur[1] is not None
                        and int(ipaddress.ip_address(peer_addr))
                        < int(ipaddress.ip_address(cur[1]))
                    )
                )
                if better:
                    nxt[node][prefix] = (metric, peer_addr)
                    changed = True
        vec = nxt
        if not changed:
            break

    routes: dict[str, list[Route]] = {n: [] for n in state.nodes}
    for node in state.nodes:
        for prefix in sorted(vec[node], key=prefix_sort_key):
            metric, nh = vec[node][prefix]
            if metric >= 1 and nh is not None:
                routes[node].append(Route(prefix, nh, "rip", metric))
    return routes


def _ospf_attachments(state: NetState, node: str) -> dict[str, int]:
    """Area per addressed interface: explicit assignment beats network
    statements; among covering statements, longest prefix then lowest area."""
    cfg = state.configs[node]
    if cfg.ospf is None:
        return {}
    result: dict[str, int] = {}
    for iface in sorted(cfg.interfaces):
        assigned = cfg.interfaces[iface]
        if assigned is None:
            continue
        if iface in cfg.ospf.interface_areas:
            result[iface] = cfg.ospf.interface_areas[iface]
            continue
        net = iface_network(*assigned)
        covering = [
            (ipaddress.ip_network(p).prefixlen, area)
            for p, area in cfg.ospf.network_areas
            if net.subnet_of(ipaddress.ip_network(p))
        ]
        if covering:
            result[iface] = min(covering, key=lambda pa: (-pa[0], pa[1]))[1]
    return result


def _apply_ranges(
    components: dict[str, int], ranges: list[str]
) -> list[tuple[str, int]]:
    """Suppress range-covered prefixes, advertise each non-empty range at the
    minimum component metric; uncovered prefixes pass through unchanged."""
    range_nets = sorted(
        (ipaddress.ip_network(r) for r in ranges),
        key=lambda n: (-n.prefixlen, int(n.network_address)),
    )
    out: dict[str, int] = {}
    for prefix in sorted(components, key=prefix_sort_key):
        metric = components[prefix]
        net = ipaddress.ip_network(prefix)
        cover = next((r for r in range_nets if net.subnet_of(r)), None)
        if cover is None:
            out[prefix] = min(metric, out.get(prefix, metric))
        else:
            key = str(cover)
            out[key] = min(metric, out.get(key, metric))
    return sorted(out.items(), key=lambda kv: prefix_sort_key(kv[0]))


def _ospf_routes(state: NetState):
    """Returns (routes per node, adjacency (a, b, area) triples)."""
    attachments = {n: _ospf_attachments(state, n) for n in state.nodes}

    adjacency_links = []
    for a, a_if, a_addr, b, b_if, b_addr, prefix in _addressed_links(state):
        cfg_a, cfg_b = state.configs[a], state.configs[b]
        if cfg_a.ospf is None or cfg_b.ospf is None:
            continue
        area_a = attachments[a].get(a_if)
        area_b = attachments[b].get(b_if)
        if area_a is None or area_a != area_b:
            continue
        if cfg_a.ospf.is_passive(a_if) or cfg_b.ospf.is_passive(b_if):
            continue
        adjacency_links.append((a, a_addr, b, b_addr, area_a))

    node_areas: dict[str, set[int]] = {n: set() for n in state.nodes}
    origins: dict[tuple[str, int], set[str]] = {}
    for node in state.nodes:
        for iface, area in sorted(attachments[node].items()):
            node_areas[node].add(area)
            assigned = state.configs[node].interfaces[iface]
            prefix = str(iface_network(*assigned))
            origins.setdefault((node, area), set()).add(prefix)

    areas = sorted({a for s in node_areas.values() for a in s})
    # Per-area neighbor map with the peer address per adjacency (min address
    # when parallel links join the same pair).
    neighbors: dict[int, dict[str, dict[str, str]]] = {area: {} for area in areas}
    for a, a_addr, b, b_addr, area in sorted(adjacency_links):
        amap = neighbors[area]
        fwd = amap.setdefault(a, {})
        if b not in fwd or b_addr < fwd[b]:
            fwd[b] = b_addr
        rev = amap.setdefault(b, {})
        if a not in rev or a_addr < rev[a]:
            rev[a] = a_addr

    def bfs(area: int, start: str) -> dict[str, int]:
        dist = {start: 0}
        frontier = [start]
        amap = neighbors.get(area, {})
        while frontier:
            nxt = []
            for node in sorted(frontier):
                for peer in sorted(amap.get(node, {})):
                    if peer not in dist:
                        dist[peer] = dist[node] + 1
                        nxt.append(peer)
            frontier = nxt
        return dist

    dist: dict[tuple[int, str], dict[str, int]] = {}
    for area in areas:
        members = sorted(n for n in state.nodes if area in node_areas[n])
        for n in members:
            dist[(area, n)] = bfs(area, n)

    def first_hop(area: int, src: str, dst: str) -> str | None:
        """Lowest next-hop address among shortest paths from src to dst."""
        d = dist[(area, src)]
        if dst not in d:
            return None
        if dst == src:
            return None
        best = None
        for peer, addr in sorted(neighbors[area].get(src, {}).items()):
            dp = dist[(area, peer)]
            if dst in dp and dp[dst] + 1 == d[dst]:
                if best is None or int(ipaddress.ip_address(addr)) < int(
                    ipaddress.ip_address(best)
                ):
                    best = addr
        return best

    # Intra-area routes: per node and area, reach every other member's origins.
    intra: dict[str, dict[str, tuple[int, str]]] = {n: {} for n in state.nodes}
    for area in areas:
        members = sorted(n for n in state.nodes if area in node_areas[n])
        for node in members:
            own = {p for a in node_areas[node] for p in origins.get((node, a), set())}
            for other in members:
                if other == node:
                    continue
                metric = dist[(area, node)].get(other)
                if metric is None:
                    continue
                hop = first_hop(area, node, other)
                if hop is None:
                    continue
                for prefix in sorted(origins.get((other, area), set()), key=prefix_sort_key):
                    if prefix in own:
                        continue
                    cand = (metric, hop)
                    cur = intra[node].get(prefix)
                    if cur is None or cand < cur:
                        intra[node][prefix] = cand

    # Border routers summarize their leaf areas into area 0 and re-inject
    # backbone-learned prefixes into the leaves.
    abrs = sorted(n for n in state.nodes if 0 in node_areas[n] and len(node_areas[n]) >= 2)

    def area_table(node: str, area: int) -> dict[str, int]:
        table = {p: 0 for p in origins.get((node, area), set())}
        members = {n for n in state.nodes if area in node_areas[n]}
        for prefix, (metric, _) in intra[node].items():
            for m in members:
                if prefix in origins.get((m, area), set()):
                    table[prefix] = min(metric, table.get(prefix, metric))
                    break
        return table

    injected_0: list[tuple[str, str, int]] = []  # (prefix, abr, metric at abr)
    for abr in abrs:
        cfg = state.configs[abr].ospf
        for area in sorted(node_areas[abr]):
            if area == 0:
                continue
            ranges = sorted(p for a, p in cfg.area_ranges if a == area)
            for prefix, metric in _apply_ranges(area_table(abr, area), ranges):
                injected_0.append((prefix, abr, metric))
    injected_0.sort(key=lambda t: (prefix_sort_key(t[0]), t[1], t[2]))

    inter: dict[str, dict[str, tuple[int, str]]] = {n: {} for n in state.nodes}

    def offer(node: str, prefix: str, metric: int, hop: str) -> None:
        cand = (metric, hop)
        cur = inter[node].get(prefix)
        if cur is None or cand < cur:
            inter[node][prefix] = cand

    # Backbone members receive every other border router's summaries.
    for node in state.nodes:
        if 0 not in node_areas[node]:
            continue
        for prefix, abr, metric in injected_0:
            if abr == node:
                continue
            d = dist[(0, node)].get(abr)
            hop = first_hop(0, node, abr)
            if d is None or hop is None:
                continue
            offer(node, prefix, d + metric, hop)

    # Leaf members receive, via each attached border router: the backbone's
    # own prefixes, summaries from other border routers, and the other leaf
    # areas of that border router (with their ranges applied).
    for abr in abrs:
        cfg = state.configs[abr].ospf
        backbone = dict(area_table(abr, 0))
        accepted = {}
        for prefix, other, metric in injected_0:
            if other == abr:
                continue
            d = dist[(0, abr)].get(other)
            if d is None:
                continue
            total = d + metric
            if prefix not in accepted or total < accepted[prefix]:
                accepted[prefix] = total
        for leaf in sorted(a for a in node_areas[abr] if a != 0):
            offering: dict[str, int] = dict(backbone)
            for prefix, metric in accepted.items():
                offering[prefix] = min(metric, offering.get(prefix, metric))
            for other_leaf in sorted(a for a in node_areas[abr] if a not in (0, leaf)):
                ranges = sorted(p for a, p in cfg.area_ranges if a == other_leaf)
                for prefix, metric in _apply_ranges(area_table(abr, other_leaf), ranges):
                    offering[prefix] = min(metric, offering.get(prefix, metric))
            for node in state.nodes:
                if node == abr or leaf not in node_areas[node]:
                    continue
                d = dist[(leaf, node)].get(abr)
                hop = first_hop(leaf, node, abr)
                if d is None or hop is None:
                    continue
                for prefix in sorted(offering, key=prefix_sort_key):
                    offer(node, prefix, d + offering[prefix], hop)

    routes: dict[str, list[Route]] = {n: [] for n in state.nodes}
    for node in state.nodes:
        own = {p for a in node_areas[node] for p in origins.get((node, a), set())}
        merged: dict[str, tuple[int, int, str]] = {}
        for prefix, (metric, hop) in intra[node].items():
            merged[prefix] = (0, metric, hop)
        for prefix, (metric, hop) in inter[node].items():
            if prefix in own:
                continue
            cand = (1, metric, hop)
            if prefix not in merged or cand < merged[prefix]:
                merged[prefix] = cand
        for prefix in sorted(merged, key=prefix_sort_key):
            _, metric, hop = merged[prefix]
            routes[node].append(Route(prefix, hop, "ospf", metric))

    adjacency_areas = tuple(
        sorted({(min(a, b), max(a, b), area) for a, _, b, _, area in adjacency_links})
    )
    return routes, adjacency_areas


def rib_lookup(routes, addr: str) -> Route | None:
    """Longest-prefix-match lookup; at most one route exists per prefix."""
    target = ipaddress.ip_address(addr)
    best = None
    for route in routes:
        net = route.network()
        if target in net:
            if best is None or net.prefixlen > best.network().prefixlen:
                best = route
    return best


def rib_covers(routes, addr: str) -> bool:
    return rib_lookup(routes, addr) is not None


def _first_match(filters, peer_ip: str, direction: str, prefix: str) -> str:
    for f_peer, f_dir, f_action, f_prefix in filters:
        if f_peer == peer_ip and f_dir == direction and f_prefix == prefix:
            return f_action
    return "permit"


def _bgp(state: NetState, base_rib: dict[str, list[Route]], prev_bgp: dict[str, list[Route]]):
    # Session discovery: mutual neighbor statements with matching ASNs and
    # mutually reachable peer addresses (reachability may come from routes
    # learned in the previous sweep).
    sessions = []
    bgp_nodes = sorted(n for n in state.nodes if state.configs[n].bgp is not None)
    addr_map = {n: state.configs[n].addresses() for n in state.nodes}
    reach = {
        n: list(base_rib[n]) + list(prev_bgp.get(n, [])) for n in state.nodes
    }
    for i, a in enumerate(bgp_nodes):
        for b in bgp_nodes[i + 1 :]:
            cfg_a, cfg_b = state.configs[a].bgp, state.configs[b].bgp
            b_addrs = [
                addr
                for addr in addr_map[b]
                if cfg_a.neighbors.get(addr) == cfg_b.asn and rib_covers(reach[a], addr)
            ]
            a_addrs = [
                addr
                for addr in addr_map[a]
                if cfg_b.neighbors.get(addr) == cfg_a.asn and rib_covers(reach[b], addr)
            ]
            if a_addrs and b_addrs:
                sessions.append((a, b, min(a_addrs), min(b_addrs)))

    # Path-vector tables: prefix -> (as_path, peer_addr or None). Own
    # advertisements carry the empty path and always win locally.
    def empty_tables():
        tables = {}
        for node in bgp_nodes:
            tables[node] = {
                p: ((), None) for p in sorted(state.configs[node].bgp.advertised)
            }
        return tables

    tables = empty_tables()
    for _ in range(2 * len(state.nodes) + 4):
        received: dict[str, dict[str, list[tuple[tuple, str]]]] = {
            n: {} for n in bgp_nodes
        }
        for a, b, a_addr, b_addr in sessions:
            for sender, receiver, sender_addr_at_receiver, receiver_addr_at_sender in (
                (a, b, a_addr, b_addr),
                (b, a, b_addr, a_addr),
            ):
                s_cfg = state.configs[sender].bgp
                r_cfg = state.configs[receiver].bgp
                for prefix in sorted(tables[sender], key=prefix_sort_key):
                    path, _ = tables[sender][prefix]
                    out = _first_match(
                        s_cfg.filters, receiver_addr_at_sender, "out", prefix
                    )
                    if out == "deny":
                        continue
                    new_path = (s_cfg.asn,) + path
                    if r_cfg.asn in new_path:
                        continue
                    if _first_match(r_cfg.filters, sender_addr_at_receiver, "in", prefix) == "deny":
                        continue
                    received[receiver].setdefault(prefix, []).append(
                        (new_path, sender_addr_at_receiver)
                    )
        nxt = empty_tables()
        for node in bgp_nodes:
            for prefix in sorted(received[node], key=prefix_sort_key):
                if prefix in nxt[node]:
                    continue  # own advertisement wins
                best = min(
                    received[node][prefix],
                    key=lambda c: (len(c[0]), int(ipaddress.ip_address(c[1]))),
                )
                nxt[node][prefix] = best
        if nxt == tables:
            break
        tables = nxt

    routes: dict[str, list[Route]] = {n: [] for n in state.nodes}
    for node in bgp_nodes:
        for prefix in sorted(tables[node], key=prefix_sort_key):
            path, peer_addr = tables[node][prefix]
            if peer_addr is None:
                continue
            hop = _resolve_first_hop(state, node, peer_addr, base_rib[node])
            if hop is None:
                continue
            routes[node].append(Route(prefix, hop, "bgp", len(path)))

    canonical_tables = tuple(
        (node, tuple(sorted(tables[node].items())))
        for node in bgp_nodes
    )
    return routes, tuple(sorted(sessions)), canonical_tables


def _resolve_first_hop(state: NetState, node: str, peer_addr: str, base: list[Route]) -> str | None:
    """Reduce a (possibly remote) peer address to a directly connected hop."""
    target = ipaddress.ip_address(peer_addr)
    for iface in sorted(state.configs[node].interfaces):
        assigned = state.configs[node].interfaces[iface]
        if assigned is not None and target in iface_network(*assigned):
            return peer_addr
    route = rib_lookup(base, peer_addr)
    if route is None or route.next_hop == "connected":
        return None
    return route.next_hop


def derive(state: NetState, prev_bgp: dict[str, list[Route]] | None = None) -> Derived:
    """One full control-plane recomputation sweep."""
    prev_bgp = prev_bgp or {}
    connected = _connected_routes(state)
    static = _static_routes(state, connected)
    rip = _rip_routes(state)
    ospf, adjacency_areas = _ospf_routes(state)

    base_rib: dict[str, list[Route]] = {}
    for node in state.nodes:
        base_rib[node] = _merge(connected[node] + static[node] + rip[node] + ospf[node])

    bgp, sessions, tables = _bgp(state, base_rib, prev_bgp)

    rib = tuple(
        (node, tuple(_merge(base_rib[node] + bgp[node])))
        for node in state.nodes
    )
    return Derived(
        adjacency_areas=adjacency_areas,
        session_endpoints=sessions,
        rib=rib,
        bgp_tables=tables,
    )


def _merge(candidates: list[Route]) -> list[Route]:
    by_prefix: dict[str, list[Route]] = {}
    for route in candidates:
        by_prefix.setdefault(route.prefix, []).append(route)
    return [
        _best(by_prefix[p]) for p in sorted(by_prefix, key=prefix_sort_key)
    ]


def bgp_routes_of(derived: Derived) -> dict[str, list[Route]]:
    return {
        node: [r for r in routes if r.protocol == "bgp"]
        for node, routes in derived.rib
    }


def ping_walk(state: NetState, src: str, target: str) -> bool:
    """Bidirectional reachability: hop-by-hop forward walk to the owner of
    the target address, then a covering return route back to the source."""
    if src not in state.nodes:
        return False
    rib = {n: list(state.rib.get(n, ())) for n in state.nodes}
    assigned_anywhere = {a for _, _, a in state.assigned_addresses()}
    if target not in assigned_anywhere:
        return False

    current = src
    source_addr: str | None = None
    visited = set()
    for _ in range(len(state.nodes) + 2):
        cfg = state.configs[current]
        if target in cfg.addresses():
            if current == src:
                return True
            if source_addr is None:
                return False
            return rib_covers(rib[current], source_addr)
        route = rib_lookup(rib[current], target)
        if route is None:
            return False
        next_node = None
        egress_addr = None
        if route.next_hop == "connected":
            for own_if, peer, peer_if in state.node_links(current):
                assigned = cfg.interfaces.get(own_if)
                if assigned is None or str(iface_network(*assigned)) != route.prefix:
                    continue
                peer_assigned = state.configs[peer].interfaces.get(peer_if)
                if peer_assigned is not None and peer_assigned[0] == target:
                    next_node = peer
                    egress_addr = assigned[0]
                    break
            if next_node is None:
                return False
        else:
            hop_ip = ipaddress.ip_address(route.next_hop)
            for own_if, peer, peer_if in state.node_links(current):
                assigned = cfg.interfaces.get(own_if)
                if assigned is None or hop_ip not in iface_network(*assigned):
                    continue
                peer_assigned = state.configs[peer].interfaces.get(peer_if)
                if peer_assigned is not None and peer_assigned[0] == route.next_hop:
                    next_node = peer
                    egress_addr = assigned[0]
                    break
            if next_node is None:
                return False
        if source_addr is None:
            source_addr = egress_addr
        if next_node in visited:
            return False
        visited.add(current)
        current = next_node
    return False
